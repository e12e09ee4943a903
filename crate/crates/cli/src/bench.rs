use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use streamvote::profiles::{planted_profile, DEFAULT_SHARE};
use streamvote::rules::RuleError;
use streamvote::streamwinner::DEFAULT_SAMPLE_CONSTANT;
use streamvote::{
    exact_winner, is_eps_winner, CandidateId, ElectionProfile, Mode, Rule, StreamConfig, StreamWinnerEstimator,
};

use crate::{io_err, parse_rule, CliError};

pub const CSV_VERSION: u32 = 1;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Rule to sweep; repeat for several.
    #[arg(long = "rule", value_parser = parse_rule, required = true)]
    rules: Vec<Rule>,
    /// `known`, `unknown` or `window:<N>`; comma separated.
    #[arg(long, value_delimiter = ',', default_value = "known")]
    mode: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10000")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Share of votes favouring the planted winner.
    #[arg(long, default_value_t = DEFAULT_SHARE)]
    share: f64,
    /// First trial seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CONSTANT)]
    constant: f64,
    /// CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub version: u32,
    pub cell: usize,
    pub rule: String,
    pub mode: String,
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub winner: u32,
    pub oracle_winner: u32,
    pub correct: bool,
    pub counters_used: usize,
    pub samples_stored: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
struct Cell {
    rule: Rule,
    mode: String,
    m: usize,
    n: usize,
    eps: f64,
}

const PLANTED: CandidateId = CandidateId(0);

fn mode_for(spec: &str, n: usize) -> Result<Mode, CliError> {
    match spec {
        "known" => Ok(Mode::KnownN { n_lo: n as u64, n_hi: n as u64 }),
        other => other.parse().map_err(|e: streamvote::streamwinner::EstimatorError| CliError::Usage(e.to_string())),
    }
}

fn trial(cell_id: usize, cell: &Cell, a: &BenchArgs, seed: u64) -> Result<BenchRecord, CliError> {
    let mut gen = ChaCha8Rng::seed_from_u64(seed ^ (cell_id as u64).rotate_left(32));
    let profile = planted_profile(&cell.rule, cell.m, cell.n, PLANTED, a.share, &mut gen);
    let mode = mode_for(&cell.mode, cell.n)?;
    let cfg = StreamConfig::new(cell.rule.clone(), cell.m, cell.eps, a.delta, mode)
        .seed(seed)
        .sample_constant(a.constant);
    let start = Instant::now();
    let mut est = StreamWinnerEstimator::new(cfg)?;
    for v in profile.votes() {
        est.observe(v)?;
    }
    let (winner, report) = est.finalize()?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let scored = match mode {
        Mode::SlidingWindow(w) => {
            let skip = profile.n().saturating_sub(w as usize);
            ElectionProfile::new(cell.m, profile.kind(), profile.votes()[skip..].to_vec())?
        }
        _ => profile,
    };
    let oracle = exact_winner(&scored, &cell.rule)?;
    let correct = match is_eps_winner(&scored, &cell.rule, winner, cell.eps) {
        Ok(ok) => ok,
        Err(RuleError::TooLarge { .. }) => winner == PLANTED,
        Err(e) => return Err(CliError::Internal(e.to_string())),
    };
    Ok(BenchRecord {
        version: CSV_VERSION,
        cell: cell_id,
        rule: cell.rule.to_string(),
        mode: cell.mode.clone(),
        m: cell.m,
        n: cell.n,
        eps: cell.eps,
        delta: a.delta,
        seed,
        winner: winner.0,
        oracle_winner: oracle.0,
        correct,
        counters_used: report.counters_used,
        samples_stored: report.samples_stored,
        wall_ms,
    })
}

/// `δ + 3·sqrt(δ(1−δ)/T)`.
pub fn failure_bound(delta: f64, trials: usize) -> f64 {
    delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt()
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    for r in records {
        w.serialize(r).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let records = r
        .deserialize()
        .collect::<Result<Vec<BenchRecord>, _>>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(bad) = records.iter().find(|r| r.version != CSV_VERSION) {
        return Err(CliError::Usage(format!("unsupported bench CSV version {}", bad.version)));
    }
    Ok(records)
}

pub fn run(a: &BenchArgs) -> Result<(), CliError> {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&a.share) {
        return Err(CliError::Usage(format!("share must lie in [0, 1], got {}", a.share)));
    }
    let mut cells = Vec::new();
    for rule in &a.rules {
        for mode in &a.mode {
            for &m in &a.m {
                for &n in &a.n {
                    for &eps in &a.eps {
                        rule.validate(m)?;
                        mode_for(mode, n)?;
                        if n == 0 {
                            return Err(CliError::Usage("n must be positive".into()));
                        }
                        cells.push(Cell { rule: rule.clone(), mode: mode.clone(), m, n, eps });
                    }
                }
            }
        }
    }
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..a.trials as u64).map(move |t| (c, a.seed + t)))
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(c, seed)| trial(c, &cells[c], a, seed))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| (r.cell, r.seed));

    if let Some(path) = &a.csv {
        write_records(path, &records)?;
        let back = read_records(path)?;
        if back.len() != records.len() || back.iter().zip(&records).any(|(x, y)| (x.cell, x.seed, x.winner) != (y.cell, y.seed, y.winner)) {
            return Err(CliError::Internal("bench CSV did not reload identically".into()));
        }
    }

    let bound = failure_bound(a.delta, a.trials);
    let mut breached = Vec::new();
    for (id, cell) in cells.iter().enumerate() {
        let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.cell == id).collect();
        let t = rows.len() as f64;
        let failure = rows.iter().filter(|r| !r.correct).count() as f64 / t;
        let counters = rows.iter().map(|r| r.counters_used as f64).sum::<f64>() / t;
        let samples = rows.iter().map(|r| r.samples_stored as f64).sum::<f64>() / t;
        let ms = rows.iter().map(|r| r.wall_ms).sum::<f64>() / t;
        println!(
            "cell={id} rule={} mode={} m={} n={} eps={} failure={failure:.3} bound={bound:.3} mean_counters={counters:.1} mean_samples={samples:.1} mean_ms={ms:.2}",
            cell.rule, cell.mode, cell.m, cell.n, cell.eps
        );
        if failure > bound {
            breached.push(id);
        }
    }
    if !breached.is_empty() {
        return Err(CliError::Internal(format!("failure rate above {bound:.3} in cells {breached:?}")));
    }
    Ok(())
}

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use streamvote::rules::{bucklin_depths, copeland_scores, maximin_scores, profile_tally, RuleError};
use streamvote::streamwinner::{Capacity, EstimatorError, Storage, DEFAULT_SAMPLE_CONSTANT};
use streamvote::votes::{VoteError, VoteReader};
use streamvote::{exact_winner, ElectionProfile, Mode, Rule, StreamConfig, StreamWinnerEstimator};

mod bench;
mod gen;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<VoteError> for CliError {
    fn from(e: VoteError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RuleError> for CliError {
    fn from(e: RuleError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Config(_) | EstimatorError::Vote(_) | EstimatorError::Rule(_) | EstimatorError::NoVotes => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

pub fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Usage(format!("{}: {e}", path.display()))
}

/// Approximate election winners over vote streams.
#[derive(Parser, Debug)]
#[command(name = "streamvote", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact winner and score table of a vote file.
    Winner {
        /// Vote file, `-` for stdin.
        #[arg(default_value = "-")]
        file: PathBuf,
        #[arg(long, value_parser = parse_rule)]
        rule: Rule,
    },
    /// Single-pass streaming winner with a memory report.
    Stream(StreamArgs),
    /// Write a generated vote file.
    #[command(subcommand)]
    Gen(gen::GenCommand),
    /// Seeded accuracy and memory sweep over a grid of settings.
    Bench(bench::BenchArgs),
}

#[derive(Args, Debug)]
struct StreamArgs {
    #[arg(default_value = "-")]
    file: PathBuf,
    #[arg(long, value_parser = parse_rule)]
    rule: Rule,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// `known:<lo>,<hi>`, `unknown` or `window:<N>`; defaults to the header's n hint, else unknown.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed sampling rate instead of the sized budget.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, value_parser = parse_capacity, default_value = "auto")]
    capacity: Capacity,
    #[arg(long, value_parser = parse_storage, default_value = "auto")]
    storage: Storage,
    /// Sample-size constant.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CONSTANT)]
    constant: f64,
    /// Count the stream with a Morris counter (unknown-n only).
    #[arg(long)]
    approx_count: bool,
}

pub fn parse_rule(s: &str) -> Result<Rule, String> {
    s.parse().map_err(|e: RuleError| e.to_string())
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: EstimatorError| e.to_string())
}

fn parse_capacity(s: &str) -> Result<Capacity, String> {
    match s {
        "auto" => Ok(Capacity::Auto),
        "max" => Ok(Capacity::Max),
        _ => Err(format!("capacity must be auto or max, got `{s}`")),
    }
}

fn parse_storage(s: &str) -> Result<Storage, String> {
    match s {
        "auto" => Ok(Storage::Auto),
        "sketch" => Ok(Storage::Sketch),
        "samples" => Ok(Storage::StoreSamples),
        _ => Err(format!("storage must be auto, sketch or samples, got `{s}`")),
    }
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(io_err(path))?;
    Ok(Box::new(BufReader::new(f)))
}

/// Destination for generated output: a file or stdout.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(io_err(p))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

/// Per-candidate table printed by `winner`: a label row, then one row per candidate.
fn score_table(profile: &ElectionProfile, rule: &Rule) -> Result<Vec<String>, CliError> {
    let m = profile.m();
    let tally = profile_tally(profile, rule)?;
    let (label, rows): (&str, Vec<String>) = match rule {
        Rule::Maximin => ("maximin", maximin_scores(m, &tally).iter().map(f64::to_string).collect()),
        Rule::Copeland => ("copeland", copeland_scores(m, &tally).iter().map(f64::to_string).collect()),
        Rule::Bucklin => (
            "depth\tcount",
            bucklin_depths(m, &tally, profile.n() as f64)
                .into_iter()
                .map(|(d, c)| format!("{d}\t{c}"))
                .collect(),
        ),
        Rule::Runoff => ("first_round", (0..m).map(|c| tally[c * (m + 1)].to_string()).collect()),
        _ => ("score", tally.iter().map(f64::to_string).collect()),
    };
    let mut out = vec![format!("candidate\t{label}")];
    out.extend(rows.into_iter().enumerate().map(|(c, r)| format!("{c}\t{r}")));
    Ok(out)
}

fn cmd_winner(file: &Path, rule: &Rule) -> Result<(), CliError> {
    let (_, profile) = VoteReader::new(open_input(file)?)?.into_profile()?;
    rule.validate(profile.m())?;
    let winner = exact_winner(&profile, rule)?;
    let mut out = io::stdout().lock();
    let mut lines = vec![format!("winner={winner}")];
    lines.extend(score_table(&profile, rule)?);
    for l in lines {
        writeln!(out, "{l}").map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(())
}

fn cmd_stream(a: &StreamArgs) -> Result<(), CliError> {
    let reader = VoteReader::new(open_input(&a.file)?)?;
    let header = reader.header().clone();
    let mode = a.mode.unwrap_or(match header.n_hint {
        Some((lo, hi)) => Mode::KnownN { n_lo: lo, n_hi: hi },
        None => Mode::UnknownN,
    });
    let mut cfg = StreamConfig::new(a.rule.clone(), header.m, a.eps, a.delta, mode)
        .seed(a.seed)
        .capacity(a.capacity)
        .storage(a.storage)
        .sample_constant(a.constant)
        .approximate_count(a.approx_count);
    if let Some(r) = a.rate {
        cfg = cfg.rate(r);
    }
    let mut est = StreamWinnerEstimator::new(cfg)?;
    for v in reader {
        est.observe(&v?)?;
    }
    let ell = est.budget().ell;
    let backend = est.backend_name();
    let n_hat = est.n_hat();
    let (winner, report) = est.finalize()?;
    println!("winner={winner}");
    println!("n_hat={n_hat} ell={ell} backend={backend}");
    println!("{report}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Winner { file, rule } => cmd_winner(file, rule),
        Command::Stream(a) => cmd_stream(a),
        Command::Gen(g) => gen::run(g),
        Command::Bench(b) => bench::run(b),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use streamvote::adversarial::{self, AdversarialError, AdversarialStream};
use streamvote::profiles::{planted_margin, planted_profile, uniform_profile, DEFAULT_SHARE};
use streamvote::votes::write_votes;
use streamvote::{CandidateId, Rule, VoteKind};

use crate::{open_output, parse_rule, CliError};

#[derive(Args, Debug)]
pub struct Out {
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IndexArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    n: u64,
    /// Alice's vector, 1-based entries.
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<usize>,
    /// Bob's index, 1-based.
    #[arg(long)]
    i: usize,
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// Plurality election from an augmented-indexing instance.
    Augidx {
        #[command(flatten)]
        idx: IndexArgs,
        #[command(flatten)]
        out: Out,
    },
    /// Plurality election whose winner is the argmax of x + y.
    Maxsum {
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<u64>,
        #[command(flatten)]
        out: Out,
    },
    /// Ranking election with a Condorcet winner planted on the indexed block.
    Ring {
        #[command(flatten)]
        idx: IndexArgs,
        #[command(flatten)]
        out: Out,
    },
    /// Borda election built from position blocks.
    Block {
        #[command(flatten)]
        idx: IndexArgs,
        #[command(flatten)]
        out: Out,
    },
    /// Three-vote-per-bit plurality election deciding a > b.
    Greater {
        #[arg(long)]
        a: u32,
        #[arg(long)]
        b: u32,
        #[command(flatten)]
        out: Out,
    },
    /// Plurality election from three players' sets.
    Disjoint {
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        a: Vec<u32>,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        b: Vec<u32>,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        c: Vec<u32>,
        #[command(flatten)]
        out: Out,
    },
    /// k-approval election with a planted winner.
    Kapproval {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        inv_eps: usize,
        #[arg(long)]
        n: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<usize>,
        #[arg(long)]
        i: usize,
        #[command(flatten)]
        out: Out,
    },
    /// k-veto election with a planted winner on a grid of candidates.
    Kveto {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        n: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<usize>,
        #[arg(long)]
        i: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Generalized-plurality election from an augmented-indexing instance.
    Genplurality {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        idx: IndexArgs,
        #[command(flatten)]
        out: Out,
    },
    /// Random profile with a planted winner.
    Planted {
        #[arg(long, value_parser = parse_rule)]
        rule: Rule,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        winner: u32,
        /// Share of votes favouring the winner.
        #[arg(long, conflicts_with = "margin")]
        share: Option<f64>,
        /// Smallest acceptable realized margin; the share is raised until it is met.
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Uniformly random profile.
    Uniform {
        #[arg(long, value_parser = parse_kind)]
        kind: VoteKind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
}

fn parse_kind(s: &str) -> Result<VoteKind, String> {
    s.parse().map_err(|e: streamvote::votes::VoteError| e.to_string())
}

fn usage(e: AdversarialError) -> CliError {
    CliError::Usage(e.to_string())
}

fn write_stream(s: &AdversarialStream, out: &Out) -> Result<(), CliError> {
    let mut w = open_output(out.out.as_deref())?;
    let io = |e: std::io::Error| CliError::Usage(e.to_string());
    writeln!(w, "# expected_winner={} eps_guarantee={}", s.expected_winner, s.eps_guarantee).map_err(io)?;
    s.write(&mut w).map_err(io)?;
    w.flush().map_err(io)
}

fn hinted(p: &streamvote::ElectionProfile) -> streamvote::StreamHeader {
    let n = p.n().max(1) as u64;
    p.header().with_n_hint(n, n)
}

fn set(ids: &[u32]) -> BTreeSet<u32> {
    ids.iter().copied().collect()
}

fn planted(
    rule: &Rule,
    m: usize,
    n: usize,
    winner: u32,
    share: Option<f64>,
    margin: Option<f64>,
    seed: u64,
) -> Result<(streamvote::ElectionProfile, f64), CliError> {
    rule.validate(m)?;
    if winner as usize >= m || n == 0 {
        return Err(CliError::Usage(format!("need n >= 1 and winner < m={m}")));
    }
    let winner = CandidateId(winner);
    let make = |share: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = planted_profile(rule, m, n, winner, share, &mut rng);
        let got = planted_margin(&p, rule, winner);
        (p, got)
    };
    let Some(target) = margin else {
        let share = share.unwrap_or(DEFAULT_SHARE);
        if !(0.0..=1.0).contains(&share) {
            return Err(CliError::Usage(format!("share must lie in [0, 1], got {share}")));
        }
        return Ok(make(share));
    };
    let mut share = target.clamp(0.0, 1.0);
    loop {
        let (p, got) = make(share);
        if got >= target {
            return Ok((p, got));
        }
        if share >= 1.0 {
            return Err(CliError::Usage(format!("margin {target} is not reachable (got {got:.4} at share 1)")));
        }
        share = (share + 0.02).min(1.0);
    }
}

pub fn run(cmd: &GenCommand) -> Result<(), CliError> {
    let stream = match cmd {
        GenCommand::Augidx { idx, out } => (adversarial::gen_augidx_plurality(idx.eps, idx.n, &idx.x, idx.i), out),
        GenCommand::Maxsum { x, y, out } => (adversarial::gen_maxsum_plurality(x, y), out),
        GenCommand::Ring { idx, out } => (adversarial::gen_condorcet_ring(idx.eps, idx.n, &idx.x, idx.i), out),
        GenCommand::Block { idx, out } => (adversarial::gen_block_positional(idx.eps, idx.n, &idx.x, idx.i), out),
        GenCommand::Greater { a, b, out } => (adversarial::gen_greater_than(*a, *b), out),
        GenCommand::Disjoint { m, a, b, c, out } => {
            (adversarial::gen_disjointness(*m, [&set(a), &set(b), &set(c)]), out)
        }
        GenCommand::Kapproval { k, inv_eps, n, x, i, out } => {
            (adversarial::gen_kapproval_planted(*k, *inv_eps, *n, x, *i), out)
        }
        GenCommand::Kveto { k, rows, cols, n, x, i, out } => {
            (adversarial::gen_kveto_planted(*k, *rows, *cols, *n, x, *i), out)
        }
        GenCommand::Genplurality { m, idx, out } => {
            (adversarial::gen_genplurality_augidx(idx.eps, *m, idx.n, &idx.x, idx.i), out)
        }
        GenCommand::Planted { rule, m, n, winner, share, margin, seed, out } => {
            let (p, got) = planted(rule, *m, *n, *winner, *share, *margin, *seed)?;
            let mut w = open_output(out.out.as_deref())?;
            let io = |e: std::io::Error| CliError::Usage(e.to_string());
            writeln!(w, "# planted_winner={winner} margin={got:.6}").map_err(io)?;
            write_votes(&mut w, &hinted(&p), p.votes(), None).map_err(io)?;
            return w.flush().map_err(io);
        }
        GenCommand::Uniform { kind, m, n, seed, out } => {
            if *m == 0 || *n == 0 {
                return Err(CliError::Usage("m and n must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let p = uniform_profile(*kind, *m, *n, &mut rng);
            let mut w = open_output(out.out.as_deref())?;
            let io = |e: std::io::Error| CliError::Usage(e.to_string());
            write_votes(&mut w, &hinted(&p), p.votes(), None).map_err(io)?;
            return w.flush().map_err(io);
        }
    };
    let (s, out) = stream;
    write_stream(&s.map_err(usage)?, out)
}

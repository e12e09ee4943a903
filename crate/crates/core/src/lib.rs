//! Streaming approximate winner determination.
//!
//! `streamvote` finds ε-winners of large vote streams while keeping only a
//! small sample of the votes and a frequency sketch over them. A candidate is
//! an ε-winner if replacing at most ⌊εn⌋ of the n votes can make it a
//! (co-)winner.
//!
//! * [`votes`]: candidates, ballots, profiles and the text file format.
//! * [`rules`]: exact winners for every rule and an exhaustive ε-winner check.
//! * [`sketches`]: Misra-Gries, count-min and Morris counters.
//! * [`samplers`]: coin-toss, Bernoulli, reservoir and sliding-window sampling.
//! * [`streamwinner`]: the online estimators.
//! * [`adversarial`]: hard election constructions with known winners.
//! * [`profiles`]: random and planted-margin profile generators.

pub mod adversarial;
pub mod codec;
pub mod profiles;
pub mod rng;
pub mod rules;
pub mod samplers;
pub mod sketches;
pub mod streamwinner;
pub mod votes;

pub use rng::CountingRng;
pub use rules::{exact_scores, exact_winner, is_eps_winner, majority_graph, Rule, ScoreVector};
pub use streamwinner::{
    budget_for, Mode, MemoryReport, SampleBudget, StreamConfig, StreamWinnerEstimator,
};
pub use votes::{CandidateId, ElectionProfile, Sign, StreamHeader, Vote, VoteKind};

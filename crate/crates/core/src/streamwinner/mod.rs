//! Online ε-winner estimators.
//!
//! An estimator samples votes (Bernoulli when the stream length is roughly
//! known, a reservoir when it is not, chain samplers over a sliding window),
//! expands each sampled vote into derived items for its rule and counts them
//! in a frequency sketch. The winner is computed from the sketch estimates.
//! For the pairwise and Bucklin rules it can instead keep the sampled votes
//! whole and run the exact rule on them.

mod budget;
mod config;
mod derived;
mod snapshot;

use std::fmt;

use thiserror::Error;

pub use budget::{budget_for, log_factor, SampleBudget, DEFAULT_SAMPLE_CONSTANT};
pub use config::{Capacity, Mode, Storage, StreamConfig};
pub use derived::{DerivedItem, Expansion};

use crate::codec::{CodecError, Reader, Writer};
use crate::rng::CountingRng;
use crate::rules::{self, Rule, RuleError};
use crate::samplers::{bernoulli_sample_rate, BernoulliSampler, Delta, Reservoir, WindowSampler};
use crate::sketches::{CountMin, DenseCounter, FrequencySketch, MisraGries, MorrisCounter, SketchError};
use crate::votes::{CandidateId, Vote, VoteError};

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Vote(#[from] VoteError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("no votes observed")]
    NoVotes,
    #[error("bad snapshot: {0}")]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
}

/// Space actually used by an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MemoryReport {
    /// Sketch counters in use, summed over sketches.
    pub counters_used: usize,
    /// Votes currently held as samples.
    pub samples_stored: usize,
    /// Waiting successor votes in window mode.
    pub successors_stored: usize,
    pub sketch_bits_estimate: u64,
    pub rng_bits_consumed: u64,
}

impl fmt::Display for MemoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "counters_used={} samples_stored={} successors_stored={} sketch_bits_estimate={} rng_bits_consumed={}",
            self.counters_used,
            self.samples_stored,
            self.successors_stored,
            self.sketch_bits_estimate,
            self.rng_bits_consumed
        )
    }
}

/// Estimated tally of the sampled votes, in the layout of
/// [`rules::winners_from_tally`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleScores {
    pub tally: Vec<f64>,
    /// Votes the tally is built from.
    pub sample_size: u64,
    /// Estimated stream (or window) length.
    pub n_hat: f64,
    /// `n_hat / sample_size`, the factor from sample counts to population counts.
    pub scale: f64,
}

impl SampleScores {
    /// `D̂(x, y) = scale · (N(x, y) − N(y, x))` for pairwise tallies, row-major.
    pub fn pairwise_margins(&self, m: usize) -> Option<Vec<f64>> {
        if self.tally.len() != m * m {
            return None;
        }
        let mut d = vec![0.0; m * m];
        for x in 0..m {
            for y in 0..m {
                if x != y {
                    d[x * m + y] = self.scale * (self.tally[x * m + y] - self.tally[y * m + x]);
                }
            }
        }
        Some(d)
    }
}

/// A sampled vote, with the scored position already drawn for drawn scoring rules.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledVote {
    pub vote: Vote,
    pub pick: Option<u32>,
}

/// Sample-space scores for positional rules, normalized so the weights sum to 1.
///
/// Returns `(ŝ, s̄)`: `ŝ(x)` scales each sampled vote's normalized positional
/// score of `x` by `n/ℓ`; `s̄(x)` instead draws one position per vote with
/// probability `α'_i` and scales how often `x` was drawn.
pub fn two_stage_estimates(
    sample: &[Vote],
    alpha: &[f64],
    n: f64,
    rng: &mut CountingRng,
) -> (Vec<f64>, Vec<f64>) {
    let m = alpha.len();
    let total: f64 = alpha.iter().sum();
    let mut cumulative = Vec::with_capacity(m);
    let mut acc = 0.0;
    for a in alpha {
        acc += a / total;
        cumulative.push(acc);
    }
    let expansion = Expansion::Draw {
        alpha: alpha.to_vec(),
        cumulative,
    };
    let mut s_hat = vec![0.0; m];
    let mut s_bar = vec![0.0; m];
    for v in sample {
        if let Vote::Ranking(order) = v {
            for (c, a) in order.iter().zip(alpha) {
                s_hat[c.index()] += a / total;
            }
            if let Some(i) = expansion.draw_pick(v, rng) {
                s_bar[order[i as usize].index()] += 1.0;
            }
        }
    }
    let scale = if sample.is_empty() { 0.0 } else { n / sample.len() as f64 };
    s_hat.iter_mut().chain(s_bar.iter_mut()).for_each(|s| *s *= scale);
    (s_hat, s_bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Resolved {
    Sketch,
    Samples,
}

#[derive(Debug, Clone)]
enum Sampler {
    Known {
        select: BernoulliSampler,
        selected: u64,
        store: Option<Reservoir<SampledVote>>,
    },
    Unknown(Reservoir<SampledVote>),
    Window(WindowSampler<SampledVote>),
}

#[derive(Debug, Clone)]
struct Sketches {
    main: FrequencySketch,
    /// Disapprovals, for generalized plurality.
    negative: Option<FrequencySketch>,
}

impl Sketches {
    fn apply(&mut self, expansion: &Expansion, m: usize, s: &SampledVote, sign: i64) -> Result<(), SketchError> {
        for (item, w) in expansion.expand(&s.vote, s.pick) {
            let code = item.code(m);
            match &mut self.negative {
                Some(neg) if w < 0 => neg.update(code, -w * sign)?,
                _ => self.main.update(code, w * sign)?,
            }
        }
        Ok(())
    }

    fn apply_delta(&mut self, expansion: &Expansion, m: usize, d: &Delta<SampledVote>) -> Result<(), SketchError> {
        if let Some(old) = &d.evicted {
            self.apply(expansion, m, old, -1)?;
        }
        if let Some(new) = &d.inserted {
            self.apply(expansion, m, new, 1)?;
        }
        Ok(())
    }

    fn iter(&self) -> impl Iterator<Item = &FrequencySketch> {
        std::iter::once(&self.main).chain(self.negative.as_ref())
    }
}

/// Streaming (ε, δ)-winner estimator for one rule and one stream.
#[derive(Debug, Clone)]
pub struct StreamWinnerEstimator {
    config: StreamConfig,
    budget: SampleBudget,
    expansion: Expansion,
    storage: Resolved,
    rng: CountingRng,
    observed: u64,
    morris: Option<MorrisCounter>,
    sampler: Sampler,
    sketches: Option<Sketches>,
}

/// Error budget of each sketch, relative to the length of the derived stream.
fn sketch_eps(rule: &Rule, expansion: &Expansion, eps: f64, m: usize) -> f64 {
    let pairs = (m * m.saturating_sub(1) / 2) as f64;
    let e = match expansion {
        Expansion::TopK(k) | Expansion::BottomK(k) => eps / (3.0 * *k as f64),
        Expansion::Signed => eps / 10.0,
        Expansion::Draw { .. } => expansion.top_weight().unwrap_or(1.0) * eps / 3.0,
        Expansion::Weighted(_) => eps / 3.0,
        Expansion::Approvals => eps / (2.0 * m as f64),
        Expansion::Pairs if *rule == Rule::Copeland => eps / (2.0 * pairs * (m as f64).ln().max(1.0)),
        Expansion::Pairs => eps / (2.0 * pairs),
        Expansion::Depths => eps / (m * (m + 1)) as f64,
        Expansion::PairsAndTop => eps / (2.0 * (pairs + 1.0)),
    };
    e.min(1.0)
}

fn build_sketch(config: &StreamConfig, expansion: &Expansion, seed: u64, queries: usize) -> Result<FrequencySketch, SketchError> {
    let universe = expansion.universe(config.m);
    if config.capacity == Capacity::Max {
        return Ok(FrequencySketch::Exact(DenseCounter::new(universe)));
    }
    let eps = sketch_eps(&config.rule, expansion, config.eps, config.m);
    match config.mode {
        Mode::KnownN { .. } => {
            let mg = MisraGries::new(eps)?;
            if mg.capacity() >= universe {
                Ok(FrequencySketch::Exact(DenseCounter::new(universe)))
            } else {
                Ok(FrequencySketch::MisraGries(mg))
            }
        }
        Mode::UnknownN | Mode::SlidingWindow(_) => {
            let delta = config.delta / (2.0 * queries as f64);
            Ok(FrequencySketch::CountMin(CountMin::new(eps, delta, seed)?))
        }
    }
}

fn id_bits(universe: u64) -> u64 {
    (64 - universe.saturating_sub(1).leading_zeros() as u64).max(1)
}

impl StreamWinnerEstimator {
    pub fn new(config: StreamConfig) -> Result<Self, EstimatorError> {
        config.validate()?;
        let m = config.m;
        let mut budget = budget_for(&config.rule, config.eps, config.delta, m, config.sample_constant);
        let exact = config.capacity == Capacity::Max;
        let expansion = Expansion::for_rule(&config.rule, m, exact);
        let two = expansion == Expansion::Signed;
        let queries = expansion.universe(m) * if two { 2 } else { 1 };
        let main = build_sketch(&config, &expansion, config.seed.wrapping_add(1), queries)?;
        let negative = if two {
            Some(build_sketch(&config, &expansion, config.seed.wrapping_add(2), queries)?)
        } else {
            None
        };
        let storage = match config.storage {
            Storage::Sketch => Resolved::Sketch,
            Storage::StoreSamples => Resolved::Samples,
            Storage::Auto => {
                let pairwise = matches!(config.rule, Rule::Maximin | Rule::Copeland | Rule::Bucklin | Rule::Runoff);
                let universe = expansion.universe(m) as u64;
                let sketch_bits = match &main {
                    FrequencySketch::MisraGries(s) => {
                        (s.capacity() as u64).min(universe) * (id_bits(universe) + 64)
                    }
                    other => other.bits_estimate(universe),
                };
                let sample_bits = budget
                    .ell
                    .saturating_mul(m as u64)
                    .saturating_mul(id_bits(m as u64));
                if pairwise && sample_bits < sketch_bits {
                    Resolved::Samples
                } else {
                    Resolved::Sketch
                }
            }
        };
        let cap = |unbounded: bool| {
            if unbounded {
                Reservoir::unbounded()
            } else {
                Reservoir::new(budget.ell.min(usize::MAX as u64 - 1) as usize)
            }
        };
        let sampler = match config.mode {
            Mode::KnownN { n_lo, .. } => {
                let p = config.rate.unwrap_or_else(|| bernoulli_sample_rate(budget.ell, n_lo));
                budget.p = Some(p);
                Sampler::Known {
                    select: BernoulliSampler::new(p),
                    selected: 0,
                    store: (storage == Resolved::Samples).then(|| cap(exact)),
                }
            }
            Mode::UnknownN => Sampler::Unknown(cap(exact || config.rate == Some(1.0))),
            Mode::SlidingWindow(n) => {
                Sampler::Window(WindowSampler::new(budget.ell.min(1 << 24) as usize, n))
            }
        };
        let sketches = (storage == Resolved::Sketch).then_some(Sketches { main, negative });
        Ok(StreamWinnerEstimator {
            morris: (config.approximate_count && config.mode == Mode::UnknownN).then(MorrisCounter::new),
            rng: CountingRng::with_stream(config.seed, 0),
            config,
            budget,
            expansion,
            storage,
            observed: 0,
            sampler,
            sketches,
        })
    }

    pub fn config(&self) -> &StreamConfig {
        &self.config
    }

    pub fn budget(&self) -> SampleBudget {
        self.budget
    }

    pub fn expansion(&self) -> &Expansion {
        &self.expansion
    }

    /// Votes offered so far.
    pub fn observed(&self) -> u64 {
        self.observed
    }

    /// Whether whole sampled votes are kept instead of a sketch.
    pub fn stores_samples(&self) -> bool {
        self.storage == Resolved::Samples
    }

    /// Name of the frequency backend, or `samples` in store-samples mode.
    pub fn backend_name(&self) -> &'static str {
        match &self.sketches {
            Some(s) => s.main.kind_name(),
            None => "samples",
        }
    }

    pub fn sketch(&self) -> Option<&FrequencySketch> {
        self.sketches.as_ref().map(|s| &s.main)
    }

    pub fn observe(&mut self, vote: &Vote) -> Result<(), EstimatorError> {
        vote.validate(self.config.m)?;
        if !self.config.rule.accepts(vote.kind()) {
            return Err(RuleError::VariantMismatch {
                rule: self.config.rule.to_string(),
                kind: vote.kind(),
            }
            .into());
        }
        self.observed += 1;
        let Self {
            config,
            expansion,
            rng,
            morris,
            sampler,
            sketches,
            ..
        } = self;
        if let Some(mc) = morris {
            mc.increment(rng);
        }
        let m = config.m;
        let draw = sketches.is_some();
        let make = |r: &mut CountingRng| SampledVote {
            vote: vote.clone(),
            pick: if draw { expansion.draw_pick(vote, r) } else { None },
        };
        match sampler {
            Sampler::Known {
                select,
                selected,
                store,
            } => {
                if select.select(rng) {
                    *selected += 1;
                    match store {
                        Some(res) => {
                            res.offer_with(rng, make);
                        }
                        None => {
                            let s = make(rng);
                            if let Some(sk) = sketches {
                                sk.apply(expansion, m, &s, 1)?;
                            }
                        }
                    }
                }
            }
            Sampler::Unknown(res) => {
                if let Some(d) = res.offer_with(rng, make) {
                    if let Some(sk) = sketches {
                        sk.apply_delta(expansion, m, &d)?;
                    }
                }
            }
            Sampler::Window(ws) => {
                for d in ws.offer_with(rng, make) {
                    if let Some(sk) = sketches {
                        sk.apply_delta(expansion, m, &d)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Votes currently held by the sampler.
    pub fn sample_votes(&self) -> Vec<&Vote> {
        match &self.sampler {
            Sampler::Known { store, .. } => store
                .as_ref()
                .map(|r| r.slots().iter().map(|s| &s.vote).collect())
                .unwrap_or_default(),
            Sampler::Unknown(r) => r.slots().iter().map(|s| &s.vote).collect(),
            Sampler::Window(w) => w.samples().flatten().map(|(s, _)| &s.vote).collect(),
        }
    }

    /// Number of sampled votes the tally is built from.
    pub fn sample_size(&self) -> u64 {
        match &self.sampler {
            Sampler::Known {
                selected, store, ..
            } => store.as_ref().map_or(*selected, |r| r.len() as u64),
            Sampler::Unknown(r) => r.len() as u64,
            Sampler::Window(w) => w.samples().flatten().count() as u64,
        }
    }

    /// Estimated number of votes the winner refers to.
    pub fn n_hat(&self) -> f64 {
        match self.config.mode {
            Mode::KnownN { .. } => self.observed as f64,
            Mode::UnknownN => match &self.morris {
                Some(mc) => mc.estimate() as f64,
                None => self.observed as f64,
            },
            Mode::SlidingWindow(n) => self.observed.min(n) as f64,
        }
    }

    pub fn sample_scores(&self) -> Result<SampleScores, EstimatorError> {
        let m = self.config.m;
        let rule = &self.config.rule;
        let tally = match &self.sketches {
            Some(sk) => {
                let universe = self.expansion.universe(m) as u64;
                let mut t: Vec<f64> = (0..universe).map(|c| sk.main.estimate(c) as f64).collect();
                if let Some(neg) = &sk.negative {
                    for (c, v) in t.iter_mut().enumerate() {
                        *v -= neg.estimate(c as u64) as f64;
                    }
                }
                if matches!(self.expansion, Expansion::BottomK(_)) {
                    t.iter_mut().for_each(|v| *v = -*v);
                }
                t
            }
            None => {
                let mut t = vec![0.0; rules::tally_len(rule, m)];
                for v in self.sample_votes() {
                    rules::add_to_tally(rule, m, v, &mut t)?;
                }
                t
            }
        };
        let sample_size = self.sample_size();
        let n_hat = self.n_hat();
        let scale = if sample_size == 0 { 0.0 } else { n_hat / sample_size as f64 };
        Ok(SampleScores {
            tally,
            sample_size,
            n_hat,
            scale,
        })
    }

    pub fn memory_report(&self) -> MemoryReport {
        let (samples_stored, successors_stored) = match &self.sampler {
            Sampler::Known { store, .. } => (store.as_ref().map_or(0, |r| r.len()), 0),
            Sampler::Unknown(r) => (r.len(), 0),
            Sampler::Window(w) => {
                let fronts = w.samples().flatten().count();
                (fronts, w.stored() - fronts)
            }
        };
        let universe = self.expansion.universe(self.config.m) as u64;
        let (counters_used, sketch_bits_estimate) = match &self.sketches {
            Some(sk) => sk.iter().fold((0, 0), |(c, b), s| {
                (c + s.counters_used(), b + s.bits_estimate(universe))
            }),
            None => (0, 0),
        };
        MemoryReport {
            counters_used,
            samples_stored,
            successors_stored,
            sketch_bits_estimate,
            rng_bits_consumed: self.rng.bits_consumed(),
        }
    }

    pub fn finalize(&self) -> Result<(CandidateId, MemoryReport), EstimatorError> {
        if self.observed == 0 {
            return Err(EstimatorError::NoVotes);
        }
        let scores = self.sample_scores()?;
        let winner = rules::winner_from_tally(
            &self.config.rule,
            self.config.m,
            &scores.tally,
            scores.sample_size as f64,
        );
        Ok((winner, self.memory_report()))
    }

    /// Serializes the full estimator state.
    pub fn snapshot(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.header(snapshot::MAGIC, snapshot::VERSION, 0);
        snapshot::encode_config(&self.config, &mut w);
        w.u64(self.budget.ell);
        w.bool(self.storage == Resolved::Samples);
        w.u64(self.observed);
        self.rng.encode(&mut w);
        w.bool(self.morris.is_some());
        w.u8(self.morris.map_or(0, |mc| mc.exponent()));
        match &self.sampler {
            Sampler::Known {
                select,
                selected,
                store,
            } => {
                w.u8(0);
                select.encode(&mut w);
                w.u64(*selected);
                w.bool(store.is_some());
                if let Some(r) = store {
                    r.encode(&mut w, snapshot::encode_sampled);
                }
            }
            Sampler::Unknown(r) => {
                w.u8(1);
                r.encode(&mut w, snapshot::encode_sampled);
            }
            Sampler::Window(ws) => {
                w.u8(2);
                ws.encode(&mut w, snapshot::encode_sampled);
            }
        }
        w.bool(self.sketches.is_some());
        if let Some(sk) = &self.sketches {
            sk.main.encode(&mut w);
            w.bool(sk.negative.is_some());
            if let Some(n) = &sk.negative {
                n.encode(&mut w);
            }
        }
        w.into_inner()
    }

    pub fn restore(bytes: &[u8]) -> Result<Self, EstimatorError> {
        let mut r = Reader::new(bytes);
        let kind = r.header(snapshot::MAGIC, snapshot::VERSION)?;
        if kind != 0 {
            return Err(CodecError::Kind(kind).into());
        }
        let config = snapshot::decode_config(&mut r)?;
        let m = config.m;
        let fresh = StreamWinnerEstimator::new(config.clone())?;
        let ell = r.u64()?;
        if ell != fresh.budget.ell {
            return Err(CodecError::Invalid("sample budget does not match config".into()).into());
        }
        let storage = if r.bool()? { Resolved::Samples } else { Resolved::Sketch };
        let observed = r.u64()?;
        let rng = CountingRng::decode(&mut r)?;
        let has_morris = r.bool()?;
        let x = r.u8()?;
        let morris = has_morris.then(|| MorrisCounter::from_exponent(x));
        let dec = |r: &mut Reader<'_>| snapshot::decode_sampled(r, m);
        let sampler = match (r.u8()?, config.mode) {
            (0, Mode::KnownN { .. }) => {
                let select = BernoulliSampler::decode(&mut r)?;
                let selected = r.u64()?;
                let store = if r.bool()? {
                    Some(Reservoir::decode(&mut r, dec)?)
                } else {
                    None
                };
                Sampler::Known {
                    select,
                    selected,
                    store,
                }
            }
            (1, Mode::UnknownN) => Sampler::Unknown(Reservoir::decode(&mut r, dec)?),
            (2, Mode::SlidingWindow(_)) => Sampler::Window(WindowSampler::decode(&mut r, dec)?),
            (k, _) => return Err(CodecError::Kind(k).into()),
        };
        let sketches = if r.bool()? {
            let main = FrequencySketch::decode(&mut r)?;
            let negative = if r.bool()? {
                Some(FrequencySketch::decode(&mut r)?)
            } else {
                None
            };
            Some(Sketches { main, negative })
        } else {
            None
        };
        r.finish()?;
        if sketches.is_some() != (storage == Resolved::Sketch) {
            return Err(CodecError::Invalid("storage mode does not match state".into()).into());
        }
        let mut budget = fresh.budget;
        if let Sampler::Known { select, .. } = &sampler {
            budget.p = Some(select.rate());
        }
        Ok(StreamWinnerEstimator {
            config,
            budget,
            expansion: fresh.expansion,
            storage,
            rng,
            observed,
            morris,
            sampler,
            sketches,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::exact_winner;
    use crate::votes::{all_votes, ElectionProfile, VoteKind};

    fn known(rule: Rule, m: usize, n: u64) -> StreamConfig {
        StreamConfig::new(rule, m, 0.1, 0.1, Mode::KnownN { n_lo: n, n_hi: n })
    }

    #[test]
    fn unanimous_plurality_stream() {
        for mode in [Mode::KnownN { n_lo: 10_000, n_hi: 10_000 }, Mode::UnknownN, Mode::SlidingWindow(500)] {
            let cfg = StreamConfig::new(Rule::Plurality, 8, 0.1, 0.1, mode).seed(3);
            let mut est = StreamWinnerEstimator::new(cfg).unwrap();
            for _ in 0..10_000 {
                est.observe(&Vote::Plurality(CandidateId(5))).unwrap();
            }
            assert_eq!(est.finalize().unwrap().0, CandidateId(5), "{mode}");
        }
    }

    #[test]
    fn no_votes_and_wrong_kind() {
        let mut est = StreamWinnerEstimator::new(known(Rule::Borda, 3, 10)).unwrap();
        assert!(matches!(est.finalize(), Err(EstimatorError::NoVotes)));
        assert!(matches!(
            est.observe(&Vote::Plurality(CandidateId(0))),
            Err(EstimatorError::Rule(RuleError::VariantMismatch { .. }))
        ));
        assert!(est.observe(&Vote::ranking([0, 1, 5])).is_err());
        assert_eq!(est.observed(), 0);
    }

    fn lcg_profile(m: usize, n: usize, seed: u64) -> Vec<Vote> {
        let votes = all_votes(VoteKind::Ranking, m);
        let mut x = seed;
        (0..n)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                votes[(x >> 33) as usize % votes.len()].clone()
            })
            .collect()
    }

    #[test]
    fn exact_mode_matches_exact_winner() {
        let rules = [
            Rule::Plurality,
            Rule::Borda,
            Rule::KVeto(2),
            Rule::Maximin,
            Rule::Copeland,
            Rule::Bucklin,
            Rule::Runoff,
        ];
        for seed in 0..20 {
            let votes = lcg_profile(4, 15, seed);
            let profile = ElectionProfile::from_votes(4, votes.clone()).unwrap();
            for rule in &rules {
                for storage in [Storage::Sketch, Storage::StoreSamples] {
                    for mode in [Mode::KnownN { n_lo: 15, n_hi: 15 }, Mode::UnknownN] {
                        let cfg = StreamConfig::new(rule.clone(), 4, 0.2, 0.2, mode)
                            .exact()
                            .storage(storage)
                            .seed(seed);
                        let mut est = StreamWinnerEstimator::new(cfg).unwrap();
                        votes.iter().for_each(|v| est.observe(v).unwrap());
                        assert_eq!(
                            est.finalize().unwrap().0,
                            exact_winner(&profile, rule).unwrap(),
                            "{rule} {storage:?} {mode}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn snapshot_mid_stream_resumes_identically() {
        let votes = lcg_profile(4, 400, 9);
        let modes = [Mode::KnownN { n_lo: 300, n_hi: 500 }, Mode::UnknownN, Mode::SlidingWindow(50)];
        for rule in [Rule::Borda, Rule::Maximin, Rule::KVeto(1)] {
            for mode in modes {
                for storage in [Storage::Sketch, Storage::StoreSamples] {
                    let cfg = StreamConfig::new(rule.clone(), 4, 0.3, 0.2, mode)
                        .seed(11)
                        .storage(storage);
                    let mut a = StreamWinnerEstimator::new(cfg).unwrap();
                    votes[..150].iter().for_each(|v| a.observe(v).unwrap());
                    let bytes = a.snapshot();
                    let mut b = StreamWinnerEstimator::restore(&bytes).unwrap();
                    assert_eq!(b.snapshot(), bytes);
                    for v in &votes[150..] {
                        a.observe(v).unwrap();
                        b.observe(v).unwrap();
                    }
                    assert_eq!(a.finalize().unwrap(), b.finalize().unwrap());
                    assert_eq!(a.snapshot(), b.snapshot());
                }
            }
        }
    }

    #[test]
    fn snapshot_errors() {
        let est = StreamWinnerEstimator::new(known(Rule::Plurality, 3, 10)).unwrap();
        let bytes = est.snapshot();
        let back = StreamWinnerEstimator::restore(&bytes).unwrap();
        assert_eq!(back.snapshot(), bytes);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            StreamWinnerEstimator::restore(&bad),
            Err(EstimatorError::Codec(CodecError::BadMagic))
        ));
        assert!(StreamWinnerEstimator::restore(&[]).is_err());
        assert!(StreamWinnerEstimator::restore(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(matches!(
            StreamWinnerEstimator::restore(&long),
            Err(EstimatorError::Codec(CodecError::Trailing))
        ));
    }

    #[test]
    fn pair_margins_from_exact_counts() {
        let votes = lcg_profile(4, 60, 2);
        let cfg = StreamConfig::new(Rule::Maximin, 4, 0.2, 0.2, Mode::UnknownN)
            .exact()
            .storage(Storage::Sketch);
        let mut est = StreamWinnerEstimator::new(cfg).unwrap();
        votes.iter().for_each(|v| est.observe(v).unwrap());
        let scores = est.sample_scores().unwrap();
        let d = scores.pairwise_margins(4).unwrap();
        let graph = crate::rules::majority_graph(&ElectionProfile::from_votes(4, votes).unwrap()).unwrap();
        for x in 0..4u32 {
            for y in 0..4u32 {
                let (i, j) = (x as usize, y as usize);
                assert_eq!(d[i * 4 + j], -d[j * 4 + i]);
                if x != y {
                    assert_eq!(d[i * 4 + j], graph.margin(CandidateId(x), CandidateId(y)) as f64);
                }
            }
        }
        assert_eq!(scores.scale, 1.0);
    }

    #[test]
    fn k_approval_counters_within_budget() {
        let (k, eps) = (3, 0.1);
        let cfg = StreamConfig::new(Rule::KApproval(k), 200, eps, 0.1, Mode::KnownN { n_lo: 5000, n_hi: 5000 });
        let mut est = StreamWinnerEstimator::new(cfg).unwrap();
        assert_eq!(est.backend_name(), "misra-gries");
        let bound = (3.0 * k as f64 / eps).ceil() as usize;
        let mut x = 7u64;
        for _ in 0..5000 {
            let mut order: Vec<u32> = (0..200).collect();
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1);
            order.rotate_left((x >> 40) as usize % 200);
            est.observe(&Vote::Ranking(order.into_iter().map(CandidateId).collect())).unwrap();
            assert!(est.memory_report().counters_used <= bound);
        }
    }

    #[test]
    fn store_samples_never_exceeds_budget() {
        let cfg = StreamConfig::new(Rule::Copeland, 4, 0.5, 0.5, Mode::UnknownN).storage(Storage::StoreSamples);
        let mut est = StreamWinnerEstimator::new(cfg).unwrap();
        let ell = est.budget().ell as usize;
        for v in lcg_profile(4, 3 * ell, 5) {
            est.observe(&v).unwrap();
            assert!(est.memory_report().samples_stored <= ell);
        }
        assert_eq!(est.memory_report().samples_stored, ell);
        assert_eq!(est.backend_name(), "samples");
    }

    #[test]
    fn report_line() {
        let r = MemoryReport {
            counters_used: 3,
            samples_stored: 4,
            successors_stored: 0,
            sketch_bits_estimate: 5,
            rng_bits_consumed: 6,
        };
        assert_eq!(
            r.to_string(),
            "counters_used=3 samples_stored=4 successors_stored=0 sketch_bits_estimate=5 rng_bits_consumed=6"
        );
    }

    #[test]
    fn two_stage_centred_on_sample_scores() {
        let votes = lcg_profile(3, 300, 4);
        let alpha = [2.0, 1.0, 0.0];
        let mut rng = CountingRng::seed_from_u64(0);
        let (s_hat, s_bar) = two_stage_estimates(&votes, &alpha, 300.0, &mut rng);
        assert!((s_hat.iter().sum::<f64>() - 300.0).abs() < 1e-9);
        assert!((s_bar.iter().sum::<f64>() - 300.0).abs() < 1e-9);
        for x in 0..3 {
            assert!((s_hat[x] - s_bar[x]).abs() < 40.0);
        }
    }
}

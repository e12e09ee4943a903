//! Exact winner determination for every supported rule, and a brute-force
//! ε-winner check for toy-sized elections.
//!
//! Every rule is evaluated from a *tally*: a flat vector of per-vote
//! contributions summed over the profile. Score rules tally one score per
//! candidate; Maximin and Copeland tally the pairwise counts `N(x, y)` at
//! `x * m + y`; Bucklin tallies, at `x * m + (k - 1)`, how many votes rank
//! `x` within the first `k` positions; Runoff uses the pairwise layout with
//! each candidate's plurality score on the diagonal. The streaming
//! estimators rebuild the same tallies from sketch estimates and reuse the
//! winner functions here.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::votes::{all_votes, CandidateId, ElectionProfile, Vote, VoteKind};

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("rule {rule} cannot be evaluated on {kind} votes")]
    VariantMismatch { rule: String, kind: VoteKind },
    #[error("empty profile")]
    EmptyProfile,
    #[error("invalid rule: {0}")]
    Invalid(String),
    #[error("rule {0} has no score table")]
    NotScoreBased(String),
    #[error("instance too large for exhaustive search (n={n}, m={m}); raise the limits explicitly")]
    TooLarge { n: usize, m: usize },
}

/// Positional score vector `α_1 ≥ … ≥ α_m ≥ 0` with `α_1 > α_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    alpha: Vec<f64>,
}

impl ScoreVector {
    pub fn new(alpha: Vec<f64>) -> Result<Self, RuleError> {
        if alpha.len() < 2 {
            return Err(RuleError::Invalid("score vector needs at least two entries".into()));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(RuleError::Invalid("scores must be finite and non-negative".into()));
        }
        if alpha.windows(2).any(|w| w[0] < w[1]) {
            return Err(RuleError::Invalid("scores must be non-increasing".into()));
        }
        if alpha[0] <= alpha[alpha.len() - 1] {
            return Err(RuleError::Invalid("first score must exceed the last".into()));
        }
        Ok(ScoreVector { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// A voting rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Scoring(ScoreVector),
    KApproval(usize),
    KVeto(usize),
    Plurality,
    Veto,
    Borda,
    GenPlurality,
    Approval,
    Maximin,
    Copeland,
    Bucklin,
    Runoff,
}

/// How a rule's tally is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TallyShape {
    /// One score per candidate.
    Scores,
    /// `N(x, y)` at `x * m + y`.
    Pairs,
    /// Cumulative depth counts at `x * m + (k - 1)`.
    Depths,
    /// Pairs, with plurality scores on the diagonal.
    Runoff,
}

impl Rule {
    /// Positional weights, for rules that are positional scoring rules.
    pub fn alpha(&self, m: usize) -> Option<Vec<f64>> {
        match self {
            Rule::Scoring(v) => Some(v.alpha.clone()),
            Rule::Plurality => Some((0..m).map(|i| (i == 0) as u8 as f64).collect()),
            Rule::Veto => Some((0..m).map(|i| (i + 1 < m) as u8 as f64).collect()),
            Rule::Borda => Some((0..m).map(|i| (m - 1 - i) as f64).collect()),
            Rule::KApproval(k) => Some((0..m).map(|i| (i < *k) as u8 as f64).collect()),
            _ => None,
        }
    }

    pub fn shape(&self) -> TallyShape {
        match self {
            Rule::Maximin | Rule::Copeland => TallyShape::Pairs,
            Rule::Bucklin => TallyShape::Depths,
            Rule::Runoff => TallyShape::Runoff,
            _ => TallyShape::Scores,
        }
    }

    pub fn is_score_based(&self) -> bool {
        self.shape() == TallyShape::Scores
    }

    /// Whether votes of `kind` can be evaluated under this rule.
    pub fn accepts(&self, kind: VoteKind) -> bool {
        match kind {
            VoteKind::Ranking => !matches!(self, Rule::GenPlurality | Rule::Approval),
            VoteKind::Plurality => matches!(
                self,
                Rule::Plurality | Rule::KApproval(1) | Rule::GenPlurality | Rule::Approval
            ),
            VoteKind::Approval => matches!(self, Rule::Approval),
            VoteKind::GenPlurality => matches!(self, Rule::GenPlurality),
        }
    }

    /// Parameter checks for `m` candidates, as required by the streaming estimators.
    pub fn validate(&self, m: usize) -> Result<(), RuleError> {
        if m == 0 {
            return Err(RuleError::Invalid("m must be at least 1".into()));
        }
        match self {
            Rule::KApproval(k) | Rule::KVeto(k) if *k < 1 || *k + 1 > m => Err(RuleError::Invalid(
                format!("{self} needs 1 <= k <= m-1 (m={m})"),
            )),
            Rule::Scoring(v) if v.len() != m => Err(RuleError::Invalid(format!(
                "score vector has {} entries for m={m}",
                v.len()
            ))),
            Rule::Veto if m < 2 => Err(RuleError::Invalid("veto needs m >= 2".into())),
            _ => Ok(()),
        }
    }

    fn check_kind(&self, kind: VoteKind) -> Result<(), RuleError> {
        if self.accepts(kind) {
            Ok(())
        } else {
            Err(RuleError::VariantMismatch {
                rule: self.to_string(),
                kind,
            })
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Scoring(v) => {
                let parts: Vec<String> = v.alpha.iter().map(|a| a.to_string()).collect();
                write!(f, "scoring:{}", parts.join(","))
            }
            Rule::KApproval(k) => write!(f, "kapproval:{k}"),
            Rule::KVeto(k) => write!(f, "kveto:{k}"),
            Rule::Plurality => f.write_str("plurality"),
            Rule::Veto => f.write_str("veto"),
            Rule::Borda => f.write_str("borda"),
            Rule::GenPlurality => f.write_str("genplurality"),
            Rule::Approval => f.write_str("approval"),
            Rule::Maximin => f.write_str("maximin"),
            Rule::Copeland => f.write_str("copeland"),
            Rule::Bucklin => f.write_str("bucklin"),
            Rule::Runoff => f.write_str("runoff"),
        }
    }
}

impl FromStr for Rule {
    type Err = RuleError;

    /// Accepts the names printed by `Display`, e.g. `borda`, `kapproval:2`, `scoring:3,1,0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let k = || {
            arg.and_then(|a| a.parse::<usize>().ok())
                .ok_or_else(|| RuleError::Invalid(format!("`{s}` needs an integer parameter")))
        };
        let rule = match name.to_ascii_lowercase().as_str() {
            "scoring" => {
                let alpha = arg
                    .ok_or_else(|| RuleError::Invalid("scoring needs a score vector".into()))?
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| RuleError::Invalid(format!("bad score vector in `{s}`")))?;
                Rule::Scoring(ScoreVector::new(alpha)?)
            }
            "kapproval" | "k-approval" => Rule::KApproval(k()?),
            "kveto" | "k-veto" => Rule::KVeto(k()?),
            "plurality" => Rule::Plurality,
            "veto" => Rule::Veto,
            "borda" => Rule::Borda,
            "genplurality" => Rule::GenPlurality,
            "approval" => Rule::Approval,
            "maximin" => Rule::Maximin,
            "copeland" => Rule::Copeland,
            "bucklin" => Rule::Bucklin,
            "runoff" => Rule::Runoff,
            _ => return Err(RuleError::Invalid(format!("unknown rule `{s}`"))),
        };
        if arg.is_some() && !matches!(rule, Rule::Scoring(_) | Rule::KApproval(_) | Rule::KVeto(_)) {
            return Err(RuleError::Invalid(format!("rule `{name}` takes no parameter")));
        }
        Ok(rule)
    }
}

/// Per-candidate scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    scores: Vec<f64>,
}

impl ScoreTable {
    pub fn new(scores: Vec<f64>) -> Self {
        ScoreTable { scores }
    }

    pub fn get(&self, c: CandidateId) -> f64 {
        self.scores[c.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    /// All candidates sharing the top score, ascending.
    pub fn winners(&self) -> Vec<CandidateId> {
        argmax_set(&self.scores).into_iter().map(CandidateId::from).collect()
    }

    /// Lowest-id candidate with the top score.
    pub fn argmax(&self) -> CandidateId {
        CandidateId::from(argmax_set(&self.scores)[0])
    }
}

/// Pairwise counts `N(x, y)` over a ranking profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajorityGraph {
    m: usize,
    pair_count: Vec<u64>,
}

impl MajorityGraph {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn count(&self, x: CandidateId, y: CandidateId) -> u64 {
        self.pair_count[x.index() * self.m + y.index()]
    }

    pub fn margin(&self, x: CandidateId, y: CandidateId) -> i64 {
        self.count(x, y) as i64 - self.count(y, x) as i64
    }

    /// Candidate beating every other one pairwise, if any.
    pub fn condorcet_winner(&self) -> Option<CandidateId> {
        (0..self.m).map(CandidateId::from).find(|&x| {
            (0..self.m)
                .map(CandidateId::from)
                .all(|y| y == x || self.margin(x, y) > 0)
        })
    }
}

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn argmax_set(scores: &[f64]) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..scores.len()).filter(|&i| approx_eq(scores[i], best)).collect()
}

fn argmin_set(scores: &[f64]) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    (0..scores.len()).filter(|&i| approx_eq(scores[i], best)).collect()
}

/// Length of the tally vector for `rule` over `m` candidates.
pub fn tally_len(rule: &Rule, m: usize) -> usize {
    match rule.shape() {
        TallyShape::Scores => m,
        _ => m * m,
    }
}

/// Adds one vote's contribution to `tally`. The vote must already be valid for `m`.
pub fn add_to_tally(rule: &Rule, m: usize, vote: &Vote, tally: &mut [f64]) -> Result<(), RuleError> {
    rule.check_kind(vote.kind())?;
    match (rule.shape(), vote) {
        (TallyShape::Scores, Vote::Ranking(order)) => match rule {
            Rule::KVeto(k) => {
                for c in order.iter().skip(m.saturating_sub(*k)) {
                    tally[c.index()] -= 1.0;
                }
            }
            _ => {
                let alpha = rule.alpha(m).expect("positional rule");
                for (c, a) in order.iter().zip(alpha) {
                    tally[c.index()] += a;
                }
            }
        },
        (TallyShape::Scores, Vote::Plurality(c)) => tally[c.index()] += 1.0,
        (TallyShape::Scores, Vote::GenPlurality(c, s)) => tally[c.index()] += s.as_i64() as f64,
        (TallyShape::Scores, Vote::Approval(set)) => {
            for c in set {
                tally[c.index()] += 1.0;
            }
        }
        (TallyShape::Pairs | TallyShape::Runoff, Vote::Ranking(order)) => {
            for (i, x) in order.iter().enumerate() {
                for y in &order[i + 1..] {
                    tally[x.index() * m + y.index()] += 1.0;
                }
            }
            if rule.shape() == TallyShape::Runoff {
                if let Some(top) = order.first() {
                    tally[top.index() * (m + 1)] += 1.0;
                }
            }
        }
        (TallyShape::Depths, Vote::Ranking(order)) => {
            for (i, x) in order.iter().enumerate() {
                for k in i..m {
                    tally[x.index() * m + k] += 1.0;
                }
            }
        }
        _ => unreachable!("kind checked above"),
    }
    Ok(())
}

/// Sums the tally of a whole profile.
pub fn profile_tally(profile: &ElectionProfile, rule: &Rule) -> Result<Vec<f64>, RuleError> {
    rule.check_kind(profile.kind())?;
    let m = profile.m();
    let mut tally = vec![0.0; tally_len(rule, m)];
    for v in profile.votes() {
        add_to_tally(rule, m, v, &mut tally)?;
    }
    Ok(tally)
}

/// Maximin scores `min_{y≠x} D(x, y)` from a pairwise tally.
pub fn maximin_scores(m: usize, pairs: &[f64]) -> Vec<f64> {
    (0..m)
        .map(|x| {
            (0..m)
                .filter(|&y| y != x)
                .map(|y| pairs[x * m + y] - pairs[y * m + x])
                .fold(f64::INFINITY, f64::min)
        })
        .map(|s| if s.is_finite() { s } else { 0.0 })
        .collect()
}

/// Copeland scores `|{y ≠ x : D(x, y) > 0}|` from a pairwise tally.
pub fn copeland_scores(m: usize, pairs: &[f64]) -> Vec<f64> {
    (0..m)
        .map(|x| {
            (0..m)
                .filter(|&y| y != x && pairs[x * m + y] - pairs[y * m + x] > 0.0)
                .count() as f64
        })
        .collect()
}

/// Bucklin depth of each candidate: the least `k` whose cumulative count
/// exceeds `total / 2`, or `m + 1` if none does, paired with that count.
pub fn bucklin_depths(m: usize, depths: &[f64], total: f64) -> Vec<(usize, f64)> {
    (0..m)
        .map(|x| {
            (0..m)
                .find(|&k| depths[x * m + k] > total / 2.0)
                .map_or((m + 1, 0.0), |k| (k + 1, depths[x * m + k]))
        })
        .collect()
}

/// The two runoff finalists, by plurality score with ties to the lower id.
pub fn runoff_finalists(m: usize, tally: &[f64]) -> (usize, Option<usize>) {
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (tally[a * (m + 1)], tally[b * (m + 1)]);
        if approx_eq(pa, pb) {
            a.cmp(&b)
        } else {
            pb.total_cmp(&pa)
        }
    });
    (order[0], order.get(1).copied())
}

/// Winner set (ascending ids) from a tally; `total` is the number of votes
/// the tally represents.
pub fn winners_from_tally(rule: &Rule, m: usize, tally: &[f64], total: f64) -> Vec<usize> {
    match rule {
        Rule::Maximin => argmax_set(&maximin_scores(m, tally)),
        Rule::Copeland => argmax_set(&copeland_scores(m, tally)),
        Rule::Bucklin => {
            let d: Vec<f64> = bucklin_depths(m, tally, total)
                .into_iter()
                .map(|(k, _)| k as f64)
                .collect();
            argmin_set(&d)
        }
        Rule::Runoff => {
            let (a, b) = runoff_finalists(m, tally);
            match b {
                None => vec![a],
                Some(b) => {
                    let d = tally[a * m + b] - tally[b * m + a];
                    if approx_eq(d, 0.0) {
                        let mut both = vec![a, b];
                        both.sort_unstable();
                        both
                    } else if d > 0.0 {
                        vec![a]
                    } else {
                        vec![b]
                    }
                }
            }
        }
        _ => argmax_set(tally),
    }
}

/// The single winner picked from a tally: lowest id in the winner set,
/// except Bucklin, which prefers the larger count at the winning depth.
pub fn winner_from_tally(rule: &Rule, m: usize, tally: &[f64], total: f64) -> CandidateId {
    if *rule == Rule::Bucklin {
        let depths = bucklin_depths(m, tally, total);
        let best = (0..m)
            .min_by(|&a, &b| {
                let (da, ca) = depths[a];
                let (db, cb) = depths[b];
                da.cmp(&db).then_with(|| {
                    if approx_eq(ca, cb) {
                        a.cmp(&b)
                    } else {
                        cb.total_cmp(&ca)
                    }
                })
            })
            .expect("m >= 1");
        return CandidateId::from(best);
    }
    CandidateId::from(winners_from_tally(rule, m, tally, total)[0])
}

/// Exact per-candidate scores for score-based rules.
pub fn exact_scores(profile: &ElectionProfile, rule: &Rule) -> Result<ScoreTable, RuleError> {
    if !rule.is_score_based() {
        return Err(RuleError::NotScoreBased(rule.to_string()));
    }
    if let Rule::KApproval(k) | Rule::KVeto(k) = rule {
        if *k > profile.m() {
            return Err(RuleError::Invalid(format!("k={k} exceeds m={}", profile.m())));
        }
    }
    Ok(ScoreTable::new(profile_tally(profile, rule)?))
}

pub fn majority_graph(profile: &ElectionProfile) -> Result<MajorityGraph, RuleError> {
    let tally = profile_tally(profile, &Rule::Maximin)?;
    Ok(MajorityGraph {
        m: profile.m(),
        pair_count: tally.into_iter().map(|v| v as u64).collect(),
    })
}

/// The rule's full winner set, ascending.
pub fn exact_winner_set(profile: &ElectionProfile, rule: &Rule) -> Result<Vec<CandidateId>, RuleError> {
    if profile.n() == 0 {
        return Err(RuleError::EmptyProfile);
    }
    let tally = profile_tally(profile, rule)?;
    Ok(winners_from_tally(rule, profile.m(), &tally, profile.n() as f64)
        .into_iter()
        .map(CandidateId::from)
        .collect())
}

pub fn exact_winner(profile: &ElectionProfile, rule: &Rule) -> Result<CandidateId, RuleError> {
    if profile.n() == 0 {
        return Err(RuleError::EmptyProfile);
    }
    let tally = profile_tally(profile, rule)?;
    Ok(winner_from_tally(rule, profile.m(), &tally, profile.n() as f64))
}

/// Size limits for the exhaustive ε-winner search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_n: usize,
    pub max_m: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_n: 8, max_m: 4 }
    }
}

impl SearchLimits {
    pub fn unbounded() -> Self {
        SearchLimits {
            max_n: usize::MAX,
            max_m: usize::MAX,
        }
    }
}

/// Whether `w` can be put into the winner set by replacing at most `⌊εn⌋`
/// votes with arbitrary votes of the profile's kind.
pub fn is_eps_winner(
    profile: &ElectionProfile,
    rule: &Rule,
    w: CandidateId,
    eps: f64,
) -> Result<bool, RuleError> {
    is_eps_winner_with(profile, rule, w, eps, SearchLimits::default())
}

pub fn is_eps_winner_with(
    profile: &ElectionProfile,
    rule: &Rule,
    w: CandidateId,
    eps: f64,
    limits: SearchLimits,
) -> Result<bool, RuleError> {
    let (n, m) = (profile.n(), profile.m());
    if n == 0 {
        return Err(RuleError::EmptyProfile);
    }
    if n > limits.max_n || m > limits.max_m {
        return Err(RuleError::TooLarge { n, m });
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(RuleError::Invalid(format!("eps must be >= 0, got {eps}")));
    }
    if w.index() >= m {
        return Err(RuleError::Invalid(format!("candidate {w} out of range")));
    }
    rule.check_kind(profile.kind())?;
    let budget = ((eps * n as f64 + 1e-9).floor() as usize).min(n);

    // Votes with identical tally contributions are interchangeable.
    let len = tally_len(rule, m);
    let mut classes: Vec<Vec<f64>> = Vec::new();
    let mut class_of: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut class_id = |tally: Vec<f64>, classes: &mut Vec<Vec<f64>>| {
        let key: Vec<u64> = tally.iter().map(|v| v.to_bits()).collect();
        *class_of.entry(key).or_insert_with(|| {
            classes.push(tally);
            classes.len() - 1
        })
    };
    for v in all_votes(profile.kind(), m) {
        let mut t = vec![0.0; len];
        add_to_tally(rule, m, &v, &mut t)?;
        class_id(t, &mut classes);
    }
    let mut present = vec![0usize; classes.len()];
    let mut base = vec![0.0; len];
    for v in profile.votes() {
        let mut t = vec![0.0; len];
        add_to_tally(rule, m, v, &mut t)?;
        for (b, x) in base.iter_mut().zip(&t) {
            *b += x;
        }
        present[class_id(t, &mut classes)] += 1;
    }

    let search = Search {
        rule,
        m,
        total: n as f64,
        w: w.index(),
        classes: &classes,
    };
    let mut seen_kept = HashSet::new();
    Ok(search.remove(&present, 0, budget, &mut base, budget, &mut seen_kept))
}

struct Search<'a> {
    rule: &'a Rule,
    m: usize,
    total: f64,
    w: usize,
    classes: &'a [Vec<f64>],
}

impl Search<'_> {
    fn apply(&self, tally: &mut [f64], class: usize, sign: f64) {
        for (t, x) in tally.iter_mut().zip(&self.classes[class]) {
            *t += sign * x;
        }
    }

    /// Chooses `left` more votes to drop, from classes at index `from` onwards.
    fn remove(
        &self,
        present: &[usize],
        from: usize,
        left: usize,
        tally: &mut Vec<f64>,
        budget: usize,
        seen: &mut HashSet<Vec<u64>>,
    ) -> bool {
        if left == 0 {
            let key: Vec<u64> = tally.iter().map(|v| v.to_bits()).collect();
            if !seen.insert(key) {
                return false;
            }
            return self.add(0, budget, tally);
        }
        for c in from..present.len() {
            for take in 1..=present[c].min(left) {
                for _ in 0..take {
                    self.apply(tally, c, -1.0);
                }
                let found = self.remove(present, c + 1, left - take, tally, budget, seen);
                for _ in 0..take {
                    self.apply(tally, c, 1.0);
                }
                if found {
                    return true;
                }
            }
        }
        false
    }

    /// Adds `left` votes as a multiset over classes at index `from` onwards.
    fn add(&self, from: usize, left: usize, tally: &mut Vec<f64>) -> bool {
        if left == 0 {
            return winners_from_tally(self.rule, self.m, tally, self.total).contains(&self.w);
        }
        for c in from..self.classes.len() {
            self.apply(tally, c, 1.0);
            let found = self.add(c, left - 1, tally);
            self.apply(tally, c, -1.0);
            if found {
                return true;
            }
        }
        false
    }
}

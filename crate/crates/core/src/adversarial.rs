//! Vote streams from the communication lower-bound constructions.
//!
//! Each stream is split into a prefix (the first player's votes) and a
//! suffix (the second player's), so an estimator can be snapshotted at the
//! handoff. Every generator reports the winner the construction forces and
//! an `eps_guarantee` recomputed from the realized vote counts: for every
//! `ε ≤ eps_guarantee` the expected winner is the only ε-winner.
//!
//! Grid candidates `(a, j)` with `a, j ≥ 1` on an `rows × cols` grid are
//! numbered column by column: `id = (j - 1) * rows + (a - 1)`.

use std::collections::BTreeSet;
use std::io;

use thiserror::Error;

use crate::rules::{majority_graph, profile_tally, Rule};
use crate::votes::{write_votes, CandidateId, ElectionProfile, Sign, StreamHeader, Vote, VoteKind};

#[derive(Debug, Error, PartialEq)]
pub enum AdversarialError {
    #[error("invalid generator parameters: {0}")]
    Param(String),
}

fn bad<T>(msg: impl Into<String>) -> Result<T, AdversarialError> {
    Err(AdversarialError::Param(msg.into()))
}

/// A generated election split at the handoff point.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialStream {
    pub header: StreamHeader,
    pub prefix: Vec<Vote>,
    pub suffix: Vec<Vote>,
    pub expected_winner: CandidateId,
    pub eps_guarantee: f64,
}

impl AdversarialStream {
    fn new(m: usize, kind: VoteKind, prefix: Vec<Vote>, suffix: Vec<Vote>) -> Self {
        let n = (prefix.len() + suffix.len()) as u64;
        AdversarialStream {
            header: StreamHeader::new(m, kind).with_n_hint(n.max(1), n.max(1)),
            prefix,
            suffix,
            expected_winner: CandidateId(0),
            eps_guarantee: 0.0,
        }
    }

    pub fn m(&self) -> usize {
        self.header.m
    }

    pub fn n(&self) -> usize {
        self.prefix.len() + self.suffix.len()
    }

    /// Index of the first suffix vote.
    pub fn handoff(&self) -> usize {
        self.prefix.len()
    }

    pub fn votes(&self) -> impl Iterator<Item = &Vote> + '_ {
        self.prefix.iter().chain(&self.suffix)
    }

    pub fn profile(&self) -> ElectionProfile {
        ElectionProfile::new(self.m(), self.header.kind, self.votes().cloned().collect())
            .expect("generated votes are valid")
    }

    /// The same election with the two halves in the opposite order.
    pub fn swapped(&self) -> Self {
        AdversarialStream {
            prefix: self.suffix.clone(),
            suffix: self.prefix.clone(),
            ..self.clone()
        }
    }

    /// Writes the vote file with a `# handoff` line between the halves.
    pub fn write<W: io::Write>(&self, out: W) -> io::Result<()> {
        let votes: Vec<Vote> = self.votes().cloned().collect();
        write_votes(out, &self.header, &votes, Some(self.handoff()))
    }
}

/// `claimed` if fewer than `changes` replacements fit in `⌊claimed·n⌋`,
/// else the largest ε that keeps `⌊εn⌋ < changes`.
fn guarantee(claimed: f64, n: usize, changes: i64) -> f64 {
    if changes <= 0 || n == 0 {
        return 0.0;
    }
    if ((claimed * n as f64) + 1e-9).floor() < changes as f64 {
        claimed
    } else {
        (changes - 1) as f64 / n as f64
    }
}

fn ceil_half(x: f64) -> i64 {
    (x / 2.0 - 1e-9).ceil() as i64
}

/// Winner of a score tally and its lead over the best other candidate.
fn lead(scores: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    let second = scores
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    (best, scores[best] - second)
}

/// Sets the expected winner and guarantee of a stream scored by a rule in
/// which one replaced vote moves the winner's lead by at most `swing`.
fn finish_scored(mut s: AdversarialStream, rule: &Rule, claimed: f64, swing: f64) -> Result<AdversarialStream, AdversarialError> {
    let tally = profile_tally(&s.profile(), rule).expect("generated votes match the rule");
    let (w, gap) = lead(&tally);
    if gap <= 0.0 {
        return bad("construction does not have a unique winner");
    }
    s.expected_winner = CandidateId::from(w);
    s.eps_guarantee = guarantee(claimed, s.n(), (gap / swing - 1e-9).ceil() as i64);
    Ok(s)
}

fn grid_side(eps: f64) -> Result<usize, AdversarialError> {
    if !(eps > 0.0 && eps < 1.0) {
        return bad("eps must be in (0, 1)");
    }
    let side = (1.0 / eps.sqrt()).round() as usize;
    if side < 2 || ((side * side) as f64 * eps - 1.0).abs() > 1e-9 {
        return bad(format!("1/eps must be a perfect square of at least 4, got eps={eps}"));
    }
    Ok(side)
}

fn grid_id(rows: usize, a: usize, j: usize) -> CandidateId {
    CandidateId::from((j - 1) * rows + (a - 1))
}

fn check_index(x: &[usize], len: usize, range: usize, i: usize, i_max: usize) -> Result<(), AdversarialError> {
    if x.len() != len {
        return bad(format!("x must have {len} entries, got {}", x.len()));
    }
    if let Some(v) = x.iter().find(|&&v| v < 1 || v > range) {
        return bad(format!("x entries must lie in 1..={range}, got {v}"));
    }
    if i < 1 || i > i_max {
        return bad(format!("i must lie in 1..={i_max}, got {i}"));
    }
    Ok(())
}

fn plurality_votes(c: CandidateId, count: usize) -> impl Iterator<Item = Vote> {
    std::iter::repeat_n(Vote::Plurality(c), count)
}

/// Plurality election on a `1/√ε × 1/√ε` grid. The first player votes for
/// each `(x_j, j)`, the second for each `(a, i)`; only `(x_i, i)` gets both.
pub fn gen_augidx_plurality(eps: f64, n: u64, x: &[usize], i: usize) -> Result<AdversarialStream, AdversarialError> {
    let side = grid_side(eps)?;
    check_index(x, side, side, i, side)?;
    let per = (eps.sqrt() * n as f64 / 2.0 + 1e-9).floor() as usize;
    if per == 0 {
        return bad("n too small: no votes per candidate");
    }
    let prefix = (1..=side)
        .flat_map(|j| plurality_votes(grid_id(side, x[j - 1], j), per))
        .collect();
    let suffix = (1..=side)
        .flat_map(|a| plurality_votes(grid_id(side, a, i), per))
        .collect();
    let s = AdversarialStream::new(side * side, VoteKind::Plurality, prefix, suffix);
    finish_scored(s, &Rule::Plurality, eps.sqrt() / 8.0, 2.0)
}

/// Plurality election where candidate `j` gets `x_j + y_j` votes.
pub fn gen_maxsum_plurality(x: &[u64], y: &[u64]) -> Result<AdversarialStream, AdversarialError> {
    if x.len() != y.len() || x.is_empty() {
        return bad("x and y must be non-empty and of equal length");
    }
    let top = x.iter().chain(y).copied().max().unwrap_or(0);
    if top == 0 {
        return bad("at least one entry must be positive");
    }
    let prefix = x
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| plurality_votes(CandidateId::from(j), c as usize))
        .collect();
    let suffix = y
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| plurality_votes(CandidateId::from(j), c as usize))
        .collect();
    let s = AdversarialStream::new(x.len(), VoteKind::Plurality, prefix, suffix);
    let e = 1.0 / top as f64;
    finish_scored(s, &Rule::Plurality, e * e / 5.0, 2.0)
}

fn cyclic(items: &[CandidateId], start: usize) -> impl Iterator<Item = CandidateId> + '_ {
    let k = items.len();
    (0..k).map(move |t| items[(start + t) % k])
}

/// Forward and reversed-block votes for one side of the ring construction.
fn ring_half(top: &[CandidateId], rest: &[CandidateId], per: usize) -> Vec<Vote> {
    let s = top.len();
    let mut out = Vec::with_capacity(2 * s * per);
    for p in 0..s {
        let forward: Vec<CandidateId> = cyclic(top, p).chain(rest.iter().copied()).collect();
        let mut reversed: Vec<CandidateId> = cyclic(top, p).collect();
        reversed.reverse();
        reversed.extend(rest.iter().copied());
        out.extend(std::iter::repeat_n(Vote::Ranking(forward), per));
        out.extend(std::iter::repeat_n(Vote::Ranking(reversed), per));
    }
    out
}

fn split_grid(side: usize, chosen: &[CandidateId]) -> Vec<CandidateId> {
    let set: BTreeSet<_> = chosen.iter().copied().collect();
    (0..side * side)
        .map(CandidateId::from)
        .filter(|c| !set.contains(c))
        .collect()
}

/// Ranking election in which `(x_i, i)` beats every other candidate
/// pairwise, for the Condorcet-consistent rules and runoff.
///
/// For each `ℓ` the first player casts votes `X` rotated to start at
/// `(x_ℓ, ℓ)`, followed by the rest, and as many votes with that `X` block
/// reversed; the second player does the same with the column `A = {(a, i)}`.
/// Rotating the block spreads the first places evenly across `X`.
pub fn gen_condorcet_ring(eps: f64, n: u64, x: &[usize], i: usize) -> Result<AdversarialStream, AdversarialError> {
    let side = grid_side(eps)?;
    check_index(x, side, side, i, side)?;
    let per = (eps.sqrt() * n as f64 / 4.0 + 1e-9).floor() as usize;
    if per == 0 {
        return bad("n too small: no votes per block");
    }
    let xs: Vec<CandidateId> = (1..=side).map(|j| grid_id(side, x[j - 1], j)).collect();
    let a_set: Vec<CandidateId> = (1..=side).map(|a| grid_id(side, a, i)).collect();
    let prefix = ring_half(&xs, &split_grid(side, &xs), per);
    let suffix = ring_half(&a_set, &split_grid(side, &a_set), per);
    let mut s = AdversarialStream::new(side * side, VoteKind::Ranking, prefix, suffix);
    let w = grid_id(side, x[i - 1], i);
    let profile = s.profile();
    let graph = majority_graph(&profile).expect("rankings");
    let m = side * side;
    let d_min = (0..m)
        .map(CandidateId::from)
        .filter(|&y| y != w)
        .map(|y| graph.margin(w, y))
        .min()
        .unwrap_or(0);
    let plurality = profile_tally(&profile, &Rule::Plurality).expect("rankings");
    let mut others: Vec<f64> = (0..m).filter(|&c| c != w.index()).map(|c| plurality[c]).collect();
    others.sort_by(|a, b| b.total_cmp(a));
    let plurality_gap = plurality[w.index()] - others.get(1).copied().unwrap_or(0.0);
    if d_min <= 0 || plurality_gap <= 0.0 {
        return bad("construction does not separate the winner");
    }
    let changes = ceil_half(d_min as f64).min(ceil_half(plurality_gap));
    s.expected_winner = w;
    s.eps_guarantee = guarantee(eps.sqrt() / 8.0, s.n(), changes);
    Ok(s)
}

/// Ranking election for Borda and Bucklin: the first player's votes put `X`
/// in the top `1/√ε` positions, the second player's put the column
/// `A = {(a, i)}` there. Positions within each block rotate from vote to vote.
pub fn gen_block_positional(eps: f64, n: u64, x: &[usize], i: usize) -> Result<AdversarialStream, AdversarialError> {
    let side = grid_side(eps)?;
    check_index(x, side, side, i, side)?;
    let half = (n / 2) as usize;
    if half == 0 {
        return bad("n too small");
    }
    let half_votes = |top: &[CandidateId]| -> Vec<Vote> {
        let rest = split_grid(side, top);
        (0..half)
            .map(|t| Vote::Ranking(cyclic(top, t % top.len()).chain(cyclic(&rest, t % rest.len())).collect()))
            .collect()
    };
    let xs: Vec<CandidateId> = (1..=side).map(|j| grid_id(side, x[j - 1], j)).collect();
    let a_set: Vec<CandidateId> = (1..=side).map(|a| grid_id(side, a, i)).collect();
    let s = AdversarialStream::new(side * side, VoteKind::Ranking, half_votes(&xs), half_votes(&a_set));
    let m = side * side;
    finish_scored(s, &Rule::Borda, eps.sqrt() / 8.0, 2.0 * (m - 1) as f64)
}

/// `2^a` plurality votes for candidate 1, then `2^b` for candidate 0.
pub fn gen_greater_than(a: u32, b: u32) -> Result<AdversarialStream, AdversarialError> {
    if a == b || a > 20 || b > 20 {
        return bad("need a != b and both at most 20");
    }
    let prefix = plurality_votes(CandidateId(1), 1 << a).collect();
    let suffix = plurality_votes(CandidateId(0), 1 << b).collect();
    let s = AdversarialStream::new(2, VoteKind::Plurality, prefix, suffix);
    finish_scored(s, &Rule::Plurality, 1.0 / 3.0 - 1e-12, 2.0)
}

/// Plurality stream `X₁, m+1, X₂, m+1, X₃` over candidates `1..=m+1`
/// (ids `0..=m`). The handoff falls after the first `m+1` vote.
pub fn gen_disjointness(m: usize, sets: [&BTreeSet<u32>; 3]) -> Result<AdversarialStream, AdversarialError> {
    if m == 0 {
        return bad("m must be at least 1");
    }
    if sets.iter().any(|s| s.iter().any(|&v| v < 1 || v as usize > m)) {
        return bad(format!("set elements must lie in 1..={m}"));
    }
    let common: BTreeSet<u32> = sets[0]
        .iter()
        .filter(|v| sets[1].contains(v) && sets[2].contains(v))
        .copied()
        .collect();
    let pairwise_overlap = |p: &BTreeSet<u32>, q: &BTreeSet<u32>| p.iter().any(|v| q.contains(v) && !common.contains(v));
    if common.len() > 1
        || pairwise_overlap(sets[0], sets[1])
        || pairwise_overlap(sets[0], sets[2])
        || pairwise_overlap(sets[1], sets[2])
    {
        return bad("sets must be pairwise disjoint or share exactly one common element");
    }
    let extra = CandidateId::from(m);
    let votes_of = |s: &BTreeSet<u32>| s.iter().map(|&v| Vote::Plurality(CandidateId(v - 1))).collect::<Vec<_>>();
    let mut prefix = votes_of(sets[0]);
    prefix.push(Vote::Plurality(extra));
    let mut suffix = votes_of(sets[1]);
    suffix.push(Vote::Plurality(extra));
    suffix.extend(votes_of(sets[2]));
    let s = AdversarialStream::new(m + 1, VoteKind::Plurality, prefix, suffix);
    finish_scored(s, &Rule::Plurality, 0.0, 2.0)
}

/// Rankings whose top (or, for vetoes, bottom) `k` positions walk through
/// `pool` cyclically, `k` candidates per vote; the others fill the rest in id order.
fn round_robin(m: usize, k: usize, pool: &[CandidateId], count: usize, bottom: bool) -> Vec<Vote> {
    let mut cursor = 0;
    (0..count)
        .map(|_| {
            let chosen: Vec<CandidateId> = (0..k).map(|t| pool[(cursor + t) % pool.len()]).collect();
            cursor = (cursor + k) % pool.len();
            let set: BTreeSet<_> = chosen.iter().copied().collect();
            let rest = (0..m).map(CandidateId::from).filter(|c| !set.contains(c));
            Vote::Ranking(if bottom {
                rest.chain(chosen).collect()
            } else {
                chosen.into_iter().chain(rest).collect()
            })
        })
        .collect()
}

/// k-approval election on a `(1/ε) × (k/ε)` grid: the first player approves
/// each block of `k` consecutive `(x_j, j)`, `εn/2` votes per block; the
/// second approves the column `{(a, i)}` round-robin in `n/2` votes.
pub fn gen_kapproval_planted(k: usize, inv_eps: usize, n: u64, x: &[usize], i: usize) -> Result<AdversarialStream, AdversarialError> {
    if k == 0 || inv_eps < 2 || k > inv_eps {
        return bad("need 1 <= k <= 1/eps and 1/eps >= 2");
    }
    let cols = k * inv_eps;
    check_index(x, cols, inv_eps, i, cols)?;
    let m = inv_eps * cols;
    let per = (n as usize) / (2 * inv_eps);
    if per == 0 {
        return bad("n too small");
    }
    let mut prefix = Vec::new();
    for block in 0..inv_eps {
        let top: Vec<CandidateId> = (block * k + 1..=block * k + k)
            .map(|j| grid_id(inv_eps, x[j - 1], j))
            .collect();
        prefix.extend(round_robin(m, k, &top, per, false));
    }
    let column: Vec<CandidateId> = (1..=inv_eps).map(|a| grid_id(inv_eps, a, i)).collect();
    let suffix = round_robin(m, k, &column, (n / 2) as usize, false);
    let s = AdversarialStream::new(m, VoteKind::Ranking, prefix, suffix);
    finish_scored(s, &Rule::KApproval(k), 1.0 / (5.0 * inv_eps as f64), 2.0)
}

/// k-veto election on a `rows × cols` grid: the first player vetoes
/// everything outside `{(x_j, j)}` round-robin in `n/2` votes, the second
/// everything outside the column `{(a, i)}`.
pub fn gen_kveto_planted(k: usize, rows: usize, cols: usize, n: u64, x: &[usize], i: usize) -> Result<AdversarialStream, AdversarialError> {
    let m = rows * cols;
    if rows < 2 || cols < 2 || k == 0 || k > m - rows.max(cols) {
        return bad("need rows, cols >= 2 and 1 <= k <= m - max(rows, cols)");
    }
    check_index(x, cols, rows, i, cols)?;
    let half = (n / 2) as usize;
    if half == 0 {
        return bad("n too small");
    }
    let xs: Vec<CandidateId> = (1..=cols).map(|j| grid_id(rows, x[j - 1], j)).collect();
    let column: Vec<CandidateId> = (1..=rows).map(|a| grid_id(rows, a, i)).collect();
    let outside = |keep: &[CandidateId]| -> Vec<CandidateId> {
        (0..m).map(CandidateId::from).filter(|c| !keep.contains(c)).collect()
    };
    let prefix = round_robin(m, k, &outside(&xs), half, true);
    let suffix = round_robin(m, k, &outside(&column), half, true);
    let s = AdversarialStream::new(m, VoteKind::Ranking, prefix, suffix);
    finish_scored(s, &Rule::KVeto(k), 1.0 / (5.0 * m as f64), 2.0)
}

/// Generalized plurality on an `m × t` grid: the first player approves
/// `(x_j, j)` `(t - j)·⌊εn⌋` times for `j < t`; the second cancels the
/// entries `j < i` with as many disapprovals, leaving `(x_i, i)` on top.
pub fn gen_genplurality_augidx(eps: f64, m: usize, n: u64, x: &[usize], i: usize) -> Result<AdversarialStream, AdversarialError> {
    let t = (1.0 / eps.sqrt()).round() as usize;
    if !(eps > 0.0 && eps < 1.0) || t < 2 || ((t * t) as f64 * eps - 1.0).abs() > 1e-9 {
        return bad("1/eps must be a perfect square of at least 4");
    }
    if m < 1 {
        return bad("m must be at least 1");
    }
    check_index(x, t, m, i, t - 1)?;
    let unit = (eps * n as f64 + 1e-9).floor() as usize;
    if unit == 0 {
        return bad("n too small");
    }
    let id = |j: usize| grid_id(m, x[j - 1], j);
    let prefix = (1..t)
        .flat_map(|j| std::iter::repeat_n(Vote::GenPlurality(id(j), Sign::Approve), (t - j) * unit))
        .collect();
    let suffix = (1..i)
        .flat_map(|j| std::iter::repeat_n(Vote::GenPlurality(id(j), Sign::Disapprove), (t - j) * unit))
        .collect();
    let s = AdversarialStream::new(m * t, VoteKind::GenPlurality, prefix, suffix);
    finish_scored(s, &Rule::GenPlurality, eps / 5.0, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{exact_scores, exact_winner, is_eps_winner_with, SearchLimits};

    fn limits() -> SearchLimits {
        SearchLimits { max_n: 16, max_m: 4 }
    }

    /// The expected winner is an ε-winner at the guarantee and nobody else is.
    fn assert_unique(s: &AdversarialStream, rule: &Rule) {
        let p = s.profile();
        let eps = s.eps_guarantee;
        for c in 0..s.m() {
            let c = CandidateId::from(c);
            let ok = is_eps_winner_with(&p, rule, c, eps, limits()).unwrap();
            assert_eq!(ok, c == s.expected_winner, "{rule} candidate {c} at eps {eps}");
        }
    }

    #[test]
    fn augidx_examples() {
        let s = gen_augidx_plurality(0.25, 8, &[1, 2], 1).unwrap();
        assert_eq!(s.prefix.len(), 4);
        assert_eq!(s.expected_winner, grid_id(2, 1, 1));
        let scores = exact_scores(&s.profile(), &Rule::Plurality).unwrap();
        assert_eq!(scores.get(grid_id(2, 1, 1)), 4.0);
        assert_eq!(scores.get(grid_id(2, 2, 2)), 2.0);
        assert_eq!(scores.get(grid_id(2, 2, 1)), 2.0);
        assert_eq!(s.eps_guarantee, 1.0 / 16.0);
        assert_unique(&s, &Rule::Plurality);
        let t = gen_augidx_plurality(0.25, 8, &[1, 2], 2).unwrap();
        assert_eq!(t.expected_winner, grid_id(2, 2, 2));
        let u = gen_augidx_plurality(0.25, 8, &[2, 2], 2).unwrap();
        assert_eq!(u.expected_winner, t.expected_winner);
        assert!(gen_augidx_plurality(0.3, 8, &[1, 2], 1).is_err());
        assert!(gen_augidx_plurality(0.25, 8, &[1, 3], 1).is_err());
    }

    #[test]
    fn maxsum_examples() {
        let s = gen_maxsum_plurality(&[3, 1], &[1, 2]).unwrap();
        assert_eq!(s.expected_winner, CandidateId(0));
        assert_eq!(s.n(), 7);
        assert_unique(&s, &Rule::Plurality);
        assert_eq!(gen_maxsum_plurality(&[1, 4, 2], &[0, 0, 0]).unwrap().expected_winner, CandidateId(1));
        assert_eq!(gen_maxsum_plurality(&[1, 4, 2], &[1, 4, 2]).unwrap().expected_winner, CandidateId(1));
        assert!(gen_maxsum_plurality(&[2, 1], &[1, 2]).is_err());
    }

    #[test]
    fn ring_beats_everyone_pairwise() {
        for n in [8, 16] {
            for (x, i) in [([1, 2], 1), ([2, 1], 2), ([2, 2], 1)] {
                let s = gen_condorcet_ring(0.25, n, &x, i).unwrap();
                let p = s.profile();
                let g = majority_graph(&p).unwrap();
                assert_eq!(g.condorcet_winner(), Some(s.expected_winner));
                for rule in [Rule::Maximin, Rule::Copeland, Rule::Runoff] {
                    assert_eq!(exact_winner(&p, &rule).unwrap(), s.expected_winner);
                    assert_eq!(exact_winner(&s.swapped().profile(), &rule).unwrap(), s.expected_winner);
                    if n == 8 {
                        assert_unique(&s, &rule);
                    }
                }
            }
        }
    }

    #[test]
    fn ring_spreads_first_places() {
        let s = gen_condorcet_ring(1.0 / 16.0, 64, &[1, 2, 3, 4], 2).unwrap();
        let plu = exact_scores(&s.profile(), &Rule::Plurality).unwrap();
        let w = s.expected_winner;
        let best_other = (0..16u32)
            .map(CandidateId::from)
            .filter(|&c| c != w)
            .map(|c| plu.get(c))
            .fold(0.0, f64::max);
        assert_eq!(plu.get(w), 2.0 * best_other);
        assert_eq!(exact_winner(&s.profile(), &Rule::Runoff).unwrap(), w);
    }

    #[test]
    fn block_positional_borda_and_bucklin() {
        let s = gen_block_positional(0.25, 8, &[2, 1], 2).unwrap();
        assert_eq!(s.expected_winner, grid_id(2, 1, 2));
        assert_unique(&s, &Rule::Borda);
        let big = gen_block_positional(1.0 / 16.0, 400, &[3, 1, 4, 2], 3).unwrap();
        assert_eq!(big.expected_winner, grid_id(4, 4, 3));
        assert_eq!(exact_winner(&big.profile(), &Rule::Bucklin).unwrap(), big.expected_winner);
        assert_eq!(exact_winner(&big.profile(), &Rule::Borda).unwrap(), big.expected_winner);
    }

    #[test]
    fn greater_than_examples() {
        assert_eq!(gen_greater_than(3, 1).unwrap().expected_winner, CandidateId(1));
        assert_eq!(gen_greater_than(1, 3).unwrap().expected_winner, CandidateId(0));
        let s = gen_greater_than(2, 1).unwrap();
        assert_eq!(s.n(), 6);
        // a gap of 2 is closed by one replaced vote, so only ε < 1/6 is unique
        assert_eq!(s.eps_guarantee, 0.0);
        assert!(is_eps_winner_with(&s.profile(), &Rule::Plurality, CandidateId(0), 1.0 / 6.0, limits()).unwrap());
        assert_unique(&s, &Rule::Plurality);
        let wide = gen_greater_than(3, 0).unwrap();
        assert!((wide.eps_guarantee - (1.0 / 3.0 - 1e-12)).abs() < 1e-15);
        assert!(gen_greater_than(2, 2).is_err());
    }

    #[test]
    fn disjointness_examples() {
        let set = |v: &[u32]| v.iter().copied().collect::<BTreeSet<u32>>();
        let s = gen_disjointness(3, [&set(&[1]), &set(&[2]), &set(&[3])]).unwrap();
        assert_eq!(s.expected_winner, CandidateId(3));
        assert_eq!(exact_scores(&s.profile(), &Rule::Plurality).unwrap().get(CandidateId(3)), 2.0);
        assert_unique(&s, &Rule::Plurality);
        let t = gen_disjointness(3, [&set(&[1, 2]), &set(&[1, 3]), &set(&[1])]).unwrap();
        assert_eq!(t.expected_winner, CandidateId(0));
        assert_eq!(exact_scores(&t.profile(), &Rule::Plurality).unwrap().get(CandidateId(0)), 3.0);
        let e = gen_disjointness(3, [&set(&[]), &set(&[]), &set(&[])]).unwrap();
        assert_eq!(e.expected_winner, CandidateId(3));
        assert!(gen_disjointness(3, [&set(&[1, 2]), &set(&[2]), &set(&[3])]).is_err());
    }

    #[test]
    fn kapproval_and_kveto_planted() {
        let s = gen_kapproval_planted(1, 2, 8, &[2, 1], 1).unwrap();
        assert_eq!(s.expected_winner, grid_id(2, 2, 1));
        assert_unique(&s, &Rule::KApproval(1));
        for k in 2..=3 {
            let x: Vec<usize> = (0..k * 3).map(|j| j % 3 + 1).collect();
            let s = gen_kapproval_planted(k, 3, 600, &x, 4).unwrap();
            assert_eq!(s.expected_winner, grid_id(3, x[3], 4));
            assert_eq!(exact_winner(&s.profile(), &Rule::KApproval(k)).unwrap(), s.expected_winner);
        }
        let v = gen_kveto_planted(1, 2, 2, 8, &[1, 2], 2).unwrap();
        assert_eq!(v.expected_winner, grid_id(2, 2, 2));
        assert_unique(&v, &Rule::KVeto(1));
        for k in 1..=3 {
            let v = gen_kveto_planted(k, 3, 3, 120, &[3, 1, 2], 1).unwrap();
            assert_eq!(v.expected_winner, grid_id(3, 3, 1));
            assert_eq!(exact_winner(&v.profile(), &Rule::KVeto(k)).unwrap(), v.expected_winner);
        }
    }

    #[test]
    fn genplurality_needs_disapprovals() {
        let s = gen_genplurality_augidx(0.25, 2, 8, &[2, 1], 1).unwrap();
        assert_eq!(s.expected_winner, grid_id(2, 2, 1));
        assert!(s.suffix.is_empty());
        let t = gen_genplurality_augidx(1.0 / 9.0, 2, 27, &[2, 1, 1], 2).unwrap();
        assert_eq!(t.expected_winner, grid_id(2, 1, 2));
        assert!(t.suffix.iter().all(|v| matches!(v, Vote::GenPlurality(_, Sign::Disapprove))));
        assert_eq!(exact_winner(&t.profile(), &Rule::GenPlurality).unwrap(), t.expected_winner);
        assert!(gen_genplurality_augidx(1.0 / 9.0, 2, 27, &[2, 1, 1], 3).is_err());
    }

    #[test]
    fn handoff_marker_written() {
        let s = gen_augidx_plurality(0.25, 8, &[1, 2], 1).unwrap();
        let mut out = Vec::new();
        s.write(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1 + s.handoff()], "# handoff");
        let back = crate::votes::VoteReader::new(text.as_bytes()).unwrap().into_profile().unwrap().1;
        assert_eq!(back, s.profile());
    }
}

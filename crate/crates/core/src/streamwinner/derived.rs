use crate::rng::CountingRng;
use crate::rules::Rule;
use crate::votes::{CandidateId, Sign, Vote};

/// An element of the derived stream that a sampled vote expands into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivedItem {
    Single(CandidateId),
    /// `x` ranked above `y`; `Pair(x, x)` marks `x` as the top choice.
    Pair(CandidateId, CandidateId),
    /// `x` is within the first `k` positions (1-based).
    Depth(CandidateId, usize),
}

impl DerivedItem {
    /// Injective code in `[0, m)` for singles and `[0, m²)` otherwise.
    pub fn code(&self, m: usize) -> u64 {
        let m = m as u64;
        match *self {
            DerivedItem::Single(x) => x.0 as u64,
            DerivedItem::Pair(x, y) => x.0 as u64 * m + y.0 as u64,
            DerivedItem::Depth(x, k) => x.0 as u64 * m + (k as u64 - 1),
        }
    }
}

/// How sampled votes of one rule turn into derived items.
#[derive(Debug, Clone, PartialEq)]
pub enum Expansion {
    /// The first `k` candidates.
    TopK(usize),
    /// The last `k` candidates, counted as vetoes.
    BottomK(usize),
    /// `+1`/`-1` per generalized-plurality ballot.
    Signed,
    /// One candidate per vote, position `i` drawn with probability `α_i / Σα`.
    Draw { alpha: Vec<f64>, cumulative: Vec<f64> },
    /// Every candidate weighted by its integral positional score.
    Weighted(Vec<i64>),
    Approvals,
    /// All pairs `(c_j, c_k)` with `j < k`.
    Pairs,
    /// `Depth(c_j, k)` for every `j ≤ k`.
    Depths,
    /// Pairs plus `Pair(c_1, c_1)`.
    PairsAndTop,
}

impl Expansion {
    /// Expansion for `rule`; `exact` selects weighted scoring when the
    /// score vector is integral.
    pub fn for_rule(rule: &Rule, m: usize, exact: bool) -> Expansion {
        match rule {
            Rule::Plurality => Expansion::TopK(1),
            Rule::KApproval(k) => Expansion::TopK(*k),
            Rule::Veto => Expansion::BottomK(1),
            Rule::KVeto(k) => Expansion::BottomK(*k),
            Rule::GenPlurality => Expansion::Signed,
            Rule::Approval => Expansion::Approvals,
            Rule::Maximin | Rule::Copeland => Expansion::Pairs,
            Rule::Bucklin => Expansion::Depths,
            Rule::Runoff => Expansion::PairsAndTop,
            Rule::Scoring(_) | Rule::Borda => {
                let alpha = rule.alpha(m).expect("positional rule");
                if exact && alpha.iter().all(|a| a.fract() == 0.0) {
                    return Expansion::Weighted(alpha.iter().map(|&a| a as i64).collect());
                }
                let total: f64 = alpha.iter().sum();
                let mut acc = 0.0;
                let cumulative = alpha
                    .iter()
                    .map(|a| {
                        acc += a / total;
                        acc
                    })
                    .collect();
                Expansion::Draw { alpha, cumulative }
            }
        }
    }

    /// Size of the item universe.
    pub fn universe(&self, m: usize) -> usize {
        match self {
            Expansion::Pairs | Expansion::Depths | Expansion::PairsAndTop => m * m,
            _ => m,
        }
    }

    /// Largest number of derived items one vote can produce.
    pub fn items_per_vote(&self, m: usize) -> usize {
        match self {
            Expansion::TopK(k) | Expansion::BottomK(k) => *k,
            Expansion::Signed | Expansion::Draw { .. } => 1,
            Expansion::Weighted(_) | Expansion::Approvals => m,
            Expansion::Pairs => m * (m - 1) / 2,
            Expansion::Depths => m * (m + 1) / 2,
            Expansion::PairsAndTop => m * (m - 1) / 2 + 1,
        }
    }

    /// `α'_1`, the largest normalized positional weight, for drawn scoring.
    pub fn top_weight(&self) -> Option<f64> {
        match self {
            Expansion::Draw { alpha, .. } => Some(alpha[0] / alpha.iter().sum::<f64>()),
            _ => None,
        }
    }

    /// Draws the scored position for `Draw` expansions.
    pub fn draw_pick(&self, vote: &Vote, rng: &mut CountingRng) -> Option<u32> {
        match (self, vote) {
            (Expansion::Draw { cumulative, .. }, Vote::Ranking(_)) => {
                let u = rng.unit_f64();
                let i = cumulative.partition_point(|&c| c <= u);
                // guard against rounding in the last cumulative entry
                let i = i.min(cumulative.len() - 1);
                let i = (0..=i).rev().find(|&j| j == 0 || cumulative[j] > cumulative[j - 1]);
                i.map(|i| i as u32)
            }
            _ => None,
        }
    }

    /// Derived items of one vote with their weights. A negative weight
    /// marks a disapproval.
    pub fn expand(&self, vote: &Vote, pick: Option<u32>) -> Vec<(DerivedItem, i64)> {
        use DerivedItem::*;
        let single = |c: CandidateId| (Single(c), 1);
        match (self, vote) {
            (Expansion::TopK(_), Vote::Plurality(c)) => vec![single(*c)],
            (Expansion::TopK(k), Vote::Ranking(o)) => o.iter().take(*k).copied().map(single).collect(),
            (Expansion::BottomK(k), Vote::Ranking(o)) => {
                o[o.len().saturating_sub(*k)..].iter().copied().map(single).collect()
            }
            (Expansion::Signed, Vote::GenPlurality(c, Sign::Approve))
            | (Expansion::Signed, Vote::Plurality(c)) => vec![(Single(*c), 1)],
            (Expansion::Signed, Vote::GenPlurality(c, Sign::Disapprove)) => vec![(Single(*c), -1)],
            (Expansion::Draw { .. }, Vote::Ranking(o)) => pick
                .map(|i| vec![single(o[i as usize])])
                .unwrap_or_default(),
            (Expansion::Weighted(w), Vote::Ranking(o)) => o
                .iter()
                .zip(w)
                .filter(|(_, &a)| a != 0)
                .map(|(&c, &a)| (Single(c), a))
                .collect(),
            (Expansion::Approvals, Vote::Approval(set)) => set.iter().copied().map(single).collect(),
            (Expansion::Approvals, Vote::Plurality(c)) => vec![single(*c)],
            (Expansion::Pairs | Expansion::PairsAndTop, Vote::Ranking(o)) => {
                let mut out = Vec::with_capacity(o.len() * o.len() / 2 + 1);
                for (j, &x) in o.iter().enumerate() {
                    for &y in &o[j + 1..] {
                        out.push((Pair(x, y), 1));
                    }
                }
                if *self == Expansion::PairsAndTop {
                    out.push((Pair(o[0], o[0]), 1));
                }
                out
            }
            (Expansion::Depths, Vote::Ranking(o)) => {
                let m = o.len();
                let mut out = Vec::with_capacity(m * (m + 1) / 2);
                for k in 1..=m {
                    for &x in &o[..k] {
                        out.push((Depth(x, k), 1));
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn c(i: u32) -> CandidateId {
        CandidateId(i)
    }

    #[test]
    fn two_approval_takes_top_two() {
        let e = Expansion::for_rule(&Rule::KApproval(2), 4, false);
        let items = e.expand(&Vote::ranking([3, 1, 0, 2]), None);
        assert_eq!(items, vec![(DerivedItem::Single(c(3)), 1), (DerivedItem::Single(c(1)), 1)]);
    }

    #[test]
    fn maximin_takes_ordered_pairs() {
        let e = Expansion::for_rule(&Rule::Maximin, 3, false);
        let items: Vec<_> = e.expand(&Vote::ranking([0, 1, 2]), None).into_iter().map(|x| x.0).collect();
        assert_eq!(
            items,
            vec![
                DerivedItem::Pair(c(0), c(1)),
                DerivedItem::Pair(c(0), c(2)),
                DerivedItem::Pair(c(1), c(2))
            ]
        );
    }

    #[test]
    fn runoff_adds_top_marker() {
        let e = Expansion::for_rule(&Rule::Runoff, 3, false);
        let items = e.expand(&Vote::ranking([2, 0, 1]), None);
        assert_eq!(items.len(), 4);
        assert_eq!(items[3].0, DerivedItem::Pair(c(2), c(2)));
    }

    #[test]
    fn bucklin_depths() {
        let e = Expansion::for_rule(&Rule::Bucklin, 3, false);
        let items: Vec<_> = e.expand(&Vote::ranking([1, 2, 0]), None).into_iter().map(|x| x.0).collect();
        assert_eq!(items.len(), 6);
        assert!(items.contains(&DerivedItem::Depth(c(1), 1)));
        assert!(!items.contains(&DerivedItem::Depth(c(2), 1)));
        assert!(items.contains(&DerivedItem::Depth(c(0), 3)));
    }

    #[test]
    fn borda_never_draws_last_position() {
        let e = Expansion::for_rule(&Rule::Borda, 3, false);
        assert_eq!(e.top_weight(), Some(2.0 / 3.0));
        let mut rng = CountingRng::seed_from_u64(1);
        let v = Vote::ranking([0, 1, 2]);
        let mut hist = [0u32; 3];
        for _ in 0..30_000 {
            hist[e.draw_pick(&v, &mut rng).unwrap() as usize] += 1;
        }
        assert_eq!(hist[2], 0);
        let f0 = hist[0] as f64 / 30_000.0;
        assert!((f0 - 2.0 / 3.0).abs() < 0.01, "f0 {f0}");
    }

    #[test]
    fn exact_scoring_weights() {
        let e = Expansion::for_rule(&Rule::Borda, 3, true);
        assert_eq!(e, Expansion::Weighted(vec![2, 1, 0]));
        let items = e.expand(&Vote::ranking([1, 0, 2]), None);
        assert_eq!(items, vec![(DerivedItem::Single(c(1)), 2), (DerivedItem::Single(c(0)), 1)]);
    }

    #[test]
    fn codes_are_injective() {
        let m = 5;
        let mut seen = HashSet::new();
        for x in 0..m as u32 {
            for y in 0..m as u32 {
                assert!(seen.insert(DerivedItem::Pair(c(x), c(y)).code(m)));
            }
        }
        assert!(seen.iter().all(|&v| v < (m * m) as u64));
        let depths: HashSet<_> = (0..m as u32)
            .flat_map(|x| (1..=m).map(move |k| DerivedItem::Depth(c(x), k).code(m)))
            .collect();
        assert_eq!(depths.len(), m * m);
    }

    #[test]
    fn veto_and_signed() {
        let e = Expansion::for_rule(&Rule::KVeto(2), 4, false);
        let items = e.expand(&Vote::ranking([3, 1, 0, 2]), None);
        assert_eq!(items, vec![(DerivedItem::Single(c(0)), 1), (DerivedItem::Single(c(2)), 1)]);
        let s = Expansion::for_rule(&Rule::GenPlurality, 4, false);
        assert_eq!(
            s.expand(&Vote::GenPlurality(c(2), Sign::Disapprove), None),
            vec![(DerivedItem::Single(c(2)), -1)]
        );
    }
}

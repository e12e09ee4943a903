//! Random and planted-winner profile generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rules::{majority_graph, profile_tally, Rule, TallyShape};
use crate::votes::{CandidateId, ElectionProfile, Sign, Vote, VoteKind};

/// Default share of votes that favour the planted candidate.
pub const DEFAULT_SHARE: f64 = 0.7;

/// The vote kind generated for `rule`.
pub fn kind_for(rule: &Rule) -> VoteKind {
    match rule {
        Rule::Plurality => VoteKind::Plurality,
        Rule::Approval => VoteKind::Approval,
        Rule::GenPlurality => VoteKind::GenPlurality,
        _ => VoteKind::Ranking,
    }
}

fn random_ranking<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<CandidateId> {
    let mut order: Vec<CandidateId> = (0..m).map(CandidateId::from).collect();
    order.shuffle(rng);
    order
}

/// One vote of `kind` drawn uniformly; approval sets include each candidate
/// independently with probability 1/2.
pub fn uniform_vote<R: Rng + ?Sized>(kind: VoteKind, m: usize, rng: &mut R) -> Vote {
    let any = |rng: &mut R| CandidateId::from(rng.gen_range(0..m));
    match kind {
        VoteKind::Ranking => Vote::Ranking(random_ranking(m, rng)),
        VoteKind::Approval => Vote::Approval((0..m).filter(|_| rng.gen_bool(0.5)).map(CandidateId::from).collect()),
        VoteKind::Plurality => Vote::Plurality(any(rng)),
        VoteKind::GenPlurality => {
            let c = any(rng);
            let sign = if rng.gen_bool(0.5) { Sign::Approve } else { Sign::Disapprove };
            Vote::GenPlurality(c, sign)
        }
    }
}

pub fn uniform_profile<R: Rng + ?Sized>(kind: VoteKind, m: usize, n: usize, rng: &mut R) -> ElectionProfile {
    let votes = (0..n).map(|_| uniform_vote(kind, m, rng)).collect();
    ElectionProfile::new(m, kind, votes).expect("uniform votes are valid")
}

/// A vote that, with probability `share`, favours `winner`: ranked first
/// (never in the bottom positions), approved, or approved with a plus sign.
/// Otherwise the vote is uniform.
pub fn planted_vote<R: Rng + ?Sized>(rule: &Rule, m: usize, winner: CandidateId, share: f64, rng: &mut R) -> Vote {
    let kind = kind_for(rule);
    if !rng.gen_bool(share) {
        return uniform_vote(kind, m, rng);
    }
    match kind {
        VoteKind::Ranking => {
            let mut order = random_ranking(m, rng);
            let at = order.iter().position(|&c| c == winner).expect("winner is a candidate");
            order[..=at].rotate_right(1);
            Vote::Ranking(order)
        }
        VoteKind::Approval => {
            let mut v: std::collections::BTreeSet<CandidateId> =
                (0..m).filter(|_| rng.gen_bool(0.5)).map(CandidateId::from).collect();
            v.insert(winner);
            Vote::Approval(v)
        }
        VoteKind::Plurality => Vote::Plurality(winner),
        VoteKind::GenPlurality => Vote::GenPlurality(winner, Sign::Approve),
    }
}

pub fn planted_profile<R: Rng + ?Sized>(
    rule: &Rule,
    m: usize,
    n: usize,
    winner: CandidateId,
    share: f64,
    rng: &mut R,
) -> ElectionProfile {
    let votes = (0..n).map(|_| planted_vote(rule, m, winner, share, rng)).collect();
    ElectionProfile::new(m, kind_for(rule), votes).expect("planted votes are valid")
}

/// Realized separation of `winner`, as a fraction of `n`.
///
/// Score rules: lead over the runner-up divided by `(α_1 − α_m)·n` (by `n`
/// for approval, generalized plurality and k-veto). Maximin and Copeland:
/// the smallest pairwise margin `D(winner, y)/n`. Bucklin and runoff: the
/// smaller of that and the plurality lead. Negative if `winner` does not win.
pub fn planted_margin(profile: &ElectionProfile, rule: &Rule, winner: CandidateId) -> f64 {
    let n = profile.n().max(1) as f64;
    let m = profile.m();
    let w = winner.index();
    let lead_of = |scores: &[f64]| {
        let best_other = (0..m).filter(|&c| c != w).map(|c| scores[c]).fold(f64::NEG_INFINITY, f64::max);
        scores[w] - best_other
    };
    let pairwise = || {
        let g = majority_graph(profile).expect("rankings");
        (0..m)
            .filter(|&c| c != w)
            .map(|c| g.margin(winner, CandidateId::from(c)) as f64)
            .fold(f64::INFINITY, f64::min)
            / n
    };
    match rule.shape() {
        TallyShape::Scores => {
            let tally = profile_tally(profile, rule).expect("kind matches rule");
            let range = rule
                .alpha(m)
                .map(|a| a[0] - a[m - 1])
                .unwrap_or(1.0);
            lead_of(&tally) / (range * n)
        }
        TallyShape::Pairs => pairwise(),
        TallyShape::Depths | TallyShape::Runoff => {
            let plurality = profile_tally(profile, &Rule::Plurality).expect("rankings");
            pairwise().min(lead_of(&plurality) / n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::exact_winner;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn planted_candidate_wins_every_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rules = [
            Rule::Plurality,
            Rule::KApproval(3),
            Rule::KVeto(4),
            Rule::Borda,
            Rule::GenPlurality,
            Rule::Approval,
            Rule::Maximin,
            Rule::Copeland,
            Rule::Bucklin,
            Rule::Runoff,
        ];
        for rule in &rules {
            let p = planted_profile(rule, 8, 2000, CandidateId(5), DEFAULT_SHARE, &mut rng);
            assert_eq!(exact_winner(&p, rule).unwrap(), CandidateId(5), "{rule}");
            let margin = planted_margin(&p, rule, CandidateId(5));
            assert!(margin > 0.2, "{rule} margin {margin}");
        }
    }

    #[test]
    fn uniform_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for kind in [VoteKind::Ranking, VoteKind::Approval, VoteKind::Plurality, VoteKind::GenPlurality] {
            let p = uniform_profile(kind, 5, 50, &mut rng);
            assert_eq!(p.n(), 50);
            assert_eq!(p.kind(), kind);
        }
    }

    #[test]
    fn losing_candidate_has_negative_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = planted_profile(&Rule::Plurality, 5, 1000, CandidateId(0), 0.5, &mut rng);
        assert!(planted_margin(&p, &Rule::Plurality, CandidateId(1)) < 0.0);
    }
}

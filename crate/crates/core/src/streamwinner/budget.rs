use crate::rules::Rule;

/// Target sample size, and the Bernoulli rate once the stream length is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBudget {
    pub ell: u64,
    pub p: Option<f64>,
}

/// Default multiplier on `L/ε²`.
pub const DEFAULT_SAMPLE_CONSTANT: f64 = 4.5;

/// The rule-dependent log factor `L` in `ℓ = ⌈(c/ε²)·L⌉`.
pub fn log_factor(rule: &Rule, delta: f64, m: usize) -> f64 {
    let two_over_delta = (2.0 / delta).ln();
    let two_m_over_delta = (2.0 * m as f64 / delta).ln();
    match rule {
        Rule::KApproval(k) => ((*k + 2) as f64).ln() * two_over_delta,
        Rule::Plurality => 3f64.ln() * two_over_delta,
        Rule::KVeto(k) => ((m.saturating_sub(*k) + 1) as f64).ln() * two_over_delta,
        Rule::Veto => (m as f64).ln() * two_over_delta,
        Rule::GenPlurality => two_over_delta,
        Rule::Copeland => two_m_over_delta.powi(3),
        Rule::Scoring(_)
        | Rule::Borda
        | Rule::Approval
        | Rule::Maximin
        | Rule::Bucklin
        | Rule::Runoff => two_m_over_delta,
    }
}

/// Sample size for an (ε, δ)-winner under `rule` with `m` candidates.
pub fn budget_for(rule: &Rule, eps: f64, delta: f64, m: usize, c: f64) -> SampleBudget {
    let raw = (c / (eps * eps) * log_factor(rule, delta, m)).ceil();
    let ell = if raw.is_finite() && raw >= 1.0 {
        raw.min(u64::MAX as f64) as u64
    } else {
        1
    };
    SampleBudget { ell, p: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genplurality_example() {
        assert_eq!(budget_for(&Rule::GenPlurality, 0.1, 0.1, 5, 4.5).ell, 1349);
    }

    #[test]
    fn large_eps_keeps_one_sample() {
        assert!(budget_for(&Rule::GenPlurality, 0.999_999, 0.999_999, 2, 1e-6).ell >= 1);
        assert!(budget_for(&Rule::KVeto(1), 0.5, 0.5, 1, 4.5).ell >= 1);
    }

    #[test]
    fn copeland_is_cube_of_maximin_factor() {
        let (m, d) = (10, 0.05);
        let ratio = log_factor(&Rule::Copeland, d, m) / log_factor(&Rule::Maximin, d, m);
        assert!((ratio - (2.0 * m as f64 / d).ln().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn plurality_matches_one_approval() {
        assert_eq!(
            budget_for(&Rule::Plurality, 0.05, 0.1, 20, 4.5),
            budget_for(&Rule::KApproval(1), 0.05, 0.1, 20, 4.5)
        );
        assert_eq!(
            budget_for(&Rule::Veto, 0.05, 0.1, 20, 4.5),
            budget_for(&Rule::KVeto(1), 0.05, 0.1, 20, 4.5)
        );
    }
}

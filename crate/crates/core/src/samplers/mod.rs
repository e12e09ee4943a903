//! Vote-selection primitives.

mod coin;
mod reservoir;
mod window;

pub use coin::CoinTossSampler;
pub use reservoir::Reservoir;
pub use window::WindowSampler;

use crate::codec::{CodecError, Reader, Writer};
use crate::rng::CountingRng;

/// Change to one sampler slot: the new occupant, the old one, or both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delta<T> {
    pub slot: usize,
    pub inserted: Option<T>,
    pub evicted: Option<T>,
}

impl<T> Delta<T> {
    fn insert(slot: usize, item: T) -> Self {
        Delta {
            slot,
            inserted: Some(item),
            evicted: None,
        }
    }
}

/// `min(1, 2·ell_target / n_lo)`.
pub fn bernoulli_sample_rate(ell_target: u64, n_lo: u64) -> f64 {
    assert!(ell_target >= 1 && n_lo >= 1, "sample sizes must be positive");
    (2.0 * ell_target as f64 / n_lo as f64).min(1.0)
}

/// Independent Bernoulli(p) selection, drawing geometric gaps instead of
/// one coin per item.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliSampler {
    p: f64,
    /// Items to skip before the next selected one.
    gap: Option<u64>,
}

impl BernoulliSampler {
    pub fn new(p: f64) -> Self {
        assert!(p > 0.0 && p <= 1.0, "rate must be in (0, 1]");
        BernoulliSampler { p, gap: None }
    }

    pub fn rate(&self) -> f64 {
        self.p
    }

    fn draw_gap(&self, rng: &mut CountingRng) -> u64 {
        if self.p >= 1.0 {
            return 0;
        }
        let g = (rng.open_unit_f64().ln() / (-self.p).ln_1p()).floor();
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            g as u64
        }
    }

    /// Whether the next item is selected.
    pub fn select(&mut self, rng: &mut CountingRng) -> bool {
        let gap = match self.gap {
            Some(g) => g,
            None => self.draw_gap(rng),
        };
        if gap == 0 {
            self.gap = None;
            true
        } else {
            self.gap = Some(gap - 1);
            false
        }
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        w.f64(self.p);
        w.bool(self.gap.is_some());
        w.u64(self.gap.unwrap_or(0));
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let p = r.f64()?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(CodecError::Invalid("sampling rate".into()));
        }
        let has = r.bool()?;
        let g = r.u64()?;
        Ok(BernoulliSampler {
            p,
            gap: has.then_some(g),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates() {
        assert_eq!(bernoulli_sample_rate(100, 1_000_000), 2e-4);
        assert_eq!(bernoulli_sample_rate(500, 1000), 1.0);
        assert_eq!(bernoulli_sample_rate(600, 1000), 1.0);
    }

    #[test]
    fn rate_one_takes_everything() {
        let mut rng = CountingRng::seed_from_u64(0);
        let mut s = BernoulliSampler::new(1.0);
        assert!((0..100).all(|_| s.select(&mut rng)));
    }

    #[test]
    fn selection_rate_and_independence() {
        let mut rng = CountingRng::seed_from_u64(3);
        let mut s = BernoulliSampler::new(0.1);
        let picks: Vec<bool> = (0..200_000).map(|_| s.select(&mut rng)).collect();
        let rate = picks.iter().filter(|&&b| b).count() as f64 / picks.len() as f64;
        assert!((rate - 0.1).abs() < 0.003, "rate {rate}");
        let pairs = picks.windows(2).filter(|w| w[0] && w[1]).count() as f64;
        let joint = pairs / (picks.len() - 1) as f64;
        assert!((joint - 0.01).abs() < 0.002, "joint {joint}");
    }

    #[test]
    fn realized_sample_rarely_short() {
        // p = 2 ell / n leaves fewer than ell picks with small probability
        let (ell, n, trials) = (50u64, 10_000u64, 1000);
        let mut rng = CountingRng::seed_from_u64(17);
        let mut short = 0;
        for _ in 0..trials {
            let mut s = BernoulliSampler::new(bernoulli_sample_rate(ell, n));
            let got = (0..n).filter(|_| s.select(&mut rng)).count() as u64;
            short += (got < ell) as u32;
        }
        assert!(short as f64 / trials as f64 <= 0.02, "short {short}");
    }
}

use crate::rng::CountingRng;

/// Base-2 Morris approximate counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MorrisCounter {
    x: u8,
}

impl MorrisCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn exponent(&self) -> u8 {
        self.x
    }

    pub(crate) fn from_exponent(x: u8) -> Self {
        MorrisCounter { x: x.min(63) }
    }

    /// Bumps the exponent with probability `2^-X`, using `X` fair coins.
    pub fn increment(&mut self, rng: &mut CountingRng) {
        if self.x < 63 && (0..self.x).all(|_| rng.coin()) {
            self.x += 1;
        }
    }

    /// `2^X - 1`.
    pub fn estimate(&self) -> u64 {
        (1u64 << self.x) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_increment_is_certain() {
        let mut rng = CountingRng::seed_from_u64(0);
        let mut c = MorrisCounter::new();
        assert_eq!(c.estimate(), 0);
        c.increment(&mut rng);
        assert_eq!(c.estimate(), 1);
    }

    #[test]
    fn unbiased_over_trials() {
        let mut rng = CountingRng::seed_from_u64(11);
        let trials = 10_000;
        let mut sum = 0u64;
        for _ in 0..trials {
            let mut c = MorrisCounter::new();
            for _ in 0..1000 {
                c.increment(&mut rng);
            }
            sum += c.estimate();
        }
        let mean = sum as f64 / trials as f64;
        assert!((mean - 1000.0).abs() <= 150.0, "mean {mean}");
    }
}

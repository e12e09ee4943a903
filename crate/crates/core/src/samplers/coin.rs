use crate::rng::CountingRng;

/// Accepts an offered item with probability exactly `1/n_target` using
/// only fair coins.
///
/// Each round tosses `t = ⌈log₂ n_target⌉` coins and reads them as an
/// integer `r`. Rounds with `r ≥ n_target` are retossed, so conditioned on
/// finishing, `r` is uniform over `[0, n_target)` and the item is accepted
/// iff `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoinTossSampler {
    n_target: u64,
    tosses: u32,
}

impl CoinTossSampler {
    pub fn new(n_target: u64) -> Self {
        assert!(n_target >= 1, "n_target must be positive");
        let tosses = 64 - (n_target - 1).leading_zeros();
        CoinTossSampler { n_target, tosses }
    }

    pub fn n_target(&self) -> u64 {
        self.n_target
    }

    /// Coins per round.
    pub fn tosses(&self) -> u32 {
        self.tosses
    }

    /// Outcome of one round whose coins are the low `tosses` bits of
    /// `coins`: `None` means retoss.
    pub fn round(&self, coins: u64) -> Option<bool> {
        let mask = if self.tosses == 64 {
            u64::MAX
        } else {
            (1u64 << self.tosses) - 1
        };
        let r = coins & mask;
        (r < self.n_target).then_some(r == 0)
    }

    pub fn accept(&self, rng: &mut CountingRng) -> bool {
        loop {
            let mut coins = 0u64;
            for i in 0..self.tosses {
                coins |= (rng.coin() as u64) << i;
            }
            if let Some(ok) = self.round(coins) {
                return ok;
            }
        }
    }
}

//! Seeded randomness with a running count of consumed bits.

use rand::{Error, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{CodecError, Reader, Writer};

/// ChaCha8 generator that tracks how many random bits were drawn.
///
/// Coin flips are served one bit at a time from a buffered word, so the
/// fair-coin samplers are charged one bit per toss.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingRng {
    inner: ChaCha8Rng,
    bits: u64,
    coin_buf: u64,
    coin_left: u8,
}

impl CountingRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self::from_chacha(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent generator for a numbered sub-stream of one seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self::from_chacha(inner)
    }

    fn from_chacha(inner: ChaCha8Rng) -> Self {
        CountingRng {
            inner,
            bits: 0,
            coin_buf: 0,
            coin_left: 0,
        }
    }

    pub fn bits_consumed(&self) -> u64 {
        self.bits
    }

    /// One fair coin: `true` is heads.
    pub fn coin(&mut self) -> bool {
        if self.coin_left == 0 {
            self.coin_buf = self.inner.next_u64();
            self.coin_left = 64;
        }
        let bit = self.coin_buf & 1 == 1;
        self.coin_buf >>= 1;
        self.coin_left -= 1;
        self.bits += 1;
        bit
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`, safe to pass to `ln`.
    pub fn open_unit_f64(&mut self) -> f64 {
        1.0 - self.unit_f64()
    }

    /// Uniform integer in `[0, n)` by rejection; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        if n.is_power_of_two() {
            return self.next_u64() & (n - 1);
        }
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// Bernoulli trial with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        self.unit_f64() < p
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        w.bytes(&self.inner.get_seed());
        w.u64(self.inner.get_stream());
        w.u128(self.inner.get_word_pos());
        w.u64(self.bits);
        w.u64(self.coin_buf);
        w.u8(self.coin_left);
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let seed: [u8; 32] = r
            .bytes(32)?
            .try_into()
            .map_err(|_| CodecError::Truncated)?;
        let mut inner = ChaCha8Rng::from_seed(seed);
        inner.set_stream(r.u64()?);
        inner.set_word_pos(r.u128()?);
        let bits = r.u64()?;
        let coin_buf = r.u64()?;
        let coin_left = r.u8()?;
        if coin_left > 64 {
            return Err(CodecError::Invalid("coin buffer length".into()));
        }
        Ok(CountingRng {
            inner,
            bits,
            coin_buf,
            coin_left,
        })
    }
}

impl RngCore for CountingRng {
    fn next_u32(&mut self) -> u32 {
        self.bits += 32;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.bits += 64;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.bits += 8 * dest.len() as u64;
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

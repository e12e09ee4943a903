use std::f64::consts::E;

use crate::codec::{CodecError, Reader, Writer};

use super::SketchError;

const MERSENNE_61: u64 = (1 << 61) - 1;

fn mod_mersenne(x: u128) -> u64 {
    let lo = (x as u64) & MERSENNE_61;
    let hi = (x >> 61) as u64;
    let mut r = lo + (hi & MERSENNE_61) + (hi >> 61);
    while r >= MERSENNE_61 {
        r -= MERSENNE_61;
    }
    r
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Count-min sketch with signed counters.
///
/// Row `r` hashes with `((a_r x + b_r) mod (2^61 - 1)) mod width`, a
/// pairwise-independent family whose coefficients come from `seed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMin {
    width: usize,
    depth: usize,
    seed: u64,
    hashes: Vec<(u64, u64)>,
    table: Vec<i64>,
    l1: u64,
}

impl CountMin {
    /// Width `⌈e/eps⌉`, depth `⌈ln(1/delta)⌉` (at least 1).
    pub fn new(eps: f64, delta: f64, seed: u64) -> Result<Self, SketchError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(SketchError::Param(format!("eps must be in (0, 1], got {eps}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(SketchError::Param(format!("delta must be in (0, 1), got {delta}")));
        }
        let width = (E / eps - 1e-9).ceil() as usize;
        let depth = ((1.0 / delta).ln() - 1e-9).ceil().max(1.0) as usize;
        Ok(Self::with_dims(width, depth, seed))
    }

    pub fn with_dims(width: usize, depth: usize, seed: u64) -> Self {
        assert!(width >= 1 && depth >= 1, "count-min needs positive dimensions");
        let mut state = seed;
        let hashes = (0..depth)
            .map(|_| {
                let a = splitmix64(&mut state) % (MERSENNE_61 - 1) + 1;
                let b = splitmix64(&mut state) % MERSENNE_61;
                (a, b)
            })
            .collect();
        CountMin {
            width,
            depth,
            seed,
            hashes,
            table: vec![0; width * depth],
            l1: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sum of absolute update sizes.
    pub fn l1(&self) -> u64 {
        self.l1
    }

    fn cell(&self, row: usize, item: u64) -> usize {
        let (a, b) = self.hashes[row];
        let x = item % MERSENNE_61;
        let h = mod_mersenne(a as u128 * x as u128 + b as u128);
        row * self.width + (h % self.width as u64) as usize
    }

    pub fn update(&mut self, item: u64, delta: i64) {
        for row in 0..self.depth {
            let i = self.cell(row, item);
            self.table[i] += delta;
        }
        self.l1 += delta.unsigned_abs();
    }

    /// Minimum over rows.
    pub fn estimate(&self, item: u64) -> i64 {
        (0..self.depth)
            .map(|row| self.table[self.cell(row, item)])
            .min()
            .expect("depth >= 1")
    }

    /// Cell-wise sum with a sketch of identical shape and seed.
    pub fn merge(&mut self, other: &CountMin) -> Result<(), SketchError> {
        if (self.width, self.depth, self.seed) != (other.width, other.depth, other.seed) {
            return Err(SketchError::Shape("count-min shapes or seeds differ".into()));
        }
        for (a, b) in self.table.iter_mut().zip(&other.table) {
            *a += b;
        }
        self.l1 += other.l1;
        Ok(())
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        w.u64(self.width as u64);
        w.u64(self.depth as u64);
        w.u64(self.seed);
        w.u64(self.l1);
        for &c in &self.table {
            w.i64(c);
        }
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let width = r.u64()? as usize;
        let depth = r.u64()? as usize;
        let seed = r.u64()?;
        let l1 = r.u64()?;
        if width == 0 || depth == 0 {
            return Err(CodecError::Invalid("count-min dimensions".into()));
        }
        let cells = width.checked_mul(depth).ok_or(CodecError::Truncated)?;
        if cells.checked_mul(8).is_none_or(|b| b > r.remaining()) {
            return Err(CodecError::Truncated);
        }
        let mut cm = CountMin::with_dims(width, depth, seed);
        for c in cm.table.iter_mut() {
            *c = r.i64()?;
        }
        cm.l1 = l1;
        Ok(cm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn dimensions() {
        let cm = CountMin::new(E / 8.0, (-3.0f64).exp(), 0).unwrap();
        assert_eq!((cm.width(), cm.depth()), (8, 3));
        assert_eq!(CountMin::new(1.0, 0.5, 0).unwrap().width(), 3);
        assert!(CountMin::new(0.1, 0.0, 0).is_err());
        assert!(CountMin::new(0.0, 0.1, 0).is_err());
    }

    #[test]
    fn single_item_is_exact() {
        let mut cm = CountMin::new(0.1, 0.01, 42).unwrap();
        for _ in 0..10 {
            cm.update(5, 1);
        }
        assert_eq!(cm.estimate(5), 10);
    }

    #[test]
    fn cancellation() {
        let mut cm = CountMin::new(0.1, 0.01, 42).unwrap();
        cm.update(9, 3);
        cm.update(9, -3);
        assert_eq!(cm.estimate(9), 0);
        assert_eq!(cm.l1(), 6);
    }

    #[test]
    fn mersenne_reduction() {
        for x in [0u128, 1, MERSENNE_61 as u128, u64::MAX as u128, (u64::MAX as u128) << 60] {
            assert_eq!(mod_mersenne(x) as u128, x % MERSENNE_61 as u128);
        }
    }

    #[test]
    fn snapshot_is_bit_exact() {
        let mut cm = CountMin::new(0.2, 0.1, 7).unwrap();
        for i in 0..100 {
            cm.update(i % 13, if i % 3 == 0 { -1 } else { 2 });
        }
        let mut w = Writer::new();
        cm.encode(&mut w);
        let buf = w.into_inner();
        let back = CountMin::decode(&mut Reader::new(&buf)).unwrap();
        assert_eq!(back, cm);
    }

    proptest! {
        #[test]
        fn never_underestimates(items in proptest::collection::vec(0u64..1000, 0..500), seed: u64) {
            let mut cm = CountMin::with_dims(4, 2, seed);
            let mut exact: HashMap<u64, i64> = HashMap::new();
            for &x in &items {
                cm.update(x, 1);
                *exact.entry(x).or_default() += 1;
            }
            for (&k, &f) in &exact {
                prop_assert!(cm.estimate(k) >= f);
            }
        }

        #[test]
        fn linear_and_associative(
            a in proptest::collection::vec((0u64..100, -3i64..4), 0..100),
            b in proptest::collection::vec((0u64..100, -3i64..4), 0..100),
            c in proptest::collection::vec((0u64..100, -3i64..4), 0..100),
            seed: u64,
        ) {
            let build = |ups: &[(u64, i64)]| {
                let mut cm = CountMin::with_dims(7, 3, seed);
                for &(x, d) in ups { cm.update(x, d); }
                cm
            };
            let (sa, sb, sc) = (build(&a), build(&b), build(&c));
            let all: Vec<_> = a.iter().chain(&b).chain(&c).copied().collect();
            let whole = build(&all);
            let mut left = sa.clone();
            left.merge(&sb).unwrap();
            left.merge(&sc).unwrap();
            let mut right = sb.clone();
            right.merge(&sc).unwrap();
            let mut right2 = sa.clone();
            right2.merge(&right).unwrap();
            prop_assert_eq!(&left, &whole);
            prop_assert_eq!(&right2, &whole);
        }
    }
}

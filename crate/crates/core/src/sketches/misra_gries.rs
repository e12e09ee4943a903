use std::collections::HashMap;

use crate::codec::{CodecError, Reader, Writer};

use super::SketchError;

/// Misra-Gries frequent-items summary.
///
/// Holds at most `capacity` counters. Every estimate undercounts the true
/// frequency by at most `processed / (capacity + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisraGries {
    capacity: usize,
    counters: HashMap<u64, u64>,
    processed: u64,
    high_water: usize,
}

impl MisraGries {
    /// Capacity `⌈1/eps⌉ - 1`, at least 1.
    pub fn new(eps: f64) -> Result<Self, SketchError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(SketchError::Param(format!("eps must be in (0, 1], got {eps}")));
        }
        let k = ((1.0 / eps) - 1e-9).ceil() as usize;
        Ok(Self::with_capacity(k.saturating_sub(1).max(1)))
    }

    pub fn with_capacity(capacity: usize) -> Self {
        assert!(capacity >= 1, "capacity must be positive");
        MisraGries {
            capacity,
            counters: HashMap::with_capacity(capacity + 1),
            processed: 0,
            high_water: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Counters currently held.
    pub fn len(&self) -> usize {
        self.counters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }

    /// Most counters ever held at once.
    pub fn high_water(&self) -> usize {
        self.high_water
    }

    /// Worst-case undercount of any estimate so far.
    pub fn error_bound(&self) -> u64 {
        self.processed / (self.capacity as u64 + 1)
    }

    pub fn update(&mut self, item: u64) {
        self.processed += 1;
        if let Some(c) = self.counters.get_mut(&item) {
            *c += 1;
        } else if self.counters.len() < self.capacity {
            self.counters.insert(item, 1);
            self.high_water = self.high_water.max(self.counters.len());
        } else {
            self.counters.retain(|_, c| {
                *c -= 1;
                *c > 0
            });
        }
    }

    pub fn estimate(&self, item: u64) -> u64 {
        self.counters.get(&item).copied().unwrap_or(0)
    }

    /// Tracked items with their counts, ascending by item.
    pub fn items(&self) -> Vec<(u64, u64)> {
        let mut v: Vec<_> = self.counters.iter().map(|(&k, &c)| (k, c)).collect();
        v.sort_unstable();
        v
    }

    /// Folds `other` in. Counts are summed, then the `(capacity+1)`-th largest
    /// count is subtracted from all and non-positive counters are dropped, so
    /// the undercount stays within `processed / (capacity + 1)` of the union.
    pub fn merge(&mut self, other: &MisraGries) -> Result<(), SketchError> {
        if other.capacity != self.capacity {
            return Err(SketchError::Shape("Misra-Gries capacities differ".into()));
        }
        for (&k, &c) in &other.counters {
            *self.counters.entry(k).or_insert(0) += c;
        }
        self.processed += other.processed;
        if self.counters.len() > self.capacity {
            let mut counts: Vec<u64> = self.counters.values().copied().collect();
            counts.sort_unstable_by(|a, b| b.cmp(a));
            let cut = counts[self.capacity];
            self.counters.retain(|_, c| {
                *c = c.saturating_sub(cut);
                *c > 0
            });
        }
        self.high_water = self.high_water.max(other.high_water).max(self.counters.len());
        Ok(())
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        w.u64(self.capacity as u64);
        w.u64(self.processed);
        w.u64(self.high_water as u64);
        let items = self.items();
        w.u64(items.len() as u64);
        for (k, c) in items {
            w.u64(k);
            w.u64(c);
        }
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let capacity = r.u64()? as usize;
        let processed = r.u64()?;
        let high_water = r.u64()? as usize;
        let len = r.len(16)?;
        if capacity == 0 || len > capacity {
            return Err(CodecError::Invalid("Misra-Gries counters exceed capacity".into()));
        }
        let mut counters = HashMap::with_capacity(capacity + 1);
        for _ in 0..len {
            let k = r.u64()?;
            let c = r.u64()?;
            if c == 0 || counters.insert(k, c).is_some() {
                return Err(CodecError::Invalid("bad Misra-Gries counter".into()));
            }
        }
        Ok(MisraGries {
            capacity,
            counters,
            processed,
            high_water,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn capacities() {
        assert_eq!(MisraGries::new(0.5).unwrap().capacity(), 1);
        assert_eq!(MisraGries::new(0.01).unwrap().capacity(), 99);
        assert_eq!(MisraGries::new(1.0).unwrap().capacity(), 1);
        assert!(MisraGries::new(1.5).is_err());
        assert!(MisraGries::new(0.0).is_err());
    }

    #[test]
    fn hand_simulated_stream() {
        let mut s = MisraGries::new(0.5).unwrap();
        for x in [0, 0, 1, 2] {
            s.update(x);
        }
        // a=2 after two updates; b decrements to a=1; c decrements to empty
        assert!(s.is_empty());
        assert_eq!(s.estimate(0), 0);
        assert_eq!(s.error_bound(), 2);
    }

    #[test]
    fn single_item_exact() {
        let mut s = MisraGries::new(0.5).unwrap();
        for _ in 0..5 {
            s.update(7);
        }
        assert_eq!(s.estimate(7), 5);
        assert_eq!(s.estimate(8), 0);
        assert_eq!(MisraGries::new(0.1).unwrap().estimate(3), 0);
    }

    fn check_sandwich(s: &MisraGries, exact: &HashMap<u64, u64>) -> Result<(), TestCaseError> {
        for (&k, &f) in exact {
            let e = s.estimate(k);
            prop_assert!(e <= f);
            prop_assert!(f - e <= s.error_bound());
        }
        prop_assert!(s.len() <= s.capacity());
        Ok(())
    }

    proptest! {
        #[test]
        fn sandwich_on_every_prefix(items in proptest::collection::vec(0u64..20, 0..300), k in 1usize..8) {
            let mut s = MisraGries::with_capacity(k);
            let mut exact = HashMap::new();
            for x in items {
                s.update(x);
                *exact.entry(x).or_insert(0) += 1;
                check_sandwich(&s, &exact)?;
            }
        }

        #[test]
        fn merge_keeps_error_bound(
            a in proptest::collection::vec(0u64..15, 0..200),
            b in proptest::collection::vec(0u64..15, 0..200),
            k in 1usize..6,
        ) {
            let mut sa = MisraGries::with_capacity(k);
            let mut sb = MisraGries::with_capacity(k);
            let mut exact = HashMap::new();
            for &x in &a { sa.update(x); *exact.entry(x).or_insert(0) += 1; }
            for &x in &b { sb.update(x); *exact.entry(x).or_insert(0) += 1; }
            sa.merge(&sb).unwrap();
            prop_assert_eq!(sa.processed(), (a.len() + b.len()) as u64);
            check_sandwich(&sa, &exact)?;
        }

        #[test]
        fn snapshot_round_trip(items in proptest::collection::vec(0u64..50, 0..200)) {
            let mut s = MisraGries::with_capacity(5);
            for x in items { s.update(x); }
            let mut w = Writer::new();
            s.encode(&mut w);
            let buf = w.into_inner();
            let back = MisraGries::decode(&mut Reader::new(&buf)).unwrap();
            prop_assert_eq!(&back, &s);
            let mut w2 = Writer::new();
            back.encode(&mut w2);
            prop_assert_eq!(w2.into_inner(), buf);
        }
    }
}

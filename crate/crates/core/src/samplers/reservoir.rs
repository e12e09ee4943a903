use crate::codec::{CodecError, Reader, Writer};
use crate::rng::CountingRng;

use super::Delta;

/// Fixed-size uniform sample of a stream of unknown length.
///
/// While filling, each new item lands in a uniformly random slot and the
/// displaced occupant moves to the new last slot, so every slot, not just
/// the multiset, is uniform over the items seen.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir<T> {
    capacity: usize,
    slots: Vec<T>,
    seen: u64,
}

impl<T: Clone> Reservoir<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "reservoir capacity must be positive");
        Reservoir {
            capacity,
            slots: Vec::new(),
            seen: 0,
        }
    }

    /// Keeps everything; draws no randomness.
    pub fn unbounded() -> Self {
        Self::new(usize::MAX)
    }

    pub fn is_unbounded(&self) -> bool {
        self.capacity == usize::MAX
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[T] {
        &self.slots
    }

    pub fn offer(&mut self, item: T, rng: &mut CountingRng) -> Option<Delta<T>> {
        self.offer_with(rng, |_| item)
    }

    /// Like `offer`, but only builds the item if it is kept.
    pub fn offer_with(
        &mut self,
        rng: &mut CountingRng,
        make: impl FnOnce(&mut CountingRng) -> T,
    ) -> Option<Delta<T>> {
        let draw = self.draw_range().map(|r| rng.below(r));
        if !self.keeps(draw) {
            self.seen += 1;
            return None;
        }
        let item = make(rng);
        self.offer_drawn(item, draw)
    }

    /// Range `[0, r)` of the uniform draw the next offer makes, or `None`
    /// if it makes none.
    pub fn draw_range(&self) -> Option<u64> {
        if self.is_unbounded() {
            None
        } else if self.slots.len() < self.capacity {
            Some(self.slots.len() as u64 + 1)
        } else {
            Some(self.seen + 1)
        }
    }

    fn keeps(&self, draw: Option<u64>) -> bool {
        draw.is_none_or(|j| self.slots.len() < self.capacity || j < self.capacity as u64)
    }

    /// Offers the next item given the outcome `draw` of the uniform draw
    /// described by [`draw_range`](Self::draw_range).
    pub fn offer_drawn(&mut self, item: T, draw: Option<u64>) -> Option<Delta<T>> {
        self.seen += 1;
        let Some(j) = draw else {
            self.slots.push(item.clone());
            return Some(Delta::insert(self.slots.len() - 1, item));
        };
        let j = j as usize;
        if self.slots.len() < self.capacity {
            if j == self.slots.len() {
                self.slots.push(item.clone());
            } else {
                let moved = std::mem::replace(&mut self.slots[j], item.clone());
                self.slots.push(moved);
            }
            return Some(Delta::insert(j, item));
        }
        if j < self.capacity {
            let old = std::mem::replace(&mut self.slots[j], item.clone());
            Some(Delta {
                slot: j,
                inserted: Some(item),
                evicted: Some(old),
            })
        } else {
            None
        }
    }

    pub(crate) fn encode(&self, w: &mut Writer, enc: impl Fn(&T, &mut Writer)) {
        w.u64(self.capacity as u64);
        w.u64(self.seen);
        w.u64(self.slots.len() as u64);
        for s in &self.slots {
            enc(s, w);
        }
    }

    pub(crate) fn decode(
        r: &mut Reader<'_>,
        dec: impl Fn(&mut Reader<'_>) -> Result<T, CodecError>,
    ) -> Result<Self, CodecError> {
        let capacity = r.u64()?;
        let capacity = if capacity == u64::MAX {
            usize::MAX
        } else {
            capacity as usize
        };
        let seen = r.u64()?;
        let len = r.len(1)?;
        if capacity == 0 || len > capacity || len as u64 > seen {
            return Err(CodecError::Invalid("reservoir sizes".into()));
        }
        let slots = (0..len).map(|_| dec(r)).collect::<Result<_, _>>()?;
        Ok(Reservoir {
            capacity,
            slots,
            seen,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn fill_phase_never_evicts() {
        let mut rng = CountingRng::seed_from_u64(2);
        let mut r = Reservoir::new(5);
        for i in 0..5u32 {
            let d = r.offer(i, &mut rng).unwrap();
            assert_eq!(d.inserted, Some(i));
            assert_eq!(d.evicted, None);
        }
        let mut held = r.slots().to_vec();
        held.sort();
        assert_eq!(held, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn holds_whole_stream_when_large_enough() {
        let mut rng = CountingRng::seed_from_u64(2);
        let mut r = Reservoir::new(10);
        for i in 0..10u32 {
            r.offer(i, &mut rng);
        }
        assert_eq!(r.len(), 10);
        let mut u = Reservoir::unbounded();
        for i in 0..1000u32 {
            u.offer(i, &mut rng);
        }
        assert_eq!(u.slots(), (0..1000).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn replacement_rate_monte_carlo() {
        // the k-th offer is kept with probability l/k
        let (l, k, trials) = (3usize, 12u32, 40_000);
        let mut rng = CountingRng::seed_from_u64(8);
        let mut kept = 0;
        for _ in 0..trials {
            let mut r = Reservoir::new(l);
            for i in 1..k {
                r.offer(i, &mut rng);
            }
            kept += r.offer(k, &mut rng).is_some() as u32;
        }
        let rate = kept as f64 / trials as f64;
        assert!((rate - l as f64 / k as f64).abs() < 0.01, "rate {rate}");
    }

    proptest! {
        #[test]
        fn deltas_reproduce_contents(n in 1usize..200, l in 1usize..10, seed: u64) {
            let mut rng = CountingRng::seed_from_u64(seed);
            let mut r = Reservoir::new(l);
            let mut multiset: HashMap<usize, i32> = HashMap::new();
            for i in 0..n {
                if let Some(d) = r.offer(i, &mut rng) {
                    if let Some(x) = d.inserted { *multiset.entry(x).or_default() += 1; }
                    if let Some(x) = d.evicted { *multiset.entry(x).or_default() -= 1; }
                }
                let mut expect: HashMap<usize, i32> = HashMap::new();
                for &s in r.slots() { *expect.entry(s).or_default() += 1; }
                multiset.retain(|_, c| *c != 0);
                prop_assert_eq!(&multiset, &expect);
                prop_assert_eq!(r.len(), l.min(i + 1));
            }
        }

        #[test]
        fn snapshot_round_trip(n in 0usize..50, seed: u64) {
            let mut rng = CountingRng::seed_from_u64(seed);
            let mut r = Reservoir::new(4);
            for i in 0..n as u64 { r.offer(i, &mut rng); }
            let mut w = Writer::new();
            r.encode(&mut w, |v, w| w.u64(*v));
            let buf = w.into_inner();
            let back = Reservoir::decode(&mut Reader::new(&buf), |r| r.u64()).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}

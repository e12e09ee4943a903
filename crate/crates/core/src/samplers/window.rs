use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::codec::{CodecError, Reader, Writer};
use crate::rng::CountingRng;

use super::Delta;

#[derive(Debug, Clone, PartialEq)]
struct Slot<T> {
    /// Front is the current sample; the rest are successors waiting for it to expire.
    chain: VecDeque<(T, u64)>,
    next_select: u64,
    next_succ: Option<u64>,
}

impl<T> Slot<T> {
    fn next_event(&self, window: u64) -> u64 {
        let expiry = self.chain.front().map_or(u64::MAX, |&(_, p)| p + window);
        self.next_select
            .min(self.next_succ.unwrap_or(u64::MAX))
            .min(expiry)
    }
}

/// `ℓ` independent chain samplers over the last `N` items of a stream.
///
/// At position `i` each slot takes the new item with probability
/// `1/min(i, N)`, and pre-draws a successor position uniformly in
/// `(i, i + N - 1]`, so a sample is never replaced by the item that expires it. Successors are collected as they arrive and step in when
/// the sample leaves the window. Each slot only does work at its own event
/// positions (next selection, successor arrival, expiry), which are kept in
/// a heap.
#[derive(Debug, Clone)]
pub struct WindowSampler<T> {
    window: u64,
    slots: Vec<Slot<T>>,
    position: u64,
    heap: BinaryHeap<Reverse<(u64, usize)>>,
}

/// Position of the next selection after `i0` when position `i` selects
/// with probability `1/min(i, n)`.
fn next_selection(i0: u64, n: u64, rng: &mut CountingRng) -> u64 {
    if n == 1 || i0 == 0 {
        return i0 + 1;
    }
    let geometric = |u: f64| (u.ln() / (-1.0 / n as f64).ln_1p()).floor() as u64 + 1;
    let u = rng.open_unit_f64();
    if i0 < n {
        // no selection in (i0, j] has probability i0 / j while j <= n
        let j = (i0 as f64 / u).floor();
        if j < n as f64 {
            return j as u64 + 1;
        }
        let rest = (u * n as f64 / i0 as f64).min(1.0);
        return n + geometric(rest);
    }
    i0 + geometric(u)
}

fn successor(i: u64, n: u64, rng: &mut CountingRng) -> Option<u64> {
    (n > 1).then(|| i + 1 + rng.below(n - 1))
}

impl<T: Clone> WindowSampler<T> {
    pub fn new(slots: usize, window: u64) -> Self {
        assert!(slots >= 1 && window >= 1, "window sampler needs positive sizes");
        let slots: Vec<Slot<T>> = (0..slots)
            .map(|_| Slot {
                chain: VecDeque::new(),
                next_select: 1,
                next_succ: None,
            })
            .collect();
        let mut s = WindowSampler {
            window,
            slots,
            position: 0,
            heap: BinaryHeap::new(),
        };
        s.rebuild_heap();
        s
    }

    fn rebuild_heap(&mut self) {
        self.heap = self
            .slots
            .iter()
            .enumerate()
            .map(|(i, s)| Reverse((s.next_event(self.window), i)))
            .collect();
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    /// Items offered so far; the next item gets position `position() + 1`.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    /// Current sample of each slot with its stream position.
    pub fn samples(&self) -> impl Iterator<Item = Option<(&T, u64)>> + '_ {
        self.slots
            .iter()
            .map(|s| s.chain.front().map(|(t, p)| (t, *p)))
    }

    /// Items held, including waiting successors.
    pub fn stored(&self) -> usize {
        self.slots.iter().map(|s| s.chain.len()).sum()
    }

    pub fn offer(&mut self, item: T, rng: &mut CountingRng) -> Vec<Delta<T>> {
        self.offer_with(rng, |_| item.clone())
    }

    /// Offers the next item, building it with `make` once per slot that keeps it.
    pub fn offer_with(
        &mut self,
        rng: &mut CountingRng,
        mut make: impl FnMut(&mut CountingRng) -> T,
    ) -> Vec<Delta<T>> {
        self.position += 1;
        let i = self.position;
        let n = self.window;
        let mut deltas = Vec::new();
        while let Some(&Reverse((at, s))) = self.heap.peek() {
            if at > i {
                break;
            }
            self.heap.pop();
            let slot = &mut self.slots[s];
            if slot.next_event(n) != at {
                continue;
            }
            let mut evicted = None;
            let mut changed = false;
            if slot.next_select == i {
                let item = make(rng);
                evicted = slot.chain.pop_front().map(|(t, _)| t);
                slot.chain.clear();
                slot.chain.push_back((item, i));
                slot.next_succ = successor(i, n, rng);
                slot.next_select = next_selection(i, n, rng);
                changed = true;
            } else {
                if slot.next_succ == Some(i) {
                    let item = make(rng);
                    slot.chain.push_back((item, i));
                    slot.next_succ = successor(i, n, rng);
                }
                if slot.chain.front().is_some_and(|&(_, p)| p + n <= i) {
                    evicted = slot.chain.pop_front().map(|(t, _)| t);
                    changed = true;
                }
            }
            if changed {
                deltas.push(Delta {
                    slot: s,
                    inserted: slot.chain.front().map(|(t, _)| t.clone()),
                    evicted,
                });
            }
            let next = slot.next_event(n);
            self.heap.push(Reverse((next, s)));
        }
        deltas
    }

    pub(crate) fn encode(&self, w: &mut Writer, enc: impl Fn(&T, &mut Writer)) {
        w.u64(self.window);
        w.u64(self.position);
        w.u64(self.slots.len() as u64);
        for s in &self.slots {
            w.u64(s.next_select);
            w.u64(s.next_succ.unwrap_or(0));
            w.u64(s.chain.len() as u64);
            for (t, p) in &s.chain {
                w.u64(*p);
                enc(t, w);
            }
        }
    }

    pub(crate) fn decode(
        r: &mut Reader<'_>,
        dec: impl Fn(&mut Reader<'_>) -> Result<T, CodecError>,
    ) -> Result<Self, CodecError> {
        let window = r.u64()?;
        let position = r.u64()?;
        let n_slots = r.len(24)?;
        if window == 0 || n_slots == 0 {
            return Err(CodecError::Invalid("window sampler sizes".into()));
        }
        let mut slots = Vec::with_capacity(n_slots);
        for _ in 0..n_slots {
            let next_select = r.u64()?;
            let succ = r.u64()?;
            let len = r.len(8)?;
            let mut chain = VecDeque::with_capacity(len);
            for _ in 0..len {
                let p = r.u64()?;
                chain.push_back((dec(r)?, p));
            }
            if next_select <= position {
                return Err(CodecError::Invalid("stale window event".into()));
            }
            slots.push(Slot {
                chain,
                next_select,
                next_succ: (succ != 0).then_some(succ),
            });
        }
        let mut s = WindowSampler {
            window,
            slots,
            position,
            heap: BinaryHeap::new(),
        };
        s.rebuild_heap();
        Ok(s)
    }
}

impl<T: PartialEq> PartialEq for WindowSampler<T> {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window && self.position == other.position && self.slots == other.slots
    }
}

//! Bounded-memory frequency estimation.

mod count_min;
mod misra_gries;
mod morris;

pub use count_min::CountMin;
pub use misra_gries::MisraGries;
pub use morris::MorrisCounter;

use thiserror::Error;

use crate::codec::{CodecError, Reader, Writer};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SketchError {
    #[error("bad sketch parameter: {0}")]
    Param(String),
    #[error("incompatible sketches: {0}")]
    Shape(String),
    #[error("{0} does not accept negative updates")]
    Negative(&'static str),
}

/// Exact signed counts over a dense universe `[0, size)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseCounter {
    counts: Vec<i64>,
}

impl DenseCounter {
    pub fn new(size: usize) -> Self {
        DenseCounter {
            counts: vec![0; size],
        }
    }

    pub fn size(&self) -> usize {
        self.counts.len()
    }

    pub fn update(&mut self, item: u64, delta: i64) {
        self.counts[item as usize] += delta;
    }

    pub fn estimate(&self, item: u64) -> i64 {
        self.counts.get(item as usize).copied().unwrap_or(0)
    }

    fn encode(&self, w: &mut Writer) {
        w.u64(self.counts.len() as u64);
        for &c in &self.counts {
            w.i64(c);
        }
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let n = r.len(8)?;
        let counts = (0..n).map(|_| r.i64()).collect::<Result<_, _>>()?;
        Ok(DenseCounter { counts })
    }
}

const MAGIC: &[u8; 4] = b"SVSK";
const VERSION: u16 = 1;
const KIND_MG: u8 = 1;
const KIND_CM: u8 = 2;
const KIND_DENSE: u8 = 3;

/// One of the frequency backends, behind a common interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrequencySketch {
    MisraGries(MisraGries),
    CountMin(CountMin),
    Exact(DenseCounter),
}

impl FrequencySketch {
    /// Applies `delta` to `item`. Misra-Gries only takes non-negative deltas.
    pub fn update(&mut self, item: u64, delta: i64) -> Result<(), SketchError> {
        match self {
            FrequencySketch::MisraGries(s) => {
                if delta < 0 {
                    return Err(SketchError::Negative("Misra-Gries"));
                }
                for _ in 0..delta {
                    s.update(item);
                }
            }
            FrequencySketch::CountMin(s) => s.update(item, delta),
            FrequencySketch::Exact(s) => s.update(item, delta),
        }
        Ok(())
    }

    pub fn estimate(&self, item: u64) -> i64 {
        match self {
            FrequencySketch::MisraGries(s) => s.estimate(item) as i64,
            FrequencySketch::CountMin(s) => s.estimate(item),
            FrequencySketch::Exact(s) => s.estimate(item),
        }
    }

    /// Counters in use: the high-water mark for Misra-Gries, the full table otherwise.
    pub fn counters_used(&self) -> usize {
        match self {
            FrequencySketch::MisraGries(s) => s.high_water(),
            FrequencySketch::CountMin(s) => s.width() * s.depth(),
            FrequencySketch::Exact(s) => s.size(),
        }
    }

    /// Configured counter budget.
    pub fn counter_capacity(&self) -> usize {
        match self {
            FrequencySketch::MisraGries(s) => s.capacity(),
            FrequencySketch::CountMin(s) => s.width() * s.depth(),
            FrequencySketch::Exact(s) => s.size(),
        }
    }

    /// Rough storage cost in bits: a 64-bit count per counter plus the
    /// item id for Misra-Gries.
    pub fn bits_estimate(&self, universe: u64) -> u64 {
        let id_bits = 64 - universe.saturating_sub(1).leading_zeros() as u64;
        match self {
            FrequencySketch::MisraGries(s) => s.capacity() as u64 * (id_bits.max(1) + 64),
            _ => self.counter_capacity() as u64 * 64,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FrequencySketch::MisraGries(_) => "misra-gries",
            FrequencySketch::CountMin(_) => "count-min",
            FrequencySketch::Exact(_) => "exact",
        }
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        match self {
            FrequencySketch::MisraGries(s) => {
                w.u8(KIND_MG);
                s.encode(w)
            }
            FrequencySketch::CountMin(s) => {
                w.u8(KIND_CM);
                s.encode(w)
            }
            FrequencySketch::Exact(s) => {
                w.u8(KIND_DENSE);
                s.encode(w)
            }
        }
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        match r.u8()? {
            KIND_MG => Ok(FrequencySketch::MisraGries(MisraGries::decode(r)?)),
            KIND_CM => Ok(FrequencySketch::CountMin(CountMin::decode(r)?)),
            KIND_DENSE => Ok(FrequencySketch::Exact(DenseCounter::decode(r)?)),
            k => Err(CodecError::Kind(k)),
        }
    }

    /// Standalone snapshot: magic, version, then kind, parameters and counters.
    pub fn snapshot(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        self.encode(&mut w);
        w.into_inner()
    }

    pub fn restore(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        if r.bytes(4).map_err(|_| CodecError::BadMagic)? != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let v = r.u16()?;
        if v != VERSION {
            return Err(CodecError::Version(v));
        }
        let s = Self::decode(&mut r)?;
        r.finish()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshots_round_trip() {
        let mut mg = FrequencySketch::MisraGries(MisraGries::with_capacity(3));
        let mut cm = FrequencySketch::CountMin(CountMin::with_dims(5, 2, 99));
        let mut ex = FrequencySketch::Exact(DenseCounter::new(10));
        for i in 0..40u64 {
            mg.update(i % 7, 1).unwrap();
            cm.update(i % 7, if i % 2 == 0 { 1 } else { -1 }).unwrap();
            ex.update(i % 10, 2).unwrap();
        }
        for s in [mg, cm, ex] {
            let bytes = s.snapshot();
            let back = FrequencySketch::restore(&bytes).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.snapshot(), bytes);
        }
    }

    #[test]
    fn restore_rejects_garbage() {
        assert_eq!(FrequencySketch::restore(b"XXXX\x01\x00\x01"), Err(CodecError::BadMagic));
        let mut bytes = FrequencySketch::Exact(DenseCounter::new(2)).snapshot();
        bytes.push(0);
        assert_eq!(FrequencySketch::restore(&bytes), Err(CodecError::Trailing));
        let empty = FrequencySketch::MisraGries(MisraGries::with_capacity(2)).snapshot();
        assert!(FrequencySketch::restore(&empty[..empty.len() - 1]).is_err());
    }

    #[test]
    fn misra_gries_rejects_deletions() {
        let mut mg = FrequencySketch::MisraGries(MisraGries::with_capacity(3));
        assert!(mg.update(1, -1).is_err());
    }
}

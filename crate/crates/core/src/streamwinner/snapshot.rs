//! Binary encoding of estimator state.

use crate::codec::{CodecError, Reader, Writer};
use crate::rules::Rule;
use crate::votes::{CandidateId, Sign, Vote};

use super::config::{Capacity, Mode, StreamConfig, Storage};
use super::SampledVote;

pub(super) const MAGIC: &[u8; 4] = b"SVES";
pub(super) const VERSION: u16 = 1;

pub(super) fn encode_vote(v: &Vote, w: &mut Writer) {
    match v {
        Vote::Ranking(o) => {
            w.u8(0);
            w.u64(o.len() as u64);
            o.iter().for_each(|c| w.u32(c.0));
        }
        Vote::Approval(s) => {
            w.u8(1);
            w.u64(s.len() as u64);
            s.iter().for_each(|c| w.u32(c.0));
        }
        Vote::Plurality(c) => {
            w.u8(2);
            w.u32(c.0);
        }
        Vote::GenPlurality(c, s) => {
            w.u8(3);
            w.u32(c.0);
            w.bool(*s == Sign::Approve);
        }
    }
}

pub(super) fn decode_vote(r: &mut Reader<'_>, m: usize) -> Result<Vote, CodecError> {
    let ids = |r: &mut Reader<'_>| -> Result<Vec<CandidateId>, CodecError> {
        let n = r.len(4)?;
        (0..n).map(|_| r.u32().map(CandidateId)).collect()
    };
    let v = match r.u8()? {
        0 => Vote::Ranking(ids(r)?),
        1 => Vote::Approval(ids(r)?.into_iter().collect()),
        2 => Vote::Plurality(CandidateId(r.u32()?)),
        3 => {
            let c = CandidateId(r.u32()?);
            let sign = if r.bool()? {
                Sign::Approve
            } else {
                Sign::Disapprove
            };
            Vote::GenPlurality(c, sign)
        }
        k => return Err(CodecError::Invalid(format!("vote tag {k}"))),
    };
    v.validate(m)
        .map_err(|e| CodecError::Invalid(format!("stored vote: {e}")))?;
    Ok(v)
}

pub(super) fn encode_sampled(s: &SampledVote, w: &mut Writer) {
    encode_vote(&s.vote, w);
    w.u32(s.pick.unwrap_or(u32::MAX));
}

pub(super) fn decode_sampled(r: &mut Reader<'_>, m: usize) -> Result<SampledVote, CodecError> {
    let vote = decode_vote(r, m)?;
    let pick = r.u32()?;
    Ok(SampledVote {
        vote,
        pick: (pick != u32::MAX).then_some(pick),
    })
}

pub(super) fn encode_config(c: &StreamConfig, w: &mut Writer) {
    w.len_prefixed(c.rule.to_string().as_bytes());
    w.u64(c.m as u64);
    w.f64(c.eps);
    w.f64(c.delta);
    match c.mode {
        Mode::KnownN { n_lo, n_hi } => {
            w.u8(0);
            w.u64(n_lo);
            w.u64(n_hi);
        }
        Mode::UnknownN => w.u8(1),
        Mode::SlidingWindow(n) => {
            w.u8(2);
            w.u64(n);
        }
    }
    w.u64(c.seed);
    w.f64(c.sample_constant);
    w.bool(c.rate.is_some());
    w.f64(c.rate.unwrap_or(0.0));
    w.u8(match c.capacity {
        Capacity::Auto => 0,
        Capacity::Max => 1,
    });
    w.u8(match c.storage {
        Storage::Auto => 0,
        Storage::Sketch => 1,
        Storage::StoreSamples => 2,
    });
    w.bool(c.approximate_count);
}

pub(super) fn decode_config(r: &mut Reader<'_>) -> Result<StreamConfig, CodecError> {
    let rule_text = std::str::from_utf8(r.len_prefixed()?)
        .map_err(|_| CodecError::Invalid("rule name".into()))?;
    let rule: Rule = rule_text
        .parse()
        .map_err(|e| CodecError::Invalid(format!("rule: {e}")))?;
    let m = r.u64()? as usize;
    let eps = r.f64()?;
    let delta = r.f64()?;
    let mode = match r.u8()? {
        0 => Mode::KnownN {
            n_lo: r.u64()?,
            n_hi: r.u64()?,
        },
        1 => Mode::UnknownN,
        2 => Mode::SlidingWindow(r.u64()?),
        k => return Err(CodecError::Invalid(format!("mode tag {k}"))),
    };
    let seed = r.u64()?;
    let sample_constant = r.f64()?;
    let has_rate = r.bool()?;
    let rate = r.f64()?;
    let capacity = match r.u8()? {
        0 => Capacity::Auto,
        1 => Capacity::Max,
        k => return Err(CodecError::Invalid(format!("capacity tag {k}"))),
    };
    let storage = match r.u8()? {
        0 => Storage::Auto,
        1 => Storage::Sketch,
        2 => Storage::StoreSamples,
        k => return Err(CodecError::Invalid(format!("storage tag {k}"))),
    };
    let approximate_count = r.bool()?;
    let config = StreamConfig {
        rule,
        m,
        eps,
        delta,
        mode,
        seed,
        sample_constant,
        rate: has_rate.then_some(rate),
        capacity,
        storage,
        approximate_count,
    };
    config
        .validate()
        .map_err(|e| CodecError::Invalid(e.to_string()))?;
    Ok(config)
}

use std::fmt;
use std::str::FromStr;

use crate::rules::Rule;

use super::budget::DEFAULT_SAMPLE_CONSTANT;
use super::EstimatorError;

/// What the estimator knows about the stream length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `n` lies in `[n_lo, n_hi]`.
    KnownN { n_lo: u64, n_hi: u64 },
    UnknownN,
    /// Only the last `N` votes count.
    SlidingWindow(u64),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::KnownN { n_lo, n_hi } => write!(f, "known:{n_lo},{n_hi}"),
            Mode::UnknownN => f.write_str("unknown"),
            Mode::SlidingWindow(n) => write!(f, "window:{n}"),
        }
    }
}

impl FromStr for Mode {
    type Err = EstimatorError;

    /// `known:<lo>,<hi>`, `unknown`, or `window:<N>` (`window=<N>` also accepted).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EstimatorError::Config(format!("bad mode `{s}`"));
        if s == "unknown" {
            return Ok(Mode::UnknownN);
        }
        if let Some(rest) = s.strip_prefix("known:") {
            let (lo, hi) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(Mode::KnownN {
                n_lo: lo.trim().parse().map_err(|_| bad())?,
                n_hi: hi.trim().parse().map_err(|_| bad())?,
            });
        }
        if let Some(rest) = s.strip_prefix("window:").or_else(|| s.strip_prefix("window=")) {
            return Ok(Mode::SlidingWindow(rest.trim().parse().map_err(|_| bad())?));
        }
        Err(bad())
    }
}

/// Counter budget for the frequency backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    /// Sized from ε and δ.
    Auto,
    /// One exact counter per item of the derived universe.
    Max,
}

/// Whether Condorcet-style rules sketch derived items or keep whole votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    /// Whichever needs fewer bits.
    Auto,
    Sketch,
    StoreSamples,
}

/// Parameters of one streaming estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub rule: Rule,
    pub m: usize,
    pub eps: f64,
    pub delta: f64,
    pub mode: Mode,
    pub seed: u64,
    pub sample_constant: f64,
    /// Forces the sampling rate. In unknown-n mode only a rate of 1 is
    /// meaningful and keeps every vote.
    pub rate: Option<f64>,
    pub capacity: Capacity,
    pub storage: Storage,
    /// Track the unknown stream length with a Morris counter instead of an exact one.
    pub approximate_count: bool,
}

impl StreamConfig {
    pub fn new(rule: Rule, m: usize, eps: f64, delta: f64, mode: Mode) -> Self {
        StreamConfig {
            rule,
            m,
            eps,
            delta,
            mode,
            seed: 0,
            sample_constant: DEFAULT_SAMPLE_CONSTANT,
            rate: None,
            capacity: Capacity::Auto,
            storage: Storage::Auto,
            approximate_count: false,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rate(mut self, rate: f64) -> Self {
        self.rate = Some(rate);
        self
    }

    pub fn capacity(mut self, capacity: Capacity) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn storage(mut self, storage: Storage) -> Self {
        self.storage = storage;
        self
    }

    pub fn sample_constant(mut self, c: f64) -> Self {
        self.sample_constant = c;
        self
    }

    pub fn approximate_count(mut self, on: bool) -> Self {
        self.approximate_count = on;
        self
    }

    /// Rate 1 and exact counters: the estimator then reproduces the exact winner.
    pub fn exact(self) -> Self {
        self.rate(1.0).capacity(Capacity::Max)
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        let cfg = |msg: String| Err(EstimatorError::Config(msg));
        self.rule
            .validate(self.m)
            .map_err(|e| EstimatorError::Config(e.to_string()))?;
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return cfg(format!("eps must be in (0, 1), got {}", self.eps));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return cfg(format!("delta must be in (0, 1), got {}", self.delta));
        }
        if !(self.sample_constant > 0.0 && self.sample_constant.is_finite()) {
            return cfg(format!("sample constant must be positive, got {}", self.sample_constant));
        }
        match self.mode {
            Mode::KnownN { n_lo, n_hi } if n_lo < 1 || n_lo > n_hi => {
                return cfg(format!("need 1 <= n_lo <= n_hi, got {n_lo}..{n_hi}"));
            }
            Mode::SlidingWindow(0) => return cfg("window must be at least 1".into()),
            _ => {}
        }
        if let Some(r) = self.rate {
            match self.mode {
                Mode::KnownN { .. } if !(r > 0.0 && r <= 1.0) => {
                    return cfg(format!("rate must be in (0, 1], got {r}"));
                }
                Mode::UnknownN if r != 1.0 => {
                    return cfg("unknown-n mode only supports --rate 1".into());
                }
                Mode::SlidingWindow(_) => {
                    return cfg("window mode does not take a sampling rate".into());
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!(
            "known:10,20".parse::<Mode>().unwrap(),
            Mode::KnownN { n_lo: 10, n_hi: 20 }
        );
        assert_eq!("unknown".parse::<Mode>().unwrap(), Mode::UnknownN);
        assert_eq!("window:5".parse::<Mode>().unwrap(), Mode::SlidingWindow(5));
        assert_eq!("window=5".parse::<Mode>().unwrap(), Mode::SlidingWindow(5));
        assert!("known:10".parse::<Mode>().is_err());
        for m in [Mode::KnownN { n_lo: 1, n_hi: 2 }, Mode::UnknownN, Mode::SlidingWindow(9)] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
    }

    #[test]
    fn validation() {
        let ok = StreamConfig::new(Rule::Plurality, 5, 0.1, 0.1, Mode::UnknownN);
        assert!(ok.validate().is_ok());
        assert!(StreamConfig { eps: 0.0, ..ok.clone() }.validate().is_err());
        assert!(StreamConfig { delta: 1.0, ..ok.clone() }.validate().is_err());
        assert!(ok.clone().rate(0.5).validate().is_err());
        assert!(ok.clone().rate(1.0).validate().is_ok());
        let known = StreamConfig::new(Rule::Plurality, 5, 0.1, 0.1, Mode::KnownN { n_lo: 5, n_hi: 4 });
        assert!(known.validate().is_err());
        let k = StreamConfig::new(Rule::KApproval(5), 5, 0.1, 0.1, Mode::UnknownN);
        assert!(k.validate().is_err());
        let w = StreamConfig::new(Rule::Plurality, 5, 0.1, 0.1, Mode::SlidingWindow(0));
        assert!(w.validate().is_err());
    }
}

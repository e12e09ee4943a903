//! Candidates, ballots and profiles, plus the line-oriented vote file format.
//!
//! A vote file starts with a header line
//!
//! ```text
//! m=<int> kind=<ranking|approval|plurality|genplurality> [n_lo=<int> n_hi=<int>] [names=a,b,...]
//! ```
//!
//! followed by one vote per line. Blank lines and lines starting with `#`
//! are ignored, so a generator can drop a `# handoff` marker between the
//! two halves of a stream without affecting readers.

use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

/// Dense candidate identifier in `[0, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(pub u32);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for CandidateId {
    fn from(v: u32) -> Self {
        CandidateId(v)
    }
}

impl From<usize> for CandidateId {
    fn from(v: usize) -> Self {
        CandidateId(v as u32)
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Approve (`+`) or disapprove (`-`) in a generalized-plurality ballot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Approve,
    Disapprove,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Approve => 1,
            Sign::Disapprove => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VoteKind {
    Ranking,
    Approval,
    Plurality,
    GenPlurality,
}

impl VoteKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VoteKind::Ranking => "ranking",
            VoteKind::Approval => "approval",
            VoteKind::Plurality => "plurality",
            VoteKind::GenPlurality => "genplurality",
        }
    }
}

impl fmt::Display for VoteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VoteKind {
    type Err = VoteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ranking" => Ok(VoteKind::Ranking),
            "approval" => Ok(VoteKind::Approval),
            "plurality" => Ok(VoteKind::Plurality),
            "genplurality" => Ok(VoteKind::GenPlurality),
            other => Err(VoteError::Header(format!("unknown vote kind `{other}`"))),
        }
    }
}

/// One ballot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Vote {
    /// Complete order, most preferred first.
    Ranking(Vec<CandidateId>),
    Approval(BTreeSet<CandidateId>),
    Plurality(CandidateId),
    GenPlurality(CandidateId, Sign),
}

impl Vote {
    pub fn kind(&self) -> VoteKind {
        match self {
            Vote::Ranking(_) => VoteKind::Ranking,
            Vote::Approval(_) => VoteKind::Approval,
            Vote::Plurality(_) => VoteKind::Plurality,
            Vote::GenPlurality(..) => VoteKind::GenPlurality,
        }
    }

    pub fn ranking<I: IntoIterator<Item = u32>>(ids: I) -> Vote {
        Vote::Ranking(ids.into_iter().map(CandidateId).collect())
    }

    pub fn approval<I: IntoIterator<Item = u32>>(ids: I) -> Vote {
        Vote::Approval(ids.into_iter().map(CandidateId).collect())
    }

    /// Checks the vote against a candidate count.
    pub fn validate(&self, m: usize) -> Result<(), VoteError> {
        let check = |c: CandidateId| {
            if c.index() < m {
                Ok(())
            } else {
                Err(VoteError::OutOfRange { id: c.0, m })
            }
        };
        match self {
            Vote::Ranking(order) => {
                if order.len() != m {
                    return Err(VoteError::NotPermutation(format!(
                        "ranking has {} entries, expected {m}",
                        order.len()
                    )));
                }
                let mut seen = vec![false; m];
                for &c in order {
                    check(c)?;
                    if std::mem::replace(&mut seen[c.index()], true) {
                        return Err(VoteError::Duplicate(c.0));
                    }
                }
                Ok(())
            }
            Vote::Approval(set) => set.iter().try_for_each(|&c| check(c)),
            Vote::Plurality(c) | Vote::GenPlurality(c, _) => check(*c),
        }
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_vote(self))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VoteError {
    #[error("malformed vote `{0}`")]
    Syntax(String),
    #[error("candidate {id} out of range for m={m}")]
    OutOfRange { id: u32, m: usize },
    #[error("duplicate candidate {0}")]
    Duplicate(u32),
    #[error("ranking is not a permutation: {0}")]
    NotPermutation(String),
    #[error("expected a {expected} vote, got {got}")]
    WrongKind { expected: VoteKind, got: VoteKind },
    #[error("bad header: {0}")]
    Header(String),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<VoteError>,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("mixed vote kinds in one profile")]
    MixedKinds,
}

/// First line of a vote file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub m: usize,
    pub kind: VoteKind,
    /// Known bounds `(lower, upper)` on the number of votes.
    pub n_hint: Option<(u64, u64)>,
    pub names: Option<Vec<String>>,
}

impl StreamHeader {
    pub fn new(m: usize, kind: VoteKind) -> Self {
        StreamHeader {
            m,
            kind,
            n_hint: None,
            names: None,
        }
    }

    pub fn with_n_hint(mut self, lo: u64, hi: u64) -> Self {
        self.n_hint = Some((lo, hi));
        self
    }

    pub fn validate(&self) -> Result<(), VoteError> {
        if self.m == 0 {
            return Err(VoteError::Header("m must be at least 1".into()));
        }
        if let Some((lo, hi)) = self.n_hint {
            if lo < 1 || lo > hi {
                return Err(VoteError::Header(format!(
                    "need 1 <= n_lo <= n_hi, got n_lo={lo} n_hi={hi}"
                )));
            }
        }
        if let Some(names) = &self.names {
            if names.len() != self.m {
                return Err(VoteError::Header(format!(
                    "{} names for m={}",
                    names.len(),
                    self.m
                )));
            }
        }
        Ok(())
    }

    pub fn parse(line: &str) -> Result<Self, VoteError> {
        let mut m = None;
        let mut kind = None;
        let mut n_lo = None;
        let mut n_hi = None;
        let mut names = None;
        for tok in line.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| VoteError::Header(format!("expected key=value, got `{tok}`")))?;
            let int = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| VoteError::Header(format!("bad integer for {key}: `{v}`")))
            };
            match key {
                "m" => m = Some(int(val)? as usize),
                "kind" => kind = Some(val.parse()?),
                "n_lo" => n_lo = Some(int(val)?),
                "n_hi" => n_hi = Some(int(val)?),
                "names" => names = Some(val.split(',').map(str::to_owned).collect()),
                other => return Err(VoteError::Header(format!("unknown key `{other}`"))),
            }
        }
        let n_hint = match (n_lo, n_hi) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            _ => return Err(VoteError::Header("n_lo and n_hi must appear together".into())),
        };
        let header = StreamHeader {
            m: m.ok_or_else(|| VoteError::Header("missing m".into()))?,
            kind: kind.ok_or_else(|| VoteError::Header("missing kind".into()))?,
            n_hint,
            names,
        };
        header.validate()?;
        Ok(header)
    }
}

impl fmt::Display for StreamHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} kind={}", self.m, self.kind)?;
        if let Some((lo, hi)) = self.n_hint {
            write!(f, " n_lo={lo} n_hi={hi}")?;
        }
        if let Some(names) = &self.names {
            write!(f, " names={}", names.join(","))?;
        }
        Ok(())
    }
}

fn parse_id(s: &str, line: &str) -> Result<CandidateId, VoteError> {
    s.trim()
        .parse::<u32>()
        .map(CandidateId)
        .map_err(|_| VoteError::Syntax(line.to_owned()))
}

/// Decodes one vote line according to the header's kind.
pub fn parse_vote(line: &str, header: &StreamHeader) -> Result<Vote, VoteError> {
    let s = line.trim();
    if s.is_empty() {
        return Err(VoteError::Syntax(line.to_owned()));
    }
    let found = if s.starts_with('{') {
        VoteKind::Approval
    } else if s.starts_with('+') || s.starts_with('-') {
        VoteKind::GenPlurality
    } else if s.contains('>') {
        VoteKind::Ranking
    } else {
        // A bare id is a plurality vote, or a ranking when m = 1.
        match header.kind {
            VoteKind::Ranking if header.m == 1 => VoteKind::Ranking,
            _ => VoteKind::Plurality,
        }
    };
    if found != header.kind {
        return Err(VoteError::WrongKind {
            expected: header.kind,
            got: found,
        });
    }
    let vote = match found {
        VoteKind::Ranking => {
            let order = s
                .split('>')
                .map(|p| parse_id(p, line))
                .collect::<Result<Vec<_>, _>>()?;
            Vote::Ranking(order)
        }
        VoteKind::Approval => {
            let inner = s
                .strip_prefix('{')
                .and_then(|r| r.strip_suffix('}'))
                .ok_or_else(|| VoteError::Syntax(line.to_owned()))?;
            let mut set = BTreeSet::new();
            if !inner.trim().is_empty() {
                for part in inner.split(',') {
                    let c = parse_id(part, line)?;
                    if !set.insert(c) {
                        return Err(VoteError::Duplicate(c.0));
                    }
                }
            }
            Vote::Approval(set)
        }
        VoteKind::Plurality => Vote::Plurality(parse_id(s, line)?),
        VoteKind::GenPlurality => {
            let sign = if s.starts_with('+') {
                Sign::Approve
            } else {
                Sign::Disapprove
            };
            Vote::GenPlurality(parse_id(&s[1..], line)?, sign)
        }
    };
    vote.validate(header.m)?;
    Ok(vote)
}

/// Canonical text form of a vote. Approval sets are written in ascending order.
pub fn format_vote(v: &Vote) -> String {
    fn join<'a, I: Iterator<Item = &'a CandidateId>>(it: I, sep: &str) -> String {
        it.map(|c| c.0.to_string()).collect::<Vec<_>>().join(sep)
    }
    match v {
        Vote::Ranking(order) => join(order.iter(), ">"),
        Vote::Approval(set) => format!("{{{}}}", join(set.iter(), ",")),
        Vote::Plurality(c) => c.0.to_string(),
        Vote::GenPlurality(c, Sign::Approve) => format!("+{}", c.0),
        Vote::GenPlurality(c, Sign::Disapprove) => format!("-{}", c.0),
    }
}

/// Every valid vote of `kind` over `m` candidates, in a fixed order.
///
/// Rankings come out in lexicographic order. The result has `m!`, `2^m`,
/// `m` or `2m` entries, so keep `m` small.
pub fn all_votes(kind: VoteKind, m: usize) -> Vec<Vote> {
    match kind {
        VoteKind::Ranking => {
            let mut out = Vec::new();
            let mut perm: Vec<u32> = (0..m as u32).collect();
            loop {
                out.push(Vote::ranking(perm.iter().copied()));
                // next lexicographic permutation
                let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
                    break;
                };
                let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
                perm.swap(i - 1, j);
                perm[i..].reverse();
            }
            out
        }
        VoteKind::Approval => (0u64..1 << m)
            .map(|mask| Vote::approval((0..m as u32).filter(|b| mask >> b & 1 == 1)))
            .collect(),
        VoteKind::Plurality => (0..m as u32).map(|c| Vote::Plurality(CandidateId(c))).collect(),
        VoteKind::GenPlurality => (0..m as u32)
            .flat_map(|c| {
                [Sign::Approve, Sign::Disapprove]
                    .map(|s| Vote::GenPlurality(CandidateId(c), s))
            })
            .collect(),
    }
}

/// A complete election: every vote, all of one kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionProfile {
    m: usize,
    kind: VoteKind,
    votes: Vec<Vote>,
}

impl ElectionProfile {
    pub fn new(m: usize, kind: VoteKind, votes: Vec<Vote>) -> Result<Self, VoteError> {
        if m == 0 {
            return Err(VoteError::Header("m must be at least 1".into()));
        }
        for v in &votes {
            if v.kind() != kind {
                return Err(VoteError::MixedKinds);
            }
            v.validate(m)?;
        }
        Ok(ElectionProfile { m, kind, votes })
    }

    /// Builds a profile, taking the kind from the first vote.
    pub fn from_votes(m: usize, votes: Vec<Vote>) -> Result<Self, VoteError> {
        let kind = votes.first().map(Vote::kind).ok_or_else(|| {
            VoteError::Header("cannot infer the vote kind of an empty profile".into())
        })?;
        Self::new(m, kind, votes)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    pub fn kind(&self) -> VoteKind {
        self.kind
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }

    pub fn push(&mut self, v: Vote) -> Result<(), VoteError> {
        if v.kind() != self.kind {
            return Err(VoteError::WrongKind {
                expected: self.kind,
                got: v.kind(),
            });
        }
        v.validate(self.m)?;
        self.votes.push(v);
        Ok(())
    }

    pub fn header(&self) -> StreamHeader {
        StreamHeader::new(self.m, self.kind)
    }
}

/// Streaming reader over a vote file. The header is read eagerly.
pub struct VoteReader<R> {
    inner: R,
    header: StreamHeader,
    line_no: usize,
    buf: String,
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

impl<R: BufRead> VoteReader<R> {
    pub fn new(mut inner: R) -> Result<Self, VoteError> {
        let mut buf = String::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            let read = inner
                .read_line(&mut buf)
                .map_err(|e| VoteError::Io(e.to_string()))?;
            if read == 0 {
                return Err(VoteError::Header("missing header line".into()));
            }
            line_no += 1;
            if !is_skippable(&buf) {
                break;
            }
        }
        let header = StreamHeader::parse(buf.trim()).map_err(|e| VoteError::AtLine {
            line: line_no,
            source: Box::new(e),
        })?;
        Ok(VoteReader {
            inner,
            header,
            line_no,
            buf,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// Reads the remaining votes into a profile.
    pub fn into_profile(self) -> Result<(StreamHeader, ElectionProfile), VoteError> {
        let header = self.header.clone();
        let votes = self.collect::<Result<Vec<_>, _>>()?;
        let profile = ElectionProfile {
            m: header.m,
            kind: header.kind,
            votes,
        };
        Ok((header, profile))
    }
}

impl<R: BufRead> Iterator for VoteReader<R> {
    type Item = Result<Vote, VoteError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(VoteError::Io(e.to_string()))),
            }
            self.line_no += 1;
            if is_skippable(&self.buf) {
                continue;
            }
            let line = self.line_no;
            return Some(
                parse_vote(&self.buf, &self.header).map_err(|e| VoteError::AtLine {
                    line,
                    source: Box::new(e),
                }),
            );
        }
    }
}

/// Writes a header and votes in the file format; `handoff` inserts a
/// `# handoff` marker before the vote at that index.
pub fn write_votes<W: std::io::Write>(
    mut out: W,
    header: &StreamHeader,
    votes: &[Vote],
    handoff: Option<usize>,
) -> std::io::Result<()> {
    writeln!(out, "{header}")?;
    for (i, v) in votes.iter().enumerate() {
        if handoff == Some(i) {
            writeln!(out, "# handoff")?;
        }
        writeln!(out, "{}", format_vote(v))?;
    }
    if handoff == Some(votes.len()) {
        writeln!(out, "# handoff")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hdr(m: usize, kind: VoteKind) -> StreamHeader {
        StreamHeader::new(m, kind)
    }

    #[test]
    fn parses_ranking() {
        let v = parse_vote("2>0>1", &hdr(3, VoteKind::Ranking)).unwrap();
        assert_eq!(v, Vote::ranking([2, 0, 1]));
    }

    #[test]
    fn parses_approval() {
        let v = parse_vote("{0,2}", &hdr(3, VoteKind::Approval)).unwrap();
        assert_eq!(v, Vote::approval([0, 2]));
        let empty = parse_vote("{}", &hdr(3, VoteKind::Approval)).unwrap();
        assert_eq!(empty, Vote::approval([]));
    }

    #[test]
    fn rejects_duplicate_in_ranking() {
        let err = parse_vote("1>1>0", &hdr(3, VoteKind::Ranking)).unwrap_err();
        assert_eq!(err, VoteError::Duplicate(1));
        assert!(parse_vote("{1,1}", &hdr(3, VoteKind::Approval)).is_err());
    }

    #[test]
    fn rejects_bad_rankings() {
        let h = hdr(3, VoteKind::Ranking);
        assert!(matches!(
            parse_vote("0>1", &h),
            Err(VoteError::NotPermutation(_))
        ));
        assert!(matches!(
            parse_vote("0>1>3", &h),
            Err(VoteError::OutOfRange { id: 3, m: 3 })
        ));
        assert!(matches!(parse_vote("0>x>1", &h), Err(VoteError::Syntax(_))));
        assert!(matches!(
            parse_vote("{0}", &h),
            Err(VoteError::WrongKind { .. })
        ));
    }

    #[test]
    fn plurality_and_genplurality() {
        assert_eq!(
            parse_vote("4", &hdr(5, VoteKind::Plurality)).unwrap(),
            Vote::Plurality(CandidateId(4))
        );
        assert_eq!(
            parse_vote("-4", &hdr(5, VoteKind::GenPlurality)).unwrap(),
            Vote::GenPlurality(CandidateId(4), Sign::Disapprove)
        );
        assert!(parse_vote("+5", &hdr(5, VoteKind::GenPlurality)).is_err());
        assert!(parse_vote("3", &hdr(5, VoteKind::GenPlurality)).is_err());
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(format_vote(&Vote::ranking([0, 1, 2])), "0>1>2");
        assert_eq!(
            format_vote(&Vote::GenPlurality(CandidateId(4), Sign::Disapprove)),
            "-4"
        );
        assert_eq!(format_vote(&Vote::approval([])), "{}");
        assert_eq!(format_vote(&Vote::approval([2, 0])), "{0,2}");
    }

    #[test]
    fn header_round_trip() {
        let h = StreamHeader::new(4, VoteKind::Ranking).with_n_hint(10, 20);
        assert_eq!(StreamHeader::parse(&h.to_string()).unwrap(), h);
        assert!(StreamHeader::parse("m=3 kind=ranking n_lo=5 n_hi=4").is_err());
        assert!(StreamHeader::parse("m=3 kind=ranking n_lo=0 n_hi=4").is_err());
        assert!(StreamHeader::parse("m=3").is_err());
        assert!(StreamHeader::parse("m=2 kind=plurality names=a,b").is_ok());
        assert!(StreamHeader::parse("m=2 kind=plurality names=a").is_err());
    }

    #[test]
    fn reader_skips_comments_and_marker() {
        let text = "# a comment\nm=3 kind=ranking\n0>1>2\n# handoff\n\n2>1>0\n";
        let (header, profile) = VoteReader::new(text.as_bytes())
            .unwrap()
            .into_profile()
            .unwrap();
        assert_eq!(header.m, 3);
        assert_eq!(profile.n(), 2);
        assert_eq!(profile.votes()[1], Vote::ranking([2, 1, 0]));
    }

    #[test]
    fn reader_reports_line_numbers() {
        let text = "m=3 kind=ranking\n0>1>2\n0>0>2\n";
        let err = VoteReader::new(text.as_bytes())
            .unwrap()
            .into_profile()
            .unwrap_err();
        assert!(matches!(err, VoteError::AtLine { line: 3, .. }));
    }

    #[test]
    fn write_then_read() {
        let votes = vec![Vote::ranking([1, 0]), Vote::ranking([0, 1])];
        let mut buf = Vec::new();
        write_votes(&mut buf, &hdr(2, VoteKind::Ranking), &votes, Some(1)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "m=2 kind=ranking\n1>0\n# handoff\n0>1\n");
        let (_, p) = VoteReader::new(text.as_bytes()).unwrap().into_profile().unwrap();
        assert_eq!(p.votes(), &votes[..]);
    }

    #[test]
    fn enumerates_all_votes() {
        let r = all_votes(VoteKind::Ranking, 4);
        assert_eq!(r.len(), 24);
        assert_eq!(r[0], Vote::ranking([0, 1, 2, 3]));
        assert_eq!(r[23], Vote::ranking([3, 2, 1, 0]));
        let distinct: std::collections::HashSet<_> = r.iter().collect();
        assert_eq!(distinct.len(), 24);
        assert_eq!(all_votes(VoteKind::Approval, 3).len(), 8);
        assert_eq!(all_votes(VoteKind::GenPlurality, 3).len(), 6);
        assert_eq!(all_votes(VoteKind::Ranking, 1), vec![Vote::ranking([0])]);
    }

    fn any_vote(m: usize) -> BoxedStrategy<(VoteKind, Vote)> {
        let ids = 0..m as u32;
        prop_oneof![
            Just((0..m as u32).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|o| (VoteKind::Ranking, Vote::ranking(o))),
            proptest::collection::btree_set(ids.clone(), 0..=m)
                .prop_map(|s| (VoteKind::Approval, Vote::approval(s))),
            ids.clone()
                .prop_map(|c| (VoteKind::Plurality, Vote::Plurality(CandidateId(c)))),
            (ids, any::<bool>()).prop_map(|(c, pos)| {
                let sign = if pos { Sign::Approve } else { Sign::Disapprove };
                (VoteKind::GenPlurality, Vote::GenPlurality(CandidateId(c), sign))
            }),
        ]
        .boxed()
    }

    proptest! {
        #[test]
        fn format_parse_round_trip((m, (kind, v)) in (2usize..12).prop_flat_map(|m| (Just(m), any_vote(m)))) {
            let back = parse_vote(&format_vote(&v), &hdr(m, kind)).unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn non_permutations_rejected(order in proptest::collection::vec(0u32..5, 5)) {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            let is_perm = sorted == vec![0, 1, 2, 3, 4];
            let line = order.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(">");
            prop_assert_eq!(parse_vote(&line, &hdr(5, VoteKind::Ranking)).is_ok(), is_perm);
        }
    }
}

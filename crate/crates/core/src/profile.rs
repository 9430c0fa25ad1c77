//! Ballots, profiles and candidate sets.
//!
//! Candidates are dense indices `0..m`. Sets of candidates are bitmasks, which
//! caps elections at [`MAX_CANDIDATES`] candidates.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported candidate count (one bit per candidate in a `u128`).
pub const MAX_CANDIDATES: usize = 128;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateId(pub u8);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn new(index: usize) -> Result<Self> {
        if index >= MAX_CANDIDATES {
            return Err(Error::CandidateOutOfRange {
                candidate: index,
                m: MAX_CANDIDATES,
            });
        }
        Ok(CandidateId(index as u8))
    }
}

impl fmt::Debug for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of candidates, one bit per candidate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CandidateSet(u128);

impl CandidateSet {
    pub const EMPTY: CandidateSet = CandidateSet(0);

    /// `{0, 1, ..., m-1}`.
    pub fn full(m: usize) -> Self {
        debug_assert!(m <= MAX_CANDIDATES);
        if m == MAX_CANDIDATES {
            CandidateSet(u128::MAX)
        } else {
            CandidateSet((1u128 << m) - 1)
        }
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn contains(self, c: CandidateId) -> bool {
        self.0 >> c.0 & 1 == 1
    }

    pub fn insert(&mut self, c: CandidateId) {
        self.0 |= 1u128 << c.0;
    }

    pub fn remove(&mut self, c: CandidateId) {
        self.0 &= !(1u128 << c.0);
    }

    pub fn without(mut self, c: CandidateId) -> Self {
        self.remove(c);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = CandidateId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(CandidateId(i as u8))
        })
    }
}

impl FromIterator<CandidateId> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = CandidateId>>(iter: I) -> Self {
        let mut s = CandidateSet::EMPTY;
        for c in iter {
            s.insert(c);
        }
        s
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A strict total order over all candidates, cast by `weight` identical voters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ballot {
    ranking: Vec<CandidateId>,
    weight: u64,
}

impl Ballot {
    /// Validates that `ranking` is a permutation of `0..m` and `weight >= 1`.
    pub fn new(ranking: Vec<CandidateId>, weight: u64) -> Result<Self> {
        validate_ranking(&ranking, ranking.len())?;
        if weight == 0 {
            return Err(Error::InvalidBallot("weight must be positive".into()));
        }
        Ok(Ballot { ranking, weight })
    }

    /// Convenience constructor from raw indices.
    pub fn from_indices(indices: &[usize], weight: u64) -> Result<Self> {
        let ranking = indices
            .iter()
            .map(|&i| CandidateId::new(i))
            .collect::<Result<Vec<_>>>()?;
        Ballot::new(ranking, weight)
    }

    pub(crate) fn new_unchecked(ranking: Vec<CandidateId>, weight: u64) -> Self {
        Ballot { ranking, weight }
    }

    pub fn ranking(&self) -> &[CandidateId] {
        &self.ranking
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn with_weight(&self, weight: u64) -> Result<Self> {
        Ballot::new(self.ranking.clone(), weight)
    }

    /// First candidate of the ranking that is still in `remaining`.
    pub fn top_among(&self, remaining: CandidateSet) -> Result<CandidateId> {
        self.ranking
            .iter()
            .copied()
            .find(|&c| remaining.contains(c))
            .ok_or(Error::NoRemainingCandidates)
    }
}

/// Checks that `ranking` lists each of `0..m` exactly once.
pub fn validate_ranking(ranking: &[CandidateId], m: usize) -> Result<()> {
    if m == 0 || m > MAX_CANDIDATES {
        return Err(Error::CandidateCount(m));
    }
    if ranking.len() != m {
        return Err(Error::InvalidBallot(format!(
            "ranking has {} entries, expected {m}",
            ranking.len()
        )));
    }
    let mut seen = CandidateSet::EMPTY;
    for &c in ranking {
        if c.index() >= m {
            return Err(Error::CandidateOutOfRange {
                candidate: c.index(),
                m,
            });
        }
        if seen.contains(c) {
            return Err(Error::InvalidBallot(format!("duplicate candidate {c}")));
        }
        seen.insert(c);
    }
    Ok(())
}

/// A multiset of weighted ballots over `m` candidates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    m: usize,
    ballots: Vec<Ballot>,
}

impl Profile {
    pub fn new(m: usize, ballots: Vec<Ballot>) -> Result<Self> {
        if m == 0 || m > MAX_CANDIDATES {
            return Err(Error::CandidateCount(m));
        }
        for b in &ballots {
            if b.ranking.len() != m {
                return Err(Error::InvalidBallot(format!(
                    "ballot ranks {} candidates in a {m}-candidate profile",
                    b.ranking.len()
                )));
            }
        }
        Ok(Profile { m, ballots })
    }

    pub fn empty(m: usize) -> Result<Self> {
        Profile::new(m, Vec::new())
    }

    pub(crate) fn new_unchecked(m: usize, ballots: Vec<Ballot>) -> Self {
        Profile { m, ballots }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn candidates(&self) -> CandidateSet {
        CandidateSet::full(self.m)
    }

    pub fn total_weight(&self) -> u64 {
        self.ballots.iter().map(|b| b.weight).sum()
    }

    /// Number of ballot lines (not voters).
    pub fn len(&self) -> usize {
        self.ballots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ballots.is_empty()
    }

    pub fn push(&mut self, ballot: Ballot) -> Result<()> {
        if ballot.ranking.len() != self.m {
            return Err(Error::InvalidBallot(format!(
                "ballot ranks {} candidates in a {}-candidate profile",
                ballot.ranking.len(),
                self.m
            )));
        }
        self.ballots.push(ballot);
        Ok(())
    }

    pub(crate) fn pop(&mut self) -> Option<Ballot> {
        self.ballots.pop()
    }

    /// Merges identical rankings into single weighted ballots, keeping the
    /// order of first appearance. STV outcomes are unchanged.
    pub fn aggregated(&self) -> Profile {
        let mut index: std::collections::HashMap<&[CandidateId], usize> = Default::default();
        let mut out: Vec<Ballot> = Vec::new();
        for b in &self.ballots {
            match index.get(b.ranking()) {
                Some(&i) => out[i].weight += b.weight,
                None => {
                    index.insert(b.ranking(), out.len());
                    out.push(b.clone());
                }
            }
        }
        Profile {
            m: self.m,
            ballots: out,
        }
    }

    /// Splits every weighted ballot into weight-1 ballots.
    pub fn expanded(&self) -> Profile {
        let ballots = self
            .ballots
            .iter()
            .flat_map(|b| {
                std::iter::repeat_n(
                    Ballot::new_unchecked(b.ranking.clone(), 1),
                    b.weight as usize,
                )
            })
            .collect();
        Profile { m: self.m, ballots }
    }
}

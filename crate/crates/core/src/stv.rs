//! Single-winner STV (instant runoff) with a full round trace.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::profile::{CandidateId, CandidateSet, Profile};
use crate::seed::splitmix64;

/// How to pick the eliminated candidate among several tied at the minimum.
///
/// Both variants are fixed orders over candidates, so the choice depends only
/// on which candidates are tied, never on the history of the count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum TieRule {
    /// Eliminate the tied candidate with the largest index.
    #[default]
    MaxIndex,
    /// Eliminate the tied candidate whose seeded hash is largest.
    SeededRandom(u64),
}

impl TieRule {
    /// Among tied candidates, the one with the largest key is eliminated.
    #[inline]
    pub fn key(self, c: CandidateId) -> u64 {
        match self {
            TieRule::MaxIndex => c.0 as u64,
            // low byte keeps keys distinct
            TieRule::SeededRandom(seed) => {
                (splitmix64(seed ^ splitmix64(c.0 as u64)) & !0xff) | c.0 as u64
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundAction {
    Eliminated(CandidateId),
    Winner(CandidateId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    pub remaining: CandidateSet,
    pub tallies: BTreeMap<CandidateId, u64>,
    pub action: RoundAction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionOutcome {
    pub winner: CandidateId,
    pub rounds: Vec<RoundRecord>,
}

/// First-preference weight of each remaining candidate, transferring ballots
/// past eliminated candidates.
pub fn tally(profile: &Profile, remaining: CandidateSet) -> Result<BTreeMap<CandidateId, u64>> {
    let dense = tally_dense(profile, remaining)?;
    Ok(remaining.iter().map(|c| (c, dense[c.index()])).collect())
}

pub(crate) fn tally_dense(profile: &Profile, remaining: CandidateSet) -> Result<Vec<u64>> {
    if remaining.is_empty() {
        return Err(Error::NoRemainingCandidates);
    }
    let mut out = vec![0u64; profile.m()];
    for b in profile.ballots() {
        let top = b.top_among(remaining)?;
        out[top.index()] += b.weight();
    }
    Ok(out)
}

/// Candidate to eliminate given per-candidate tallies.
pub fn eliminate_choice(
    tallies: &BTreeMap<CandidateId, u64>,
    tie_rule: TieRule,
) -> Result<CandidateId> {
    tallies
        .iter()
        .min_by_key(|(&c, &t)| (t, std::cmp::Reverse(tie_rule.key(c))))
        .map(|(&c, _)| c)
        .ok_or(Error::NoRemainingCandidates)
}

/// Dense variant of [`eliminate_choice`]; `remaining` must be nonempty.
#[inline]
pub(crate) fn eliminate_dense(
    tallies: &[u64],
    remaining: CandidateSet,
    tie_rule: TieRule,
) -> CandidateId {
    let mut best = None::<(u64, u64, CandidateId)>;
    for c in remaining.iter() {
        let t = tallies[c.index()];
        let k = tie_rule.key(c);
        match best {
            Some((bt, bk, _)) if t > bt || (t == bt && k < bk) => {}
            _ => best = Some((t, k, c)),
        }
    }
    best.expect("remaining is nonempty").2
}

/// Runs the count to completion.
pub fn stv_winner(profile: &Profile, tie_rule: TieRule) -> Result<ElectionOutcome> {
    let total = profile.total_weight();
    if total == 0 {
        return Err(Error::EmptyElection);
    }
    let mut remaining = profile.candidates();
    let mut rounds = Vec::new();
    loop {
        let tallies = tally(profile, remaining)?;
        let leader = tallies
            .iter()
            .max_by_key(|(_, &t)| t)
            .map(|(&c, &t)| (c, t));
        let (leader, lead) = leader.expect("remaining is nonempty");
        if 2 * lead > total || remaining.len() == 1 {
            rounds.push(RoundRecord {
                remaining,
                tallies,
                action: RoundAction::Winner(leader),
            });
            return Ok(ElectionOutcome {
                winner: leader,
                rounds,
            });
        }
        let out = eliminate_choice(&tallies, tie_rule)?;
        rounds.push(RoundRecord {
            remaining,
            tallies,
            action: RoundAction::Eliminated(out),
        });
        remaining.remove(out);
    }
}

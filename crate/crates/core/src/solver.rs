//! Single-manipulator STV search.
//!
//! The manipulator's ballot only matters through the candidate it currently
//! supports (the *holder*: its top choice among the survivors). A search
//! state is therefore the set of remaining candidates plus the holder, and
//! the count from one state onward is deterministic until the holder is
//! eliminated. States in which the preferred candidate has been eliminated are
//! never created.
//!
//! Two strategies are provided:
//!
//! * [`Strategy::EveryHolder`] (default) commits a holder at the root and
//!   after every holder elimination, branching over every surviving
//!   candidate, the preferred candidate first and then in ascending tally
//!   order.
//! * [`Strategy::Deferred`] leaves the holder uncommitted while the
//!   manipulator's weight cannot change which candidate goes out. In each
//!   round of an uncommitted state the only choices that matter are "support
//!   the candidate about to be eliminated" and "support anyone else", so a
//!   round has at most two successors.
//!
//! Both are complete: a `NotManipulable` verdict is a proof that no ballot of
//! the given weight elects the preferred candidate. Visited states are
//! memoized; a state's future depends only on its key, and the remaining set
//! shrinks every round, so a revisited key has already been fully explored.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::profile::{validate_ranking, Ballot, CandidateId, CandidateSet, Profile};
use crate::stv::{stv_winner, TieRule};

/// Largest candidate count [`brute_force_manipulate`] accepts by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 7;

/// A manipulator of weight `weight` wants `preferred` to win against the
/// `fixed` votes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManipulationInstance {
    fixed: Profile,
    weight: u64,
    preferred: CandidateId,
    tie_rule: TieRule,
}

impl ManipulationInstance {
    pub fn new(
        fixed: Profile,
        weight: u64,
        preferred: CandidateId,
        tie_rule: TieRule,
    ) -> Result<Self> {
        if preferred.index() >= fixed.m() {
            return Err(Error::CandidateOutOfRange {
                candidate: preferred.index(),
                m: fixed.m(),
            });
        }
        Ok(ManipulationInstance {
            fixed,
            weight,
            preferred,
            tie_rule,
        })
    }

    pub fn fixed(&self) -> &Profile {
        &self.fixed
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn preferred(&self) -> CandidateId {
        self.preferred
    }

    pub fn tie_rule(&self) -> TieRule {
        self.tie_rule
    }

    pub fn m(&self) -> usize {
        self.fixed.m()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Manipulable,
    NotManipulable,
    /// A node or time limit was hit before the question was settled.
    LimitExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub decision: Decision,
    /// A full ranking that elects the preferred candidate; present iff the
    /// decision is `Manipulable`.
    pub witness: Option<Vec<CandidateId>>,
    pub nodes: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl SearchLimits {
    pub const NONE: SearchLimits = SearchLimits {
        max_nodes: None,
        max_time: None,
    };

    pub fn nodes(max_nodes: u64) -> Self {
        SearchLimits {
            max_nodes: Some(max_nodes),
            max_time: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strategy {
    #[default]
    EveryHolder,
    Deferred,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub strategy: Strategy,
    pub memoize: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            strategy: Strategy::EveryHolder,
            memoize: true,
        }
    }
}

/// Decides whether some ballot of the instance's weight makes the preferred
/// candidate win, using the default strategy.
pub fn manipulate_single(
    instance: &ManipulationInstance,
    limits: SearchLimits,
) -> Result<SearchResult> {
    manipulate_with(instance, limits, SearchOptions::default())
}

pub fn manipulate_with(
    instance: &ManipulationInstance,
    limits: SearchLimits,
    options: SearchOptions,
) -> Result<SearchResult> {
    let start = Instant::now();
    let m = instance.m();
    let p = instance.preferred;

    if instance.weight == 0 {
        let outcome = stv_winner(&instance.fixed, instance.tie_rule)?;
        let decision = if outcome.winner == p {
            Decision::Manipulable
        } else {
            Decision::NotManipulable
        };
        let witness = (decision == Decision::Manipulable).then(|| complete_witness(&[p], m));
        return Ok(SearchResult {
            decision,
            witness,
            nodes: 1,
            elapsed: start.elapsed(),
        });
    }

    let mut search = Search::new(instance, limits, options, start);
    let root = Counter::new(&search.table, m);
    let found = match options.strategy {
        Strategy::Deferred => search.expand(root, None),
        Strategy::EveryHolder => search.branch_all(root),
    };
    let (decision, witness) = match found {
        Flow::Found => (
            Decision::Manipulable,
            Some(complete_witness(&search.path, m)),
        ),
        Flow::Exhausted => (Decision::NotManipulable, None),
        Flow::Aborted => (Decision::LimitExceeded, None),
    };
    Ok(SearchResult {
        decision,
        witness,
        nodes: search.nodes,
        elapsed: start.elapsed(),
    })
}

/// `prefix` followed by every other candidate in ascending index order.
fn complete_witness(prefix: &[CandidateId], m: usize) -> Vec<CandidateId> {
    let mut unused = CandidateSet::full(m);
    for &c in prefix {
        unused.remove(c);
    }
    prefix.iter().copied().chain(unused.iter()).collect()
}

/// Recounts with the witness added and checks that the preferred candidate
/// wins.
pub fn verify_witness(instance: &ManipulationInstance, witness: &[CandidateId]) -> Result<bool> {
    validate_ranking(witness, instance.m())?;
    let winner = if instance.weight == 0 {
        stv_winner(&instance.fixed, instance.tie_rule)?.winner
    } else {
        let mut profile = instance.fixed.clone();
        profile.push(Ballot::new(witness.to_vec(), instance.weight)?)?;
        stv_winner(&profile, instance.tie_rule)?.winner
    };
    Ok(winner == instance.preferred)
}

/// Tries every one of the m! manipulator ballots in lexicographic order.
/// `nodes` is the number of elections counted.
pub fn brute_force_manipulate(instance: &ManipulationInstance) -> Result<SearchResult> {
    brute_force_with_cap(instance, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_with_cap(instance: &ManipulationInstance, cap: usize) -> Result<SearchResult> {
    let m = instance.m();
    if m > cap {
        return Err(Error::EnumerationCap { m, cap });
    }
    let start = Instant::now();
    let mut profile = instance.fixed.clone();
    let mut ranking: Vec<CandidateId> = (0..m).map(|i| CandidateId(i as u8)).collect();
    let mut nodes = 0;
    loop {
        nodes += 1;
        let winner = if instance.weight == 0 {
            stv_winner(&instance.fixed, instance.tie_rule)?.winner
        } else {
            profile.push(Ballot::new_unchecked(ranking.clone(), instance.weight))?;
            let w = stv_winner(&profile, instance.tie_rule);
            profile.pop();
            w?.winner
        };
        if winner == instance.preferred {
            return Ok(SearchResult {
                decision: Decision::Manipulable,
                witness: Some(ranking),
                nodes,
                elapsed: start.elapsed(),
            });
        }
        if !next_permutation(&mut ranking) {
            return Ok(SearchResult {
                decision: Decision::NotManipulable,
                witness: None,
                nodes,
                elapsed: start.elapsed(),
            });
        }
    }
}

fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v
        .iter()
        .rposition(|x| *x > v[i])
        .expect("pivot has a larger successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Every candidate the manipulator can make win.
pub fn winnable_set(
    fixed: &Profile,
    weight: u64,
    tie_rule: TieRule,
    limits: SearchLimits,
) -> Result<CandidateSet> {
    let mut out = CandidateSet::EMPTY;
    for p in fixed.candidates().iter() {
        let instance = ManipulationInstance::new(fixed.clone(), weight, p, tie_rule)?;
        match manipulate_single(&instance, limits)?.decision {
            Decision::Manipulable => out.insert(p),
            Decision::NotManipulable => {}
            Decision::LimitExceeded => {
                return Err(Error::InvalidArgument(format!(
                    "search limit exceeded for candidate {p}"
                )))
            }
        }
    }
    Ok(out)
}

/// Fixed ballots in flat form: `rankings[i * m + k]` is ballot `i`'s k-th choice.
struct BallotTable {
    m: usize,
    rankings: Vec<u8>,
    weights: Vec<u64>,
}

impl BallotTable {
    fn new(profile: &Profile) -> Self {
        let agg = profile.aggregated();
        let mut rankings = Vec::with_capacity(agg.len() * agg.m());
        let mut weights = Vec::with_capacity(agg.len());
        for b in agg.ballots() {
            rankings.extend(b.ranking().iter().map(|c| c.0));
            weights.push(b.weight());
        }
        BallotTable {
            m: agg.m(),
            rankings,
            weights,
        }
    }
}

/// Incremental count of the fixed ballots over a shrinking candidate set.
#[derive(Clone)]
struct Counter {
    remaining: CandidateSet,
    tallies: Vec<u64>,
    /// Position of each ballot's current top choice in its ranking.
    pos: Vec<u8>,
}

impl Counter {
    fn new(table: &BallotTable, m: usize) -> Self {
        let mut tallies = vec![0; m];
        for (i, &w) in table.weights.iter().enumerate() {
            tallies[table.rankings[i * table.m] as usize] += w;
        }
        Counter {
            remaining: CandidateSet::full(m),
            tallies,
            pos: vec![0; table.weights.len()],
        }
    }

    fn eliminate(&mut self, table: &BallotTable, out: CandidateId) {
        self.remaining.remove(out);
        self.tallies[out.index()] = 0;
        if self.remaining.is_empty() {
            return;
        }
        let m = table.m;
        for (i, pos) in self.pos.iter_mut().enumerate() {
            let row = &table.rankings[i * m..(i + 1) * m];
            if row[*pos as usize] != out.0 {
                continue;
            }
            let mut k = *pos as usize + 1;
            while !self.remaining.contains(CandidateId(row[k])) {
                k += 1;
            }
            *pos = k as u8;
            self.tallies[row[k] as usize] += table.weights[i];
        }
    }
}

enum Flow {
    Found,
    Exhausted,
    Aborted,
}

/// Result of one round of the count given who holds the manipulator's weight.
enum Round {
    Winner(CandidateId),
    Eliminate(CandidateId),
}

struct Search {
    table: BallotTable,
    weight: u64,
    total: u64,
    preferred: CandidateId,
    tie_rule: TieRule,
    limits: SearchLimits,
    start: Instant,
    memo: Option<HashSet<(u128, u8)>>,
    nodes: u64,
    /// Holders committed along the current path, in ballot order.
    path: Vec<CandidateId>,
}

const UNCOMMITTED: u8 = u8::MAX;

impl Search {
    fn new(
        instance: &ManipulationInstance,
        limits: SearchLimits,
        options: SearchOptions,
        start: Instant,
    ) -> Self {
        let table = BallotTable::new(&instance.fixed);
        Search {
            table,
            weight: instance.weight,
            total: instance.fixed.total_weight() + instance.weight,
            preferred: instance.preferred,
            tie_rule: instance.tie_rule,
            limits,
            start,
            memo: options.memoize.then(HashSet::new),
            nodes: 0,
            path: Vec::new(),
        }
    }

    fn over_limit(&self) -> bool {
        if let Some(max) = self.limits.max_nodes {
            if self.nodes > max {
                return true;
            }
        }
        if let Some(max) = self.limits.max_time {
            if self.start.elapsed() > max {
                return true;
            }
        }
        false
    }

    /// True if the state was seen before.
    fn seen(&mut self, remaining: CandidateSet, holder: Option<CandidateId>) -> bool {
        match &mut self.memo {
            Some(memo) => !memo.insert((remaining.bits(), holder.map_or(UNCOMMITTED, |h| h.0))),
            None => false,
        }
    }

    /// One round of the count with the manipulator's weight on `holder`.
    fn round(&self, counter: &Counter, holder: CandidateId) -> Round {
        let tallies = &counter.tallies;
        let w = self.weight;
        let mut best_hi: Option<(u64, CandidateId)> = None;
        let mut best_lo: Option<(u64, u64, CandidateId)> = None;
        for c in counter.remaining.iter() {
            let t = tallies[c.index()] + if c == holder { w } else { 0 };
            if best_hi.is_none_or(|(bt, _)| t > bt) {
                best_hi = Some((t, c));
            }
            let k = self.tie_rule.key(c);
            match best_lo {
                Some((bt, bk, _)) if t > bt || (t == bt && k < bk) => {}
                _ => best_lo = Some((t, k, c)),
            }
        }
        let (hi, leader) = best_hi.expect("remaining is nonempty");
        if 2 * hi > self.total || counter.remaining.len() == 1 {
            Round::Winner(leader)
        } else {
            Round::Eliminate(best_lo.expect("remaining is nonempty").2)
        }
    }

    /// Expands one node. `holder == None` means no holder is committed yet
    /// (deferred strategy only).
    fn expand(&mut self, mut counter: Counter, mut holder: Option<CandidateId>) -> Flow {
        self.nodes += 1;
        if self.over_limit() {
            return Flow::Aborted;
        }
        let p = self.preferred;
        loop {
            if self.seen(counter.remaining, holder) {
                return Flow::Exhausted;
            }
            match holder {
                Some(h) => match self.round(&counter, h) {
                    Round::Winner(c) => return if c == p { Flow::Found } else { Flow::Exhausted },
                    Round::Eliminate(x) if x == p => return Flow::Exhausted,
                    Round::Eliminate(x) => {
                        counter.eliminate(&self.table, x);
                        if x == h {
                            holder = None;
                        }
                    }
                },
                None => {
                    // Weight on p first: if that wins outright we are done.
                    match self.round(&counter, p) {
                        Round::Winner(c) if c == p => {
                            self.path.push(p);
                            return Flow::Found;
                        }
                        // Someone holds a majority wherever the weight goes.
                        Round::Winner(_) => return Flow::Exhausted,
                        Round::Eliminate(_) => {}
                    }
                    let low = crate::stv::eliminate_dense(
                        &counter.tallies,
                        counter.remaining,
                        self.tie_rule,
                    );
                    // Weight anywhere but `low`: `low` goes out (its rivals
                    // only gain), and the holder stays open.
                    let rest = (low != p).then(|| {
                        let mut c = counter.clone();
                        c.eliminate(&self.table, low);
                        c
                    });
                    // Weight on `low`: either it still goes out (same as
                    // above) or someone else does and `low` is committed.
                    let saved = match self.round(&counter, low) {
                        Round::Eliminate(x) if x != low && x != p => {
                            let mut c = counter.clone();
                            c.eliminate(&self.table, x);
                            Some(c)
                        }
                        _ => None,
                    };
                    match (rest, saved) {
                        (None, None) => return Flow::Exhausted,
                        (Some(r), None) => counter = r,
                        (None, Some(s)) => {
                            self.path.push(low);
                            counter = s;
                            holder = Some(low);
                        }
                        (Some(r), Some(s)) => {
                            let mark = self.path.len();
                            match self.expand(r, None) {
                                Flow::Exhausted => self.path.truncate(mark),
                                done => return done,
                            }
                            self.path.push(low);
                            match self.expand(s, Some(low)) {
                                Flow::Exhausted => self.path.truncate(mark),
                                done => return done,
                            }
                            return Flow::Exhausted;
                        }
                    }
                }
            }
        }
    }

    /// Every-holder strategy: commit each surviving candidate in turn, then
    /// count until the holder goes out and branch again.
    fn branch_all(&mut self, counter: Counter) -> Flow {
        let p = self.preferred;
        let mut order: Vec<CandidateId> = counter.remaining.iter().collect();
        // p first, then ascending tally.
        order.sort_by_key(|&c| (c != p, counter.tallies[c.index()], c));
        let mark = self.path.len();
        for c in order {
            self.path.push(c);
            match self.run_holder(counter.clone(), c) {
                Flow::Exhausted => self.path.truncate(mark),
                done => return done,
            }
        }
        Flow::Exhausted
    }

    fn run_holder(&mut self, mut counter: Counter, h: CandidateId) -> Flow {
        self.nodes += 1;
        if self.over_limit() {
            return Flow::Aborted;
        }
        let p = self.preferred;
        loop {
            if self.seen(counter.remaining, Some(h)) {
                return Flow::Exhausted;
            }
            match self.round(&counter, h) {
                Round::Winner(c) => return if c == p { Flow::Found } else { Flow::Exhausted },
                Round::Eliminate(x) if x == p => return Flow::Exhausted,
                Round::Eliminate(x) => {
                    counter.eliminate(&self.table, x);
                    if x == h {
                        return self.branch_all(counter);
                    }
                }
            }
        }
    }
}

//! Vote profile generators: Impartial Culture, the Pólya-Eggenberger urn, and
//! resampling of a base profile to other voter and candidate counts.

use std::fmt;
use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::profile::{Ballot, CandidateId, Profile, MAX_CANDIDATES};
use crate::seed::RngSeed;

/// Urn correlation normalized by the number of possible votes: an urn
/// started with all m! orders receives `b * m!` extra copies of each drawn
/// vote.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct UrnParam(f64);

impl UrnParam {
    pub fn new(b: f64) -> Result<Self> {
        if !b.is_finite() || b < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "urn parameter must be finite and >= 0, got {b}"
            )));
        }
        Ok(UrnParam(b))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A profile to resample from, with a short description of where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseProfile {
    pub profile: Profile,
    pub label: String,
}

impl BaseProfile {
    pub fn new(profile: Profile, label: impl Into<String>) -> Self {
        BaseProfile {
            profile,
            label: label.into(),
        }
    }

    /// 10 voters over 32 candidates, drawn by Impartial Culture from a fixed
    /// seed. Stands in for a small committee ranking many alternatives.
    pub fn nasa_shape() -> Self {
        let profile = ic_sample(32, 10, &mut RngSeed(0x4e41_5341).rng());
        BaseProfile::new(
            profile,
            "nasa-shape: 10 voters x 32 candidates (synthetic, IC seed 0x4e415341)",
        )
    }

    /// 10 voters over 3 candidates, drawn by Impartial Culture from a fixed seed.
    pub fn hiring_shape() -> Self {
        let profile = ic_sample(3, 10, &mut RngSeed(0x4849_5245).rng());
        BaseProfile::new(
            profile,
            "hiring-shape: 10 voters x 3 candidates (synthetic, IC seed 0x48495245)",
        )
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "nasa" | "nasa-shape" => Some(BaseProfile::nasa_shape()),
            "hiring" | "hiring-shape" => Some(BaseProfile::hiring_shape()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Ic,
    Urn(UrnParam),
    Resample(Arc<BaseProfile>),
}

impl Distribution {
    /// Short name used in CSV output and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Ic => "ic",
            Distribution::Urn(_) => "urn",
            Distribution::Resample(_) => "resample",
        }
    }

    /// Urn parameter, or 0 for the other distributions.
    pub fn b_param(&self) -> f64 {
        match self {
            Distribution::Urn(b) => b.value(),
            _ => 0.0,
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Distribution::Ic => write!(f, "ic"),
            Distribution::Urn(b) => write!(f, "urn(b={})", b.value()),
            Distribution::Resample(base) => write!(f, "resample({})", base.label),
        }
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 || m > MAX_CANDIDATES {
        return Err(Error::CandidateCount(m));
    }
    Ok(())
}

fn uniform_ranking<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<CandidateId> {
    let mut r: Vec<CandidateId> = (0..m).map(|i| CandidateId(i as u8)).collect();
    r.shuffle(rng);
    r
}

/// `n` independent uniformly random strict orders.
pub fn ic_sample<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Profile {
    assert!(
        (1..=MAX_CANDIDATES).contains(&m),
        "candidate count {m} out of range"
    );
    let ballots = (0..n)
        .map(|_| Ballot::new_unchecked(uniform_ranking(m, rng), 1))
        .collect();
    Profile::new_unchecked(m, ballots)
}

/// Pólya-Eggenberger urn draws.
///
/// With `a = b * m!` copies added per draw, draw `t` (0-based) is a fresh
/// uniform order with probability `m! / (m! + t a) = 1 / (1 + t b)` and
/// otherwise a copy of one of the `t` earlier draws chosen uniformly. This is
/// the same distribution as the literal urn without materializing m! orders.
/// With `b = 0` no extra randomness is consumed, so the output equals
/// [`ic_sample`] on the same stream.
pub fn urn_sample<R: Rng + ?Sized>(m: usize, n: usize, b: UrnParam, rng: &mut R) -> Profile {
    assert!(
        (1..=MAX_CANDIDATES).contains(&m),
        "candidate count {m} out of range"
    );
    let mut draws: Vec<Vec<CandidateId>> = Vec::with_capacity(n);
    for t in 0..n {
        let fresh = t == 0 || b.0 == 0.0 || rng.gen_bool(1.0 / (1.0 + t as f64 * b.0));
        let r = if fresh {
            uniform_ranking(m, rng)
        } else {
            draws[rng.gen_range(0..t)].clone()
        };
        draws.push(r);
    }
    Profile::new_unchecked(
        m,
        draws
            .into_iter()
            .map(|r| Ballot::new_unchecked(r, 1))
            .collect(),
    )
}

/// `n` voters drawn from the base: a random subset of distinct voters when
/// `n` does not exceed the base size, otherwise `n` draws with replacement.
/// Weighted base ballots count as that many voters.
pub fn resample_voters<R: Rng + ?Sized>(
    base: &BaseProfile,
    n: usize,
    rng: &mut R,
) -> Result<Profile> {
    let voters = base.profile.expanded();
    let pool = voters.ballots();
    if pool.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "base profile '{}' has no voters",
            base.label
        )));
    }
    let ballots = if n <= pool.len() {
        index::sample(rng, pool.len(), n)
            .into_iter()
            .map(|i| pool[i].clone())
            .collect()
    } else {
        (0..n)
            .map(|_| pool[rng.gen_range(0..pool.len())].clone())
            .collect()
    };
    Ok(Profile::new_unchecked(base.profile.m(), ballots))
}

/// Changes the candidate count of every ballot in the base.
///
/// Shrinking keeps a uniform random subset of candidates (relabelled in
/// ascending order) and each ballot's induced order on it. Growing doubles the
/// candidate set until it is large enough, each clone tied with its original,
/// then keeps a random subset if it overshot. Each voter then breaks every
/// tie independently and uniformly at random.
pub fn resample_candidates<R: Rng + ?Sized>(
    base: &BaseProfile,
    m: usize,
    rng: &mut R,
) -> Result<Profile> {
    check_m(m)?;
    let base_m = base.profile.m();
    let voters = base.profile.expanded();

    // Each ballot as a sequence of tie groups over extended ids.
    let mut ballots: Vec<Vec<Vec<usize>>> = voters
        .ballots()
        .iter()
        .map(|b| b.ranking().iter().map(|c| vec![c.index()]).collect())
        .collect();
    let mut count = base_m;
    while count < m {
        for groups in &mut ballots {
            for g in groups.iter_mut() {
                let clones: Vec<usize> = g.iter().map(|&x| x + count).collect();
                g.extend(clones);
            }
        }
        count *= 2;
    }

    let mut keep = index::sample(rng, count, m).into_vec();
    keep.sort_unstable();
    let mut relabel = vec![None; count];
    for (new, &old) in keep.iter().enumerate() {
        relabel[old] = Some(CandidateId(new as u8));
    }

    let out = ballots
        .into_iter()
        .map(|groups| {
            let mut ranking = Vec::with_capacity(m);
            for g in groups {
                let mut members: Vec<CandidateId> =
                    g.into_iter().filter_map(|x| relabel[x]).collect();
                members.shuffle(rng);
                ranking.extend(members);
            }
            Ballot::new_unchecked(ranking, 1)
        })
        .collect();
    Ok(Profile::new_unchecked(m, out))
}

/// Draws a profile of `n` voters over `m` candidates.
pub fn sample<R: Rng + ?Sized>(
    dist: &Distribution,
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<Profile> {
    check_m(m)?;
    match dist {
        Distribution::Ic => Ok(ic_sample(m, n, rng)),
        Distribution::Urn(b) => Ok(urn_sample(m, n, *b, rng)),
        Distribution::Resample(base) => {
            let reshaped = resample_candidates(base, m, rng)?;
            resample_voters(&BaseProfile::new(reshaped, base.label.clone()), n, rng)
        }
    }
}

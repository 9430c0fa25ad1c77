//! Monte-Carlo grid runner: how often a single manipulator can elect a random
//! candidate, what the search costs, and an `a * b^m` fit of that cost.
//!
//! Every trial draws from its own stream seeded by `(master seed, m, n,
//! trial)`, so results do not depend on thread count or scheduling.

use std::time::Duration;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::CandidateId;
use crate::seed::RngSeed;
use crate::solver::{
    manipulate_with, verify_witness, Decision, ManipulationInstance, SearchLimits, SearchOptions,
    Strategy,
};
use crate::stv::TieRule;
use crate::votegen::{sample, Distribution};

pub const DEFAULT_MAX_NODES: u64 = 10_000_000;
pub const DEFAULT_TRIALS: usize = 1000;

/// 1, 2, 4, ..., 128.
pub fn powers_of_two() -> Vec<usize> {
    (0..8).map(|k| 1usize << k).collect()
}

/// Elimination tie handling for every election in a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieMode {
    #[default]
    MaxIndex,
    /// A fresh seeded order per trial.
    Random,
}

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub m_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub distribution: Distribution,
    pub trials: usize,
    pub manipulator_weight: u64,
    pub master_seed: RngSeed,
    pub limits: SearchLimits,
    pub tie: TieMode,
    pub strategy: Strategy,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            m_values: powers_of_two(),
            n_values: powers_of_two(),
            distribution: Distribution::Ic,
            trials: DEFAULT_TRIALS,
            manipulator_weight: 1,
            master_seed: RngSeed(1),
            limits: SearchLimits::nodes(DEFAULT_MAX_NODES),
            tie: TieMode::MaxIndex,
            strategy: Strategy::default(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.m_values.is_empty() || self.n_values.is_empty() {
            return Err(Error::InvalidArgument(
                "m and n lists must be nonempty".into(),
            ));
        }
        if let Some(&m) = self
            .m_values
            .iter()
            .find(|&&m| m == 0 || m > crate::MAX_CANDIDATES)
        {
            return Err(Error::CandidateCount(m));
        }
        Ok(())
    }

    pub fn trial_seed(&self, m: usize, n: usize, trial: usize) -> RngSeed {
        self.master_seed.derive(&[m as u64, n as u64, trial as u64])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub decision: Decision,
    pub preferred: CandidateId,
    pub nodes: u64,
    pub elapsed: Duration,
}

/// One election under `config`: draw `n` fixed votes and a uniformly random
/// preferred candidate from `seed`, then search. Witnesses of positive
/// answers are re-counted.
pub fn run_trial(config: &GridConfig, m: usize, n: usize, seed: RngSeed) -> Result<TrialOutcome> {
    let mut rng = seed.rng();
    let fixed = sample(&config.distribution, m, n, &mut rng)?;
    let preferred = CandidateId(rng.gen_range(0..m) as u8);
    let tie_rule = match config.tie {
        TieMode::MaxIndex => TieRule::MaxIndex,
        TieMode::Random => TieRule::SeededRandom(rng.gen()),
    };
    let instance =
        ManipulationInstance::new(fixed, config.manipulator_weight, preferred, tie_rule)?;
    let options = SearchOptions {
        strategy: config.strategy,
        memoize: true,
    };
    let r = manipulate_with(&instance, config.limits, options)?;
    if let Some(w) = &r.witness {
        if !verify_witness(&instance, w)? {
            return Err(Error::WitnessRejected {
                m,
                n,
                trial: usize::MAX,
            });
        }
    }
    Ok(TrialOutcome {
        decision: r.decision,
        preferred,
        nodes: r.nodes,
        elapsed: r.elapsed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub manipulable: usize,
    /// Fraction of resolved trials that were manipulable (NaN if none resolved).
    pub p_manipulable: f64,
    /// Binomial standard error of `p_manipulable`.
    pub stderr: f64,
    pub nodes_mean: f64,
    pub nodes_median: f64,
    pub nodes_p90: f64,
    pub nodes_max: u64,
    pub time_mean: Duration,
    pub unresolved: usize,
}

impl PointResult {
    pub fn resolved(&self) -> usize {
        self.trials - self.unresolved
    }

    /// Aggregates trial outcomes. Node statistics cover every trial.
    pub fn from_trials(m: usize, n: usize, outcomes: &[TrialOutcome]) -> Self {
        let trials = outcomes.len();
        let unresolved = outcomes
            .iter()
            .filter(|o| o.decision == Decision::LimitExceeded)
            .count();
        let manipulable = outcomes
            .iter()
            .filter(|o| o.decision == Decision::Manipulable)
            .count();
        let resolved = trials - unresolved;
        let (p, se) = if resolved == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let p = manipulable as f64 / resolved as f64;
            (p, (p * (1.0 - p) / resolved as f64).sqrt())
        };
        let mut nodes: Vec<u64> = outcomes.iter().map(|o| o.nodes).collect();
        nodes.sort_unstable();
        let mean = nodes.iter().map(|&x| x as f64).sum::<f64>() / trials.max(1) as f64;
        let time_total: Duration = outcomes.iter().map(|o| o.elapsed).sum();
        PointResult {
            m,
            n,
            trials,
            manipulable,
            p_manipulable: p,
            stderr: se,
            nodes_mean: mean,
            nodes_median: median(&nodes),
            nodes_p90: nearest_rank(&nodes, 0.9),
            nodes_max: nodes.last().copied().unwrap_or(0),
            time_mean: time_total / trials.max(1) as u32,
            unresolved,
        }
    }
}

fn median(sorted: &[u64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        len if len % 2 == 1 => sorted[len / 2] as f64,
        len => (sorted[len / 2 - 1] as f64 + sorted[len / 2] as f64) / 2.0,
    }
}

fn nearest_rank(sorted: &[u64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank - 1] as f64
}

/// Runs `config.trials` trials at one `(m, n)` point, in parallel on the
/// current rayon pool.
pub fn run_point(config: &GridConfig, m: usize, n: usize) -> Result<PointResult> {
    config.validate()?;
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            run_trial(config, m, n, config.trial_seed(m, n, trial)).map_err(|e| match e {
                Error::WitnessRejected { .. } => Error::WitnessRejected { m, n, trial },
                other => Error::Trial {
                    m,
                    n,
                    trial,
                    source: Box::new(other),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointResult::from_trials(m, n, &outcomes))
}

/// Every `(m, n)` pair, m-major. `on_point` sees each result as soon as it is
/// ready; on error the points already delivered stay delivered.
pub fn run_grid<F>(config: &GridConfig, mut on_point: F) -> Result<Vec<PointResult>>
where
    F: FnMut(&PointResult) -> Result<()>,
{
    config.validate()?;
    let mut out = Vec::with_capacity(config.m_values.len() * config.n_values.len());
    for &m in &config.m_values {
        for &n in &config.n_values {
            let point = run_point(config, m, n)?;
            on_point(&point)?;
            out.push(point);
        }
    }
    Ok(out)
}

/// Least-squares fit of `ln y = ln a + m ln b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    /// Coefficient of determination of the log-space regression; 1 for a
    /// zero-variance exact fit.
    pub r2: f64,
}

pub fn fit_exponential(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(m, y)) = points
        .iter()
        .find(|(_, y)| y.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !y.is_finite())
    {
        return Err(Error::Fit(format!("value {y} at m={m} is not positive")));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let x_bar = xs.iter().sum::<f64>() / k;
    let y_bar = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all points share one m".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_bar) * (y - y_bar))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let r2 = if ys.iter().all(|&y| y == ys[0]) {
        1.0
    } else {
        let ss_tot: f64 = ys.iter().map(|y| (y - y_bar).powi(2)).sum();
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        1.0 - ss_res / ss_tot
    };
    Ok(FitResult {
        a: intercept.exp(),
        b: slope.exp(),
        r2,
    })
}

/// Fits mean nodes against m for each fixed n among `results`.
pub fn fit_by_n(results: &[PointResult]) -> Vec<(usize, Result<FitResult>)> {
    let mut ns: Vec<usize> = results.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let pts: Vec<(f64, f64)> = results
                .iter()
                .filter(|r| r.n == n)
                .map(|r| (r.m as f64, r.nodes_mean))
                .collect();
            (n, fit_exponential(&pts))
        })
        .collect()
}

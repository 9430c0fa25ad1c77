//! Command-line front end: `gen`, `solve`, `experiment`, `fit`.
//!
//! `solve` exits 0 when the election is manipulable, 1 when it is not, 2 when
//! the search hit a limit. Usage errors exit 3, other failures 4.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{
    fit_exponential, run_grid, GridConfig, TieMode, DEFAULT_MAX_NODES, DEFAULT_TRIALS,
};
use crate::io::{fmt_sig6, read_profile, read_results, write_profile, ResultsRow, ResultsWriter};
use crate::profile::CandidateId;
use crate::report::{summarize, write_charts};
use crate::seed::RngSeed;
use crate::solver::{
    manipulate_with, Decision, ManipulationInstance, SearchLimits, SearchOptions, Strategy,
};
use crate::stv::TieRule;
use crate::votegen::{sample, BaseProfile, Distribution, UrnParam};

pub const EXIT_MANIPULABLE: i32 = 0;
pub const EXIT_NOT_MANIPULABLE: i32 = 1;
pub const EXIT_UNRESOLVED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "stv-manip",
    version,
    about = "STV manipulation search and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a profile file.
    Gen(GenArgs),
    /// Decide whether a manipulator can elect --pref.
    Solve(SolveArgs),
    /// Run a Monte-Carlo grid and write the results CSV.
    Experiment(ExperimentArgs),
    /// Fit mean nodes = a * b^m per series of a results CSV.
    Fit(FitArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DistKind {
    Ic,
    Urn,
    Resample,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TieKind {
    Maxindex,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StrategyKind {
    EveryHolder,
    Deferred,
}

impl From<StrategyKind> for Strategy {
    fn from(s: StrategyKind) -> Self {
        match s {
            StrategyKind::EveryHolder => Strategy::EveryHolder,
            StrategyKind::Deferred => Strategy::Deferred,
        }
    }
}

#[derive(Args, Debug)]
struct DistArgs {
    #[arg(long, value_enum, default_value = "ic")]
    dist: DistKind,
    /// Urn correlation b = a / m!.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Base profile for --dist resample: a profile file, or `nasa` / `hiring`.
    #[arg(long, default_value = "nasa")]
    base: String,
}

impl DistArgs {
    fn distribution(&self) -> Result<Distribution> {
        Ok(match self.dist {
            DistKind::Ic => Distribution::Ic,
            DistKind::Urn => Distribution::Urn(UrnParam::new(self.b)?),
            DistKind::Resample => {
                let base = match BaseProfile::builtin(&self.base) {
                    Some(b) => b,
                    None => {
                        let f = File::open(&self.base)
                            .map_err(|e| Error::Io(format!("{}: {e}", self.base)))?;
                        BaseProfile::new(read_profile(f)?, self.base.clone())
                    }
                };
                Distribution::Resample(Arc::new(base))
            }
        })
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Merge identical ballots into weighted lines.
    #[arg(long)]
    aggregate: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Profile file of the fixed votes (`-` for stdin).
    profile: PathBuf,
    #[arg(long)]
    pref: usize,
    #[arg(long, default_value_t = 1)]
    weight: u64,
    #[arg(long, value_enum, default_value = "maxindex")]
    tie: TieKind,
    /// Seed of the random tie order.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long, value_enum, default_value = "every-holder")]
    strategy: StrategyKind,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Comma-separated candidate counts.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128")]
    m: Vec<usize>,
    /// Comma-separated counts of fixed voters.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128")]
    n: Vec<usize>,
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = 1)]
    weight: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "maxindex")]
    tie: TieKind,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: u64,
    #[arg(long, value_enum, default_value = "every-holder")]
    strategy: StrategyKind,
    /// Results CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for SVG charts.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Record mean wall time per point; makes the CSV run-dependent.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Results CSV written by `experiment`.
    csv: PathBuf,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => experiment(a),
        Command::Fit(a) => fit(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn gen(a: GenArgs) -> Result<i32> {
    let dist = a.dist.distribution()?;
    let profile = sample(&dist, a.m, a.n, &mut RngSeed(a.seed).rng())?;
    let profile = if a.aggregate {
        profile.aggregated()
    } else {
        profile
    };
    eprintln!("seed: {}", a.seed);
    let comments = vec![format!(
        "stv-manip gen dist={dist} m={} n={} seed={}",
        a.m, a.n, a.seed
    )];
    let mut out = output(&a.out)?;
    write_profile(&profile, &comments, &mut out)?;
    out.flush()?;
    Ok(0)
}

fn solve(a: SolveArgs) -> Result<i32> {
    let profile = if a.profile.as_os_str() == "-" {
        read_profile(io::stdin().lock())?
    } else {
        let f = File::open(&a.profile)
            .map_err(|e| Error::Io(format!("{}: {e}", a.profile.display())))?;
        read_profile(f)?
    };
    if a.pref >= profile.m() {
        return Err(Error::InvalidArgument(format!(
            "--pref {} out of range for m={}",
            a.pref,
            profile.m()
        )));
    }
    let tie = match a.tie {
        TieKind::Maxindex => TieRule::MaxIndex,
        TieKind::Random => TieRule::SeededRandom(a.seed),
    };
    let instance = ManipulationInstance::new(profile, a.weight, CandidateId(a.pref as u8), tie)?;
    let limits = SearchLimits {
        max_nodes: a.max_nodes,
        max_time: None,
    };
    let r = manipulate_with(
        &instance,
        limits,
        SearchOptions {
            strategy: a.strategy.into(),
            memoize: true,
        },
    )?;
    let verdict = match r.decision {
        Decision::Manipulable => "manipulable",
        Decision::NotManipulable => "not manipulable",
        Decision::LimitExceeded => "unresolved (limit exceeded)",
    };
    let mut out = io::stdout().lock();
    writeln!(out, "verdict: {verdict}")?;
    if a.tie == TieKind::Random {
        writeln!(out, "tie_seed: {}", a.seed)?;
    }
    if let Some(w) = &r.witness {
        let w: Vec<String> = w.iter().map(|c| c.to_string()).collect();
        writeln!(out, "witness: {}", w.join(">"))?;
    }
    writeln!(out, "nodes: {}", r.nodes)?;
    writeln!(out, "time_ms: {}", fmt_sig6(r.elapsed.as_secs_f64() * 1e3))?;
    Ok(match r.decision {
        Decision::Manipulable => EXIT_MANIPULABLE,
        Decision::NotManipulable => EXIT_NOT_MANIPULABLE,
        Decision::LimitExceeded => EXIT_UNRESOLVED,
    })
}

fn experiment(a: ExperimentArgs) -> Result<i32> {
    if a.max_nodes == 0 {
        return Err(Error::InvalidArgument(
            "--max-nodes must be positive".into(),
        ));
    }
    let distribution = a.dist.distribution()?;
    let config = GridConfig {
        m_values: a.m.clone(),
        n_values: a.n.clone(),
        distribution,
        trials: a.trials,
        manipulator_weight: a.weight,
        master_seed: RngSeed(a.seed),
        limits: SearchLimits::nodes(a.max_nodes),
        tie: match a.tie {
            TieKind::Maxindex => TieMode::MaxIndex,
            TieKind::Random => TieMode::Random,
        },
        strategy: a.strategy.into(),
    };
    config
        .validate()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    eprintln!("seed: {}", a.seed);

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = a.threads {
            b = b.num_threads(t);
        }
        b.build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
    };

    let dist_name = config.distribution.name();
    let b_param = config.distribution.b_param();
    let mut writer = ResultsWriter::new(output(&a.out)?)?;
    let results = pool.install(|| {
        run_grid(&config, |p| {
            writer.write(&ResultsRow::from_point(
                p, dist_name, b_param, a.weight, a.seed, a.timing,
            ))
        })
    });
    writer.into_inner()?.flush()?;
    let results = results?;

    eprint!("{}", summarize(&results));
    if let Some(dir) = &a.plot {
        for f in write_charts(&results, dir)? {
            eprintln!("wrote {}", f.display());
        }
    }
    Ok(0)
}

/// (distribution, b_param, weight, n)
type SeriesKey = (String, String, u64, usize);

fn fit(a: FitArgs) -> Result<i32> {
    let f = File::open(&a.csv).map_err(|e| Error::Io(format!("{}: {e}", a.csv.display())))?;
    let rows = read_results(f)?;
    let mut series: BTreeMap<SeriesKey, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        series
            .entry((r.distribution.clone(), fmt_sig6(r.b_param), r.weight, r.n))
            .or_default()
            .push((r.m as f64, r.nodes_mean));
    }
    let mut out = io::stdout().lock();
    for ((dist, b_param, weight, n), pts) in series {
        let tag = format!(
            "dist={dist} b_param={b_param} weight={weight} n={n} points={}",
            pts.len()
        );
        match fit_exponential(&pts) {
            Ok(fit) => writeln!(
                out,
                "{tag} a={} b={} r2={}",
                fmt_sig6(fit.a),
                fmt_sig6(fit.b),
                fmt_sig6(fit.r2)
            )?,
            Err(e) => writeln!(out, "{tag} skipped: {e}")?,
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_defaults_are_powers_of_two() {
        let cli = Cli::try_parse_from(["stv-manip", "experiment"]).unwrap();
        let Command::Experiment(a) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(a.m, crate::experiments::powers_of_two());
        assert_eq!(a.n, crate::experiments::powers_of_two());
        assert_eq!(
            (a.trials, a.max_nodes, a.seed),
            (DEFAULT_TRIALS, DEFAULT_MAX_NODES, DEFAULT_SEED)
        );
    }

    #[test]
    fn list_flags_split_on_commas() {
        let cli =
            Cli::try_parse_from(["stv-manip", "experiment", "--m", "3,5", "--n", "7"]).unwrap();
        let Command::Experiment(a) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!((a.m, a.n), (vec![3, 5], vec![7]));
    }
}

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use stv_manip::experiments::{
    fit_by_n, fit_exponential, run_grid, run_trial, GridConfig, PointResult,
};
use stv_manip::io::{fmt_sig6, profile_to_string};
use stv_manip::votegen::{ic_sample, sample, urn_sample, BaseProfile, Distribution, UrnParam};
use stv_manip::{
    brute_force_manipulate, manipulate_single, stv_winner, verify_witness, CandidateId, Decision,
    ManipulationInstance, Profile, RngSeed, SearchLimits, TieRule,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let generators = [
        Distribution::Ic,
        Distribution::Urn(UrnParam::new(1.0).unwrap()),
        Distribution::Resample(Arc::new(BaseProfile::nasa_shape())),
    ];
    let master = RngSeed(0xacce97);
    let mut summary = Vec::new();
    for (g, dist) in generators.iter().enumerate() {
        let (mut count, mut manipulable) = (0, 0);
        for m in 2..=5usize {
            for n in [1usize, 2, 4, 8, 16] {
                for w in [1u64, 2, 4] {
                    for rep in 0..9u64 {
                        let mut rng = master.derive(&[g as u64, m as u64, n as u64, w, rep]).rng();
                        let fixed = sample(dist, m, n, &mut rng).map_err(|e| e.to_string())?;
                        let pref = CandidateId(rng.gen_range(0..m) as u8);
                        let tie = if rep % 2 == 0 {
                            TieRule::MaxIndex
                        } else {
                            TieRule::SeededRandom(rng.gen())
                        };
                        let inst = ManipulationInstance::new(fixed, w, pref, tie)
                            .map_err(|e| e.to_string())?;
                        let fast = manipulate_single(&inst, SearchLimits::NONE)
                            .map_err(|e| e.to_string())?;
                        let slow = brute_force_manipulate(&inst).map_err(|e| e.to_string())?;
                        if fast.decision != slow.decision {
                            return Err(format!(
                                "{dist} m={m} n={n} w={w} rep={rep}: {:?} vs brute force {:?}",
                                fast.decision, slow.decision
                            ));
                        }
                        if let Some(wit) = &fast.witness {
                            if !verify_witness(&inst, wit).map_err(|e| e.to_string())? {
                                return Err(format!(
                                    "{dist} m={m} n={n} w={w} rep={rep}: witness rejected"
                                ));
                            }
                        }
                        count += 1;
                        manipulable += (fast.decision == Decision::Manipulable) as usize;
                    }
                }
            }
        }
        if count < 500 {
            return Err(format!("only {count} instances for {dist}"));
        }
        summary.push(format!(
            "{}: {count} agree ({manipulable} manipulable)",
            dist.name()
        ));
    }
    let elapsed = start.elapsed();
    ensure(
        elapsed <= Duration::from_secs(120),
        format!("{}; {:.1?}", summary.join(", "), elapsed),
    )
}

fn urn_repeat() -> Outcome {
    let b = UrnParam::new(1.0).unwrap();
    let master = RngSeed(0x0e7a);
    let samples = 10_000;
    let repeats = (0..samples)
        .filter(|&i| {
            let p = urn_sample(4, 2, b, &mut master.derive(&[i]).rng());
            p.ballots()[0].ranking() == p.ballots()[1].ranking()
        })
        .count();
    let frac = repeats as f64 / samples as f64;
    ensure(
        (0.47..=0.53).contains(&frac),
        format!("repeat fraction {frac:.4}"),
    )
}

fn ic_uniformity() -> Outcome {
    let seed = RngSeed(60_000);
    let n = 60_000;
    let p = ic_sample(3, n, &mut seed.rng());
    let mut counts = std::collections::BTreeMap::new();
    for b in p.ballots() {
        *counts.entry(b.ranking().to_vec()).or_insert(0usize) += b.weight() as usize;
    }
    let freqs: Vec<f64> = counts.values().map(|&c| c as f64 / n as f64).collect();
    if freqs.len() != 6 || freqs.iter().any(|f| (f - 1.0 / 6.0).abs() > 0.01) {
        return Err(format!("frequencies {freqs:?}"));
    }
    let urn = urn_sample(3, n, UrnParam::new(0.0).unwrap(), &mut seed.rng());
    let same = profile_to_string(&p) == profile_to_string(&urn);
    let spread = freqs
        .iter()
        .map(|f| (f - 1.0 / 6.0).abs())
        .fold(0.0, f64::max);
    ensure(
        same,
        format!("max deviation {spread:.4}; urn b=0 identical: {same}"),
    )
}

/// Counts adjacent increases of a sequence expected to be non-increasing.
fn inversions(ps: &[f64]) -> Vec<f64> {
    ps.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| w[1] - w[0])
        .collect()
}

fn trends() -> Outcome {
    let start = Instant::now();
    let by_m = GridConfig {
        m_values: vec![2, 4, 8, 16, 32],
        n_values: vec![16],
        ..GridConfig::default()
    };
    let by_n = GridConfig {
        m_values: vec![8],
        n_values: vec![1, 4, 16, 64, 128],
        ..GridConfig::default()
    };
    let pm: Vec<f64> = run_grid(&by_m, |_| Ok(()))
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| r.p_manipulable)
        .collect();
    let pn: Vec<f64> = run_grid(&by_n, |_| Ok(()))
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| r.p_manipulable)
        .collect();
    let inv: Vec<f64> = inversions(&pm).into_iter().chain(inversions(&pn)).collect();
    let ok = inv.is_empty() || (inv.len() == 1 && inv[0] <= 0.03);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|p| format!("{p:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let elapsed = start.elapsed();
    ensure(
        ok && elapsed <= Duration::from_secs(600),
        format!(
            "p by m [{}], p by n [{}], inversions {inv:?}; {elapsed:.1?}",
            fmt(&pm),
            fmt(&pn)
        ),
    )
}

fn fit_series(dist: Distribution) -> Result<(f64, f64), String> {
    let config = GridConfig {
        m_values: vec![4, 8, 16, 32, 64],
        n_values: vec![32],
        distribution: dist,
        ..GridConfig::default()
    };
    let results: Vec<PointResult> = run_grid(&config, |_| Ok(())).map_err(|e| e.to_string())?;
    let fit = fit_by_n(&results)
        .pop()
        .ok_or("no series")?
        .1
        .map_err(|e| e.to_string())?;
    Ok((fit.b, fit.r2))
}

fn scaling_fit() -> Outcome {
    let (ic_b, ic_r2) = fit_series(Distribution::Ic)?;
    let (urn_b, urn_r2) = fit_series(Distribution::Urn(UrnParam::new(1.0).unwrap()))?;
    ensure(
        (1.0..=1.10).contains(&ic_b) && ic_r2 >= 0.75 && (1.0..=1.05).contains(&urn_b),
        format!("IC b={ic_b:.4} R2={ic_r2:.3}; urn b=1 b={urn_b:.4} R2={urn_r2:.3}"),
    )
}

fn desk_scale() -> Outcome {
    let config = GridConfig {
        m_values: vec![128],
        n_values: vec![128],
        limits: SearchLimits {
            max_nodes: None,
            max_time: Some(Duration::from_secs(120)),
        },
        ..GridConfig::default()
    };
    let mut times = Vec::new();
    let mut manipulable = 0;
    for trial in 0..100 {
        let t = Instant::now();
        let out = run_trial(&config, 128, 128, config.trial_seed(128, 128, trial))
            .map_err(|e| e.to_string())?;
        let dt = t.elapsed();
        if out.decision == Decision::LimitExceeded || dt > Duration::from_secs(120) {
            return Err(format!("trial {trial} unresolved after {dt:.1?}"));
        }
        manipulable += (out.decision == Decision::Manipulable) as usize;
        times.push(dt);
    }
    times.sort();
    let median = (times[49] + times[50]) / 2;
    ensure(
        median < Duration::from_secs(10),
        format!(
            "100 resolved ({manipulable} manipulable), median {median:.2?}, max {:.2?}",
            times[99]
        ),
    )
}

fn triviality() -> Outcome {
    let master = RngSeed(0x7e57);
    for i in 0..1000u64 {
        let mut rng = master.derive(&[i]).rng();
        let m = rng.gen_range(1..=12);
        let n = rng.gen_range(1..=20);
        let fixed = ic_sample(m, n, &mut rng);
        let pref = CandidateId(rng.gen_range(0..m) as u8);
        let tie = if i % 2 == 0 {
            TieRule::MaxIndex
        } else {
            TieRule::SeededRandom(rng.gen())
        };
        let honest = stv_winner(&fixed, tie).map_err(|e| e.to_string())?.winner;
        let inst = ManipulationInstance::new(fixed, 0, pref, tie).map_err(|e| e.to_string())?;
        let r = manipulate_single(&inst, SearchLimits::NONE).map_err(|e| e.to_string())?;
        if (r.decision == Decision::Manipulable) != (pref == honest) {
            return Err(format!(
                "w=0 instance {i}: {:?} but honest winner {honest}, pref {pref}",
                r.decision
            ));
        }
    }
    for m in 1..=16usize {
        for w in 1..=3u64 {
            for p in 0..m {
                let inst = ManipulationInstance::new(
                    Profile::empty(m).unwrap(),
                    w,
                    CandidateId(p as u8),
                    TieRule::MaxIndex,
                )
                .map_err(|e| e.to_string())?;
                if manipulate_single(&inst, SearchLimits::NONE)
                    .map_err(|e| e.to_string())?
                    .decision
                    != Decision::Manipulable
                {
                    return Err(format!("n=0 m={m} w={w} pref={p} not manipulable"));
                }
            }
        }
    }
    for i in 0..100u64 {
        let mut rng = master.derive(&[1, i]).rng();
        let fixed = ic_sample(1, rng.gen_range(0..10), &mut rng);
        let w = rng.gen_range(1..5);
        let inst = ManipulationInstance::new(fixed, w, CandidateId(0), TieRule::MaxIndex)
            .map_err(|e| e.to_string())?;
        let r = manipulate_single(&inst, SearchLimits::NONE).map_err(|e| e.to_string())?;
        if r.decision != Decision::Manipulable || r.nodes != 1 {
            return Err(format!(
                "m=1 instance {i}: {:?} with {} nodes",
                r.decision, r.nodes
            ));
        }
    }
    Ok("w=0 on 1000 instances, n=0 for m 1..16, m=1 on 100 instances".into())
}

fn experiment_csv(threads: usize, dir: &std::path::Path, tag: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(format!("{tag}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_stv-manip"))
        .args([
            "experiment",
            "--dist",
            "urn",
            "--b",
            "0.5",
            "--m",
            "2,4,8,16",
            "--n",
            "1,8,32",
        ])
        .args([
            "--trials",
            "200",
            "--seed",
            "42",
            "--tie",
            "random",
            "--threads",
            &threads.to_string(),
        ])
        .arg("--out")
        .arg(&out)
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("experiment exited with {status}"));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = experiment_csv(8, dir.path(), "a")?;
    let b = experiment_csv(8, dir.path(), "b")?;
    let c = experiment_csv(1, dir.path(), "c")?;
    let rows = a.iter().filter(|&&x| x == b'\n').count();
    ensure(
        a == b && a == c && rows == 13,
        format!(
            "{} bytes, {rows} lines, identical across runs and 1/8 threads: {}",
            a.len(),
            a == b && a == c
        ),
    )
}

fn fit_anchor() -> Outcome {
    let pts: Vec<(f64, f64)> = (1..=10).map(|m| (m as f64, 3.0 * 1.2f64.powi(m))).collect();
    let fit = fit_exponential(&pts).map_err(|e| e.to_string())?;
    let (a, b, r2) = (fmt_sig6(fit.a), fmt_sig6(fit.b), fmt_sig6(fit.r2));
    ensure(
        a == "3" && b == "1.2" && r2 == "1",
        format!("a={a} b={b} R2={r2}"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("urn repeat anchor", urn_repeat),
        ("IC uniformity", ic_uniformity),
        ("trend reproduction", trends),
        ("scaling fit", scaling_fit),
        ("desk-scale performance", desk_scale),
        ("triviality properties", triviality),
        ("reproducibility", reproducibility),
        ("fit unit anchor", fit_anchor),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let (verdict, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{verdict} {}. {name}: {detail} [{:.1?}]",
            i + 1,
            t.elapsed()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

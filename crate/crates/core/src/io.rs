//! Text formats: profile files and the results CSV.
//!
//! Profile file:
//!
//! ```text
//! # comments and blank lines are ignored
//! m=3
//! 2: 0>1>2
//! 1: 2>1>0
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::experiments::PointResult;
use crate::profile::{validate_ranking, Ballot, CandidateId, Profile, MAX_CANDIDATES};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_profile(text: &str) -> Result<Profile> {
    let mut m: Option<usize> = None;
    let mut ballots = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some(m) = m else {
            let value = line
                .strip_prefix("m")
                .map(str::trim_start)
                .and_then(|s| s.strip_prefix('='))
                .ok_or_else(|| parse_err(line_no, "expected header 'm=<count>'"))?;
            let count: usize = value.trim().parse().map_err(|_| {
                parse_err(line_no, format!("bad candidate count '{}'", value.trim()))
            })?;
            if count == 0 || count > MAX_CANDIDATES {
                return Err(parse_err(
                    line_no,
                    format!("candidate count {count} outside 1..={MAX_CANDIDATES}"),
                ));
            }
            m = Some(count);
            continue;
        };
        let (weight, order) = line
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, "expected '<weight>: c0>c1>...'"))?;
        let weight: u64 = weight.trim().parse().map_err(|_| {
            parse_err(
                line_no,
                format!("weight '{}' is not a positive integer", weight.trim()),
            )
        })?;
        if weight == 0 {
            return Err(parse_err(line_no, "weight must be positive"));
        }
        let mut ranking = Vec::with_capacity(m);
        for tok in order.split('>') {
            let tok = tok.trim();
            let c: usize = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad candidate '{tok}'")))?;
            if c >= m {
                return Err(parse_err(
                    line_no,
                    format!("candidate {c} out of range for m={m}"),
                ));
            }
            ranking.push(CandidateId(c as u8));
        }
        let mut seen = vec![false; m];
        for c in &ranking {
            if std::mem::replace(&mut seen[c.index()], true) {
                return Err(parse_err(line_no, format!("duplicate candidate {c}")));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(parse_err(line_no, format!("missing candidate {missing}")));
        }
        debug_assert!(validate_ranking(&ranking, m).is_ok());
        ballots.push(Ballot::new_unchecked(ranking, weight));
    }
    let m = m.ok_or_else(|| parse_err(1, "missing header 'm=<count>'"))?;
    Profile::new(m, ballots)
}

pub fn read_profile<R: Read>(mut reader: R) -> Result<Profile> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_profile(&text)
}

/// Serializes a profile; each entry of `comments` becomes a `#` line.
pub fn write_profile<W: Write>(profile: &Profile, comments: &[String], mut out: W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "m={}", profile.m())?;
    let mut line = String::new();
    for b in profile.ballots() {
        line.clear();
        line.push_str(&b.weight().to_string());
        line.push_str(": ");
        for (k, c) in b.ranking().iter().enumerate() {
            if k > 0 {
                line.push('>');
            }
            line.push_str(&c.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn profile_to_string(profile: &Profile) -> String {
    let mut buf = Vec::new();
    write_profile(profile, &[], &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("profile text is ASCII")
}

/// Formats with 6 significant digits, `%g` style.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!(
            "{mantissa}e{}{:02}",
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const RESULTS_HEADER: [&str; 15] = [
    "distribution",
    "b_param",
    "m",
    "n",
    "weight",
    "trials",
    "p_manipulable",
    "stderr",
    "nodes_mean",
    "nodes_median",
    "nodes_p90",
    "nodes_max",
    "time_mean_ms",
    "unresolved",
    "master_seed",
];

/// Streams result rows, flushing after each one.
pub struct ResultsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ResultsWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(RESULTS_HEADER)?;
        inner.flush()?;
        Ok(ResultsWriter { inner })
    }

    pub fn write(&mut self, row: &ResultsRow) -> Result<()> {
        let time = row.time_mean_ms.map_or_else(|| "NA".to_string(), fmt_sig6);
        self.inner.write_record([
            row.distribution.clone(),
            fmt_sig6(row.b_param),
            row.m.to_string(),
            row.n.to_string(),
            row.weight.to_string(),
            row.trials.to_string(),
            fmt_sig6(row.p_manipulable),
            fmt_sig6(row.stderr),
            fmt_sig6(row.nodes_mean),
            fmt_sig6(row.nodes_median),
            fmt_sig6(row.nodes_p90),
            row.nodes_max.to_string(),
            time,
            row.unresolved.to_string(),
            row.master_seed.to_string(),
        ])?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(e.to_string()))
    }
}

/// One line of the results CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultsRow {
    pub distribution: String,
    pub b_param: f64,
    pub m: usize,
    pub n: usize,
    pub weight: u64,
    pub trials: usize,
    pub p_manipulable: f64,
    pub stderr: f64,
    pub nodes_mean: f64,
    pub nodes_median: f64,
    pub nodes_p90: f64,
    pub nodes_max: u64,
    /// `None` when timing was not recorded.
    pub time_mean_ms: Option<f64>,
    pub unresolved: usize,
    pub master_seed: u64,
}

impl ResultsRow {
    pub fn from_point(
        point: &PointResult,
        distribution: &str,
        b_param: f64,
        weight: u64,
        master_seed: u64,
        with_time: bool,
    ) -> Self {
        ResultsRow {
            distribution: distribution.to_string(),
            b_param,
            m: point.m,
            n: point.n,
            weight,
            trials: point.trials,
            p_manipulable: point.p_manipulable,
            stderr: point.stderr,
            nodes_mean: point.nodes_mean,
            nodes_median: point.nodes_median,
            nodes_p90: point.nodes_p90,
            nodes_max: point.nodes_max,
            time_mean_ms: with_time.then_some(point.time_mean.as_secs_f64() * 1e3),
            unresolved: point.unresolved,
            master_seed,
        }
    }
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultsRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != RESULTS_HEADER {
        return Err(parse_err(1, "unexpected results header"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let f = |k: usize| -> Result<f64> {
            rec[k].parse::<f64>().map_err(|_| {
                parse_err(
                    line,
                    format!("column {}: bad number '{}'", RESULTS_HEADER[k], &rec[k]),
                )
            })
        };
        let u = |k: usize| -> Result<u64> {
            rec[k].parse::<u64>().map_err(|_| {
                parse_err(
                    line,
                    format!("column {}: bad integer '{}'", RESULTS_HEADER[k], &rec[k]),
                )
            })
        };
        rows.push(ResultsRow {
            distribution: rec[0].to_string(),
            b_param: f(1)?,
            m: u(2)? as usize,
            n: u(3)? as usize,
            weight: u(4)?,
            trials: u(5)? as usize,
            p_manipulable: f(6)?,
            stderr: f(7)?,
            nodes_mean: f(8)?,
            nodes_median: f(9)?,
            nodes_p90: f(10)?,
            nodes_max: u(11)?,
            time_mean_ms: if &rec[12] == "NA" { None } else { Some(f(12)?) },
            unresolved: u(13)? as usize,
            master_seed: u(14)?,
        });
    }
    Ok(rows)
}

//! Plain-text tables and SVG line charts for grid results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiments::PointResult;
use crate::io::fmt_sig6;

pub fn summarize(results: &[PointResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>5} {:>7} {:>9} {:>9} {:>11} {:>11} {:>11} {:>10} {:>10}",
        "m",
        "n",
        "trials",
        "p_manip",
        "stderr",
        "nodes_mean",
        "nodes_med",
        "nodes_p90",
        "nodes_max",
        "unresolved"
    );
    for r in results {
        let _ = writeln!(
            out,
            "{:>5} {:>5} {:>7} {:>9} {:>9} {:>11} {:>11} {:>11} {:>10} {:>10}",
            r.m,
            r.n,
            r.trials,
            fmt_sig6(r.p_manipulable),
            fmt_sig6(r.stderr),
            fmt_sig6(r.nodes_mean),
            fmt_sig6(r.nodes_median),
            fmt_sig6(r.nodes_p90),
            r.nodes_max,
            r.unresolved
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Probability,
    MeanNodes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// x = m, one line per fixed n.
    Candidates,
    /// x = n, one line per fixed m.
    Voters,
}

pub struct Chart {
    pub title: String,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub log_y: bool,
    /// (legend, points) per line.
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

pub fn chart(results: &[PointResult], metric: Metric, axis: Axis) -> Chart {
    let mut series: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in results {
        let y = match metric {
            Metric::Probability => r.p_manipulable,
            Metric::MeanNodes => r.nodes_mean,
        };
        if !y.is_finite() {
            continue;
        }
        let (key, x) = match axis {
            Axis::Candidates => (r.n, r.m),
            Axis::Voters => (r.m, r.n),
        };
        series.entry(key).or_default().push((x as f64, y));
    }
    let (x_label, legend) = match axis {
        Axis::Candidates => ("candidates m", "n"),
        Axis::Voters => ("agents n", "m"),
    };
    let (y_label, log_y, what) = match metric {
        Metric::Probability => ("probability manipulable", false, "Manipulability"),
        Metric::MeanNodes => ("mean nodes explored", true, "Search cost"),
    };
    Chart {
        title: format!("{what} vs {x_label}"),
        x_label,
        y_label,
        log_y,
        series: series
            .into_iter()
            .map(|(k, mut pts)| {
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                (format!("{legend}={k}"), pts)
            })
            .collect(),
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

impl Chart {
    /// Renders with a log2 x axis.
    pub fn to_svg(&self) -> String {
        let (w, h) = (640.0, 420.0);
        let (left, right, top, bottom) = (70.0, 130.0, 40.0, 50.0);
        let pw = w - left - right;
        let ph = h - top - bottom;
        let pts = self.series.iter().flat_map(|(_, p)| p.iter().copied());
        let ty = |y: f64| if self.log_y { y.max(1e-12).log10() } else { y };
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for (x, y) in pts {
            let x = x.max(1.0).log2();
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(ty(y));
            y1 = y1.max(ty(y));
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if !self.log_y {
            y0 = y0.min(0.0);
            y1 = y1.max(if y1 <= 1.0 { 1.0 } else { y1 });
        } else {
            y0 = y0.floor();
            y1 = y1.ceil().max(y0 + 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        let sx = |x: f64| left + (x.max(1.0).log2() - x0) / (x1 - x0) * pw;
        let sy = |y: f64| top + ph - (ty(y) - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            left + pw / 2.0,
            self.title
        );
        let _ = writeln!(
            s,
            r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let mut k = x0.ceil() as i32;
        while (k as f64) <= x1 + 1e-9 {
            let x = left + (k as f64 - x0) / (x1 - x0) * pw;
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
                top + ph + 16.0,
                1u64 << k.max(0)
            );
            k += 1;
        }
        for i in 0..=4 {
            let v = y0 + (y1 - y0) * i as f64 / 4.0;
            let y = top + ph - ph * i as f64 / 4.0;
            let label = if self.log_y {
                fmt_sig6(10f64.powf(v))
            } else {
                fmt_sig6((v * 100.0).round() / 100.0)
            };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#,
                left - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            h - 12.0,
            self.x_label
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}{2}</text>"#,
            top + ph / 2.0,
            self.y_label,
            if self.log_y { " (log)" } else { "" }
        );
        for (i, (name, pts)) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                path.join(" ")
            );
            for &(x, y) in pts {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                    sx(x),
                    sy(y)
                );
            }
            let ly = top + 14.0 + 18.0 * i as f64;
            let lx = left + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{name}</text>"#,
                lx + 26.0,
                ly + 4.0
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Writes probability and node charts against m (and against n when the
/// grid varies n) into `dir`. Returns the files written.
pub fn write_charts(results: &[PointResult], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let distinct = |f: fn(&PointResult) -> usize| {
        let mut v: Vec<usize> = results.iter().map(f).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let mut jobs = Vec::new();
    if distinct(|r| r.m) > 1 {
        jobs.push(("prob_vs_m.svg", Metric::Probability, Axis::Candidates));
        jobs.push(("nodes_vs_m.svg", Metric::MeanNodes, Axis::Candidates));
    }
    if distinct(|r| r.n) > 1 {
        jobs.push(("prob_vs_n.svg", Metric::Probability, Axis::Voters));
        jobs.push(("nodes_vs_n.svg", Metric::MeanNodes, Axis::Voters));
    }
    let mut written = Vec::new();
    for (name, metric, axis) in jobs {
        let path = dir.join(name);
        std::fs::write(&path, chart(results, metric, axis).to_svg())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn point(m: usize, n: usize, p: f64, nodes: f64) -> PointResult {
        PointResult {
            m,
            n,
            trials: 10,
            manipulable: (p * 10.0) as usize,
            p_manipulable: p,
            stderr: 0.1,
            nodes_mean: nodes,
            nodes_median: nodes,
            nodes_p90: nodes,
            nodes_max: nodes as u64,
            time_mean: Duration::ZERO,
            unresolved: 0,
        }
    }

    #[test]
    fn single_point_table() {
        let t = summarize(&[point(4, 8, 0.5, 3.0)]);
        assert_eq!(t.lines().count(), 2);
        assert!(t.lines().nth(1).unwrap().contains("0.5"));
    }

    #[test]
    fn one_line_per_fixed_n() {
        let rs = vec![
            point(2, 1, 0.9, 2.0),
            point(4, 1, 0.5, 4.0),
            point(2, 8, 0.6, 3.0),
            point(4, 8, 0.3, 9.0),
        ];
        let c = chart(&rs, Metric::Probability, Axis::Candidates);
        assert_eq!(c.series.len(), 2);
        assert_eq!(c.series[0].0, "n=1");
        assert_eq!(c.y_label, "probability manipulable");
        assert_eq!(c.x_label, "candidates m");
        let nodes = chart(&rs, Metric::MeanNodes, Axis::Voters);
        assert!(nodes.log_y);
        assert_eq!(nodes.y_label, "mean nodes explored");
        let svg = nodes.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn chart_files() {
        let dir = tempfile::tempdir().unwrap();
        let rs = vec![point(2, 1, 0.9, 2.0), point(4, 1, 0.5, 4.0)];
        let files = write_charts(&rs, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        assert!(files.iter().all(|f| f.exists()));
    }
}

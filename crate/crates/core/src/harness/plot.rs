use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{ExperimentKind, ExperimentResult, GroupSummary};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Pooled mean (with stderr) against `n`, one curve per length.
    MeanVsN,
    /// Pooled mean against the length multiplier, one curve per `n`.
    MeanVsMultiplier,
    /// Success fraction with confidence band against the multiplier.
    SuccessVsMultiplier,
    /// Worst-start TV distance against `t`, one curve per graph.
    TvProfile,
    /// Counts of per-trial values in unit-width buckets, one curve per `n`.
    Histogram,
}

impl FromStr for PlotKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mean-vs-n" => Self::MeanVsN,
            "mean-vs-multiplier" => Self::MeanVsMultiplier,
            "success-vs-multiplier" => Self::SuccessVsMultiplier,
            "tv-profile" => Self::TvProfile,
            "histogram" => Self::Histogram,
            _ => {
                return Err(LabError::Config(format!(
                    "unknown plot kind '{s}' (mean-vs-n, mean-vs-multiplier, success-vs-multiplier, tv-profile, histogram)"
                )))
            }
        })
    }
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MeanVsN => "mean-vs-n",
            Self::MeanVsMultiplier => "mean-vs-multiplier",
            Self::SuccessVsMultiplier => "success-vs-multiplier",
            Self::TvProfile => "tv-profile",
            Self::Histogram => "histogram",
        }
    }
}

struct Curve {
    label: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

fn length_label(g: &GroupSummary) -> String {
    match (g.multiplier, g.length) {
        (Some(m), _) => format!("m{m}"),
        (None, Some(l)) => format!("L{l}"),
        (None, None) => "all".into(),
    }
}

fn curves(res: &ExperimentResult, kind: PlotKind) -> Result<Vec<Curve>> {
    let mut out: BTreeMap<String, Curve> = BTreeMap::new();
    let mut push = |label: String, header: Vec<&'static str>, row: Vec<f64>| {
        out.entry(label.clone())
            .or_insert_with(|| Curve {
                label,
                header,
                rows: Vec::new(),
            })
            .rows
            .push(row);
    };
    match kind {
        PlotKind::MeanVsN => {
            for g in &res.pooled {
                push(length_label(g), vec!["x", "y", "stderr"], vec![g.n as f64, g.summary.mean, g.summary.stderr]);
            }
        }
        PlotKind::MeanVsMultiplier | PlotKind::SuccessVsMultiplier => {
            for g in &res.pooled {
                let Some(m) = g.multiplier else {
                    return Err(LabError::Precondition(format!(
                        "plot '{}' needs a length-multiplier sweep",
                        kind.as_str()
                    )));
                };
                if kind == PlotKind::MeanVsMultiplier {
                    push(format!("n{}", g.n), vec!["x", "y", "stderr"], vec![m, g.summary.mean, g.summary.stderr]);
                } else {
                    let s = g.success.ok_or_else(|| {
                        LabError::Precondition("experiment has no success indicator".into())
                    })?;
                    push(
                        format!("n{}", g.n),
                        vec!["x", "y", "ci_lower", "ci_upper"],
                        vec![m, s.fraction, s.ci_lower, s.ci_upper],
                    );
                }
            }
        }
        PlotKind::TvProfile => {
            if res.config.experiment != ExperimentKind::Mixing {
                return Err(LabError::Precondition("tv-profile needs a mixing experiment".into()));
            }
            for r in &res.records {
                if let Some(v) = r.value {
                    push(format!("n{}_g{}", r.n, r.replicate), vec!["x", "y"], vec![r.trial as f64, v]);
                }
            }
        }
        PlotKind::Histogram => {
            let mut counts: BTreeMap<(usize, i64), u64> = BTreeMap::new();
            for r in &res.records {
                if let (Some(v), false, true) = (r.value, r.censored, r.error.is_empty()) {
                    *counts.entry((r.n, v.floor() as i64)).or_default() += 1;
                }
            }
            for ((n, b), c) in counts {
                push(format!("n{n}"), vec!["x", "y"], vec![b as f64, c as f64]);
            }
        }
    }
    Ok(out.into_values().collect())
}

/// Writes one CSV per curve into `dir`, named
/// `<stem>.<kind>.<curve>.csv`, and returns the paths written.
pub fn emit_plot_data(res: &ExperimentResult, kind: PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    let curves = curves(res, kind)?;
    if curves.is_empty() {
        return Err(LabError::Precondition("no data to plot".into()));
    }
    std::fs::create_dir_all(dir)?;
    let stem = res.config.stem();
    let mut paths = Vec::new();
    for c in curves {
        let path = dir.join(format!("{stem}.{}.{}.csv", kind.as_str(), c.label));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&c.header)?;
        for row in &c.rows {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{execute, ExperimentConfig};

    fn read(path: &Path) -> Vec<Vec<f64>> {
        let mut r = csv::Reader::from_path(path).unwrap();
        r.records()
            .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
            .collect()
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!("scatter".parse::<PlotKind>().is_err());
        assert_eq!("tv-profile".parse::<PlotKind>().unwrap(), PlotKind::TvProfile);
    }

    #[test]
    fn tv_profile_of_complete_graph() {
        let cfg = ExperimentConfig::from_json(
            r#"{"schema_version": 1, "experiment": "mixing", "graph": {"family": "complete", "n": 10},
                "seed": 0, "params": {"xi": [0.001]}}"#,
        )
        .unwrap();
        let res = execute(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_plot_data(&res, PlotKind::TvProfile, dir.path()).unwrap();
        assert_eq!(paths.len(), 1);
        let rows = read(&paths[0]);
        assert_eq!(rows[0][0], 0.0);
        assert!((rows[0][1] - 0.9).abs() < 1e-12);
        assert!(rows.windows(2).all(|w| w[1][0] == w[0][0] + 1.0 && w[1][1] <= w[0][1]));
    }

    #[test]
    fn cover_vs_n_tracks_coupon_collector() {
        let cfg = ExperimentConfig::from_json(
            r#"{"schema_version": 1, "experiment": "cover", "graph": {"family": "complete", "n": 10},
                "n_values": [10, 20, 30, 40, 50, 60, 70, 80, 90, 100], "trials": 2000, "seed": 8}"#,
        )
        .unwrap();
        let res = execute(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_plot_data(&res, PlotKind::MeanVsN, dir.path()).unwrap();
        let rows = read(&paths[0]);
        assert_eq!(rows.len(), 10);
        for row in rows {
            let n = row[0] as usize;
            let want = (n - 1) as f64 * (1..n).map(|k| 1.0 / k as f64).sum::<f64>();
            assert!((row[1] - want).abs() < 5.0 * row[2] + 0.01 * want, "n = {n}: {} vs {want}", row[1]);
        }
        assert!(emit_plot_data(&res, PlotKind::TvProfile, dir.path()).is_err());
        assert!(emit_plot_data(&res, PlotKind::SuccessVsMultiplier, dir.path()).is_err());
    }

    #[test]
    fn histogram_buckets_count_every_trial() {
        let cfg = ExperimentConfig::from_json(
            r#"{"schema_version": 1, "experiment": "cover", "graph": {"family": "complete", "n": 5},
                "trials": 300, "seed": 1}"#,
        )
        .unwrap();
        let res = execute(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_plot_data(&res, PlotKind::Histogram, dir.path()).unwrap();
        let rows = read(&paths[0]);
        assert_eq!(rows.iter().map(|r| r[1]).sum::<f64>(), 300.0);
        assert!(rows[0][0] >= 4.0);
    }

    #[test]
    fn success_vs_multiplier_has_ci_columns() {
        let cfg = ExperimentConfig::from_json(
            r#"{"schema_version": 1, "experiment": "strong_cover", "graph": {"family": "complete", "n": 20},
                "trials": 100, "seed": 1, "length_multipliers": [0.5, 1.0, 2.0]}"#,
        )
        .unwrap();
        let res = execute(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_plot_data(&res, PlotKind::SuccessVsMultiplier, dir.path()).unwrap();
        let rows = read(&paths[0]);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r[2] <= r[1] && r[1] <= r[3]));
        assert!(rows[0][1] <= rows[2][1]);
    }
}

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::generators::GenSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Overrides the configured output directory.
pub const ENV_OUTPUT_DIR: &str = "TRACE_LAB_OUTPUT_DIR";
/// Overrides the configured worker count.
pub const ENV_WORKERS: &str = "TRACE_LAB_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Cover,
    StrongCover,
    Blanket,
    Visits,
    ReturnProbe,
    TraceHamilton,
    Tau,
    BoundsSweep,
    Counterexample,
    Mixing,
}

impl ExperimentKind {
    pub fn needs_walk_length(self) -> bool {
        matches!(
            self,
            Self::StrongCover | Self::Visits | Self::TraceHamilton | Self::Tau
        )
    }

    /// Experiments whose per-trial value is a 0/1 success indicator.
    pub fn is_binary(self) -> bool {
        matches!(self, Self::StrongCover | Self::ReturnProbe | Self::TraceHamilton)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cover => "cover",
            Self::StrongCover => "strong_cover",
            Self::Blanket => "blanket",
            Self::Visits => "visits",
            Self::ReturnProbe => "return_probe",
            Self::TraceHamilton => "trace_hamilton",
            Self::Tau => "tau",
            Self::BoundsSweep => "bounds_sweep",
            Self::Counterexample => "counterexample",
            Self::Mixing => "mixing",
        }
    }
}

/// Walk length: absolute, or a multiple of `n ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WalkLength {
    Steps(u64),
    Multiplier(f64),
}

/// `ceil(m * n ln n)`.
pub fn length_from_multiplier(n: usize, m: f64) -> u64 {
    (m * n as f64 * (n as f64).ln()).ceil() as u64
}

fn default_eps() -> f64 {
    0.1
}
fn default_c() -> f64 {
    16.0
}
fn default_c_prime() -> Vec<f64> {
    vec![2.0, 4.0, 8.0]
}
fn default_delta() -> f64 {
    0.1
}
fn default_xi() -> Vec<f64> {
    vec![0.25, 0.1, 0.01]
}
fn default_confidence() -> f64 {
    0.99
}
fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Expansion constant; also sets the return horizon `n / sqrt(c)`.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Concrete expansion constants tried on walk traces.
    #[serde(default = "default_c_prime")]
    pub c_prime: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_xi")]
    pub xi: Vec<f64>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// `d / lambda` grid for bounds sweeps; measured lambda when absent.
    #[serde(default)]
    pub lambda_ratios: Option<Vec<f64>>,
    /// Return-probe horizon; `floor(n / sqrt(c))` when absent.
    #[serde(default)]
    pub horizon: Option<u64>,
    /// Target vertex for return probes and segment audits; `n - 1` when absent.
    #[serde(default)]
    pub target: Option<usize>,
    /// Sampled sets per size when certifying walk traces; off when absent.
    #[serde(default)]
    pub certify_samples: Option<usize>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            eps: default_eps(),
            c: default_c(),
            c_prime: default_c_prime(),
            delta: default_delta(),
            xi: default_xi(),
            confidence: default_confidence(),
            lambda_ratios: None,
            horizon: None,
            target: None,
            certify_samples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// File stem; defaults to the experiment tag.
    #[serde(default)]
    pub name: Option<String>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            name: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Mean,
    Median,
    Max,
    CensoringRate,
    SuccessFraction,
    SuccessCiLower,
    SuccessCiUpper,
    WorstStartMean,
}

impl FromStr for Stat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| LabError::Config(format!("unknown statistic '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// One row per `(n, length)`, pooling graph replicates.
    #[default]
    Pooled,
    /// One row per `(n, length, replicate)`.
    Group,
}

/// Threshold checked in `--check` mode against every summary row in scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub stat: Stat,
    #[serde(default)]
    pub scope: Scope,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub graph: GenSpec,
    /// Sweep over vertex counts; the graph's own `n` when absent.
    #[serde(default)]
    pub n_values: Option<Vec<usize>>,
    #[serde(default)]
    pub walk_length: Option<WalkLength>,
    /// Sweep over `n ln n` multipliers; overrides `walk_length`.
    #[serde(default)]
    pub length_multipliers: Option<Vec<f64>>,
    #[serde(default)]
    pub params: Params,
    /// Independent graph samples (random families only).
    #[serde(default = "one")]
    pub graphs: usize,
    /// Walk trials per graph (and per start in worst-start mode).
    #[serde(default = "one")]
    pub trials: usize,
    /// Master seed for walk streams. Graph seeds derive from `graph.seed`.
    pub seed: u64,
    /// Per-trial step cap; trials reaching it are censored.
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub worst_start: bool,
    #[serde(default)]
    pub start: usize,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies the environment overrides for output directory and workers.
    pub fn apply_env_overrides(&mut self) -> Result<()> {
        if let Ok(dir) = std::env::var(ENV_OUTPUT_DIR) {
            self.output.dir = PathBuf::from(dir);
        }
        if let Ok(w) = std::env::var(ENV_WORKERS) {
            let w: usize = w
                .parse()
                .map_err(|_| LabError::Config(format!("{ENV_WORKERS} must be a positive integer, got '{w}'")))?;
            self.workers = Some(w);
        }
        self.validate()
    }

    pub fn stem(&self) -> String {
        self.output
            .name
            .clone()
            .unwrap_or_else(|| self.experiment.as_str().to_string())
    }

    pub fn n_values(&self) -> Vec<usize> {
        self.n_values.clone().unwrap_or_else(|| vec![self.graph.n()])
    }

    pub fn graph_replicates(&self) -> usize {
        if self.graph.is_random() {
            self.graphs
        } else {
            1
        }
    }

    /// Length sweep as `(multiplier, steps)` for a given `n`.
    pub fn lengths(&self, n: usize) -> Vec<(Option<f64>, Option<u64>)> {
        if let Some(ms) = &self.length_multipliers {
            return ms.iter().map(|&m| (Some(m), Some(length_from_multiplier(n, m)))).collect();
        }
        match self.walk_length {
            Some(WalkLength::Multiplier(m)) => vec![(Some(m), Some(length_from_multiplier(n, m)))],
            Some(WalkLength::Steps(s)) => vec![(None, Some(s))],
            None => vec![(None, None)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        for n in self.n_values() {
            self.graph.with_n(n).validate()?;
        }
        if self.n_values.as_ref().is_some_and(|v| v.is_empty()) {
            return bad("n_values must not be empty".into());
        }
        if self.trials == 0 || self.graphs == 0 {
            return bad("trials and graphs must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        if let Some(ms) = &self.length_multipliers {
            if ms.is_empty() || ms.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
                return bad("length multipliers must be positive".into());
            }
        }
        if let Some(WalkLength::Multiplier(m)) = self.walk_length {
            if !(m > 0.0 && m.is_finite()) {
                return bad("length multiplier must be positive".into());
            }
        }
        if self.experiment.needs_walk_length() && self.walk_length.is_none() && self.length_multipliers.is_none() {
            return bad(format!("experiment '{}' needs walk_length", self.experiment.as_str()));
        }
        if self.experiment == ExperimentKind::Blanket
            && self.walk_length.is_none()
            && self.length_multipliers.is_none()
            && self.budget.is_none()
        {
            return bad("blanket needs a budget or walk_length".into());
        }
        let p = &self.params;
        if !(p.eps > 0.0 && p.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", p.eps));
        }
        if !(p.c >= 1.0) {
            return bad(format!("c must be at least 1, got {}", p.c));
        }
        if !(p.delta > 0.0 && p.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", p.delta));
        }
        if p.xi.is_empty() || p.xi.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return bad("xi values must lie in (0, 1)".into());
        }
        if !(p.confidence > 0.0 && p.confidence < 1.0) {
            return bad("confidence must lie in (0, 1)".into());
        }
        if p.c_prime.iter().any(|&c| !(c > 0.0)) {
            return bad("c_prime values must be positive".into());
        }
        if let Some(r) = &p.lambda_ratios {
            if r.is_empty() || r.iter().any(|&x| !(x > 1.0)) {
                return bad("lambda_ratios must exceed 1 (lambda < d)".into());
            }
        }
        if let Some(t) = p.target {
            if self.n_values().iter().any(|&n| t >= n) {
                return bad(format!("target {t} out of range"));
            }
        }
        if self.n_values().iter().any(|&n| self.start >= n) {
            return bad(format!("start {} out of range", self.start));
        }
        match self.experiment {
            ExperimentKind::BoundsSweep | ExperimentKind::Mixing
                if !matches!(self.graph, GenSpec::RandomRegular { .. }) && p.lambda_ratios.is_some() =>
            {
                return bad("lambda_ratios needs a random_regular graph to fix d".into());
            }
            ExperimentKind::Counterexample if !matches!(self.graph, GenSpec::Counterexample { .. }) => {
                return bad("counterexample experiment needs a counterexample graph".into());
            }
            _ => {}
        }
        for e in &self.expect {
            if e.min.is_none() && e.max.is_none() {
                return bad("each expectation needs min or max".into());
            }
        }
        Ok(())
    }
}

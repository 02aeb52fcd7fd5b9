//! Experiment orchestration: a JSON config drives seeded trials over one or
//! more graphs, and results are persisted as a per-trial CSV (the ground
//! truth) plus a JSON summary derived from it.
//!
//! Seeding: graph replicate `r` of a random family uses `graph.seed + r`.
//! Walk trial `i` on the `r`-th graph of the `k`-th vertex count draws from
//! `split(split(split(seed, k), r), i)`, independent of the length sweep and
//! of the worker count.

mod config;
mod plot;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::*;
pub use plot::*;

use crate::bounds::{cover_time_spectral_bound, mixing_time_bound};
use crate::error::{LabError, Result};
use crate::generators::GenSpec;
use crate::graph::{is_connected, Graph};
use crate::hamilton::{
    certify_expander, hamiltonian_exact, hamiltonian_posa, largest_passing_c, tau_times, verify_cycle, CertMode,
    CycleStatus, PosaOptions, TauOptions, SUBSET_DP_LIMIT,
};
use crate::rng::split;
use crate::spectral::{eigen_extremes, empirical_mixing_time, worst_start_tv_profile, EigenOptions};
use crate::stats::{clopper_pearson, Summary};
use crate::walk::{
    blanket_time, cover_step, return_horizon, segment_burn_in, segment_trial, simulate_walk, sweep_starts,
    trace_graph, DEFAULT_SAMPLED_STARTS,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact certification of the counterexample graph is attempted up to this size.
const EXACT_CERT_LIMIT: usize = 24;
const DEFAULT_CERT_SAMPLES: usize = 1000;

/// One row of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub multiplier: Option<f64>,
    pub length: Option<u64>,
    pub replicate: usize,
    pub graph_seed: u64,
    pub trial: usize,
    pub walk_seed: u64,
    pub start: usize,
    pub value: Option<f64>,
    pub aux: Option<f64>,
    pub hits: Option<u64>,
    pub attempts: Option<u64>,
    pub censored: bool,
    pub note: String,
    pub error: String,
}

/// One row of a bounds sweep CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub eps: f64,
    pub h_lower: f64,
    pub h_upper: f64,
    pub cover_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Success {
    pub hits: u64,
    pub attempts: u64,
    pub fraction: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub multiplier: Option<f64>,
    pub length: Option<u64>,
    /// `None` for rows pooled over graph replicates.
    pub replicate: Option<usize>,
    pub rows: usize,
    pub errors: usize,
    pub summary: Summary,
    pub success: Option<Success>,
    /// Largest per-start mean of uncensored values, in worst-start mode.
    pub worst_start_mean: Option<f64>,
}

impl GroupSummary {
    pub fn stat(&self, s: Stat) -> Option<f64> {
        let finite = |x: f64| x.is_finite().then_some(x);
        match s {
            Stat::Mean => finite(self.summary.mean),
            Stat::Median => finite(self.summary.median),
            Stat::Max => finite(self.summary.max),
            Stat::CensoringRate => Some(self.summary.censoring_rate),
            Stat::SuccessFraction => self.success.map(|s| s.fraction),
            Stat::SuccessCiLower => self.success.map(|s| s.ci_lower),
            Stat::SuccessCiUpper => self.success.map(|s| s.ci_upper),
            Stat::WorstStartMean => self.worst_start_mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub stat: Stat,
    pub scope: Scope,
    pub n: usize,
    pub multiplier: Option<f64>,
    pub replicate: Option<usize>,
    pub value: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub version: String,
    pub config: ExperimentConfig,
    pub wall_clock_secs: f64,
    pub groups: Vec<GroupSummary>,
    pub pooled: Vec<GroupSummary>,
    /// Per-graph quantities that are not per-trial: measured spectra,
    /// certification verdicts, mixing times.
    pub diagnostics: Vec<Value>,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
    #[serde(skip)]
    pub bounds: Vec<BoundsRow>,
}

impl ExperimentResult {
    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

struct Slot {
    n_index: usize,
    n: usize,
    replicate: usize,
    graph_seed: u64,
    graph: std::result::Result<Graph, String>,
}

impl Slot {
    fn walk_seed_base(&self, master: u64) -> u64 {
        split(split(master, self.n_index as u64), self.replicate as u64)
    }
}

struct Job<'a> {
    slot: &'a Slot,
    multiplier: Option<f64>,
    length: Option<u64>,
    trial: usize,
    walk_seed: u64,
    start: usize,
}

fn graph_seed_for(spec: &GenSpec, replicate: usize) -> u64 {
    match spec {
        GenSpec::RandomRegular { seed, .. } => seed.wrapping_add(replicate as u64),
        _ => 0,
    }
}

fn build_slots(cfg: &ExperimentConfig) -> Vec<Slot> {
    let reps = cfg.graph_replicates();
    let keys: Vec<(usize, usize, usize)> = cfg
        .n_values()
        .into_iter()
        .enumerate()
        .flat_map(|(k, n)| (0..reps).map(move |r| (k, n, r)))
        .collect();
    keys.into_par_iter()
        .map(|(n_index, n, replicate)| {
            let graph_seed = graph_seed_for(&cfg.graph, replicate);
            let spec = cfg.graph.with_n(n).with_seed(graph_seed);
            Slot {
                n_index,
                n,
                replicate,
                graph_seed,
                graph: spec.build().map_err(|e| e.to_string()),
            }
        })
        .collect()
}

/// Runs the experiment without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Config(format!("cannot build worker pool: {e}")))?;
    let started = Instant::now();
    let (records, bounds, diagnostics) = pool.install(|| dispatch(cfg))?;
    let (groups, pooled) = summarize(cfg, &records);
    let checks = evaluate_checks(cfg, &groups, &pooled);
    Ok(ExperimentResult {
        version: VERSION.to_string(),
        config: cfg.clone(),
        wall_clock_secs: started.elapsed().as_secs_f64(),
        groups,
        pooled,
        diagnostics,
        checks,
        records,
        bounds,
    })
}

/// Runs the experiment and persists the per-trial CSV and JSON summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentResult, OutputPaths)> {
    let res = execute(cfg)?;
    let paths = persist(&res)?;
    Ok((res, paths))
}

type Dispatched = (Vec<TrialRecord>, Vec<BoundsRow>, Vec<Value>);

fn dispatch(cfg: &ExperimentConfig) -> Result<Dispatched> {
    match cfg.experiment {
        ExperimentKind::BoundsSweep => bounds_sweep(cfg),
        ExperimentKind::Mixing => mixing(cfg),
        _ => {
            let slots = build_slots(cfg);
            let mut diagnostics = Vec::new();
            if cfg.experiment == ExperimentKind::Counterexample {
                diagnostics = slots.par_iter().map(|s| certify_slot(cfg, s)).collect();
            }
            let jobs = plan_jobs(cfg, &slots);
            let records = jobs.par_iter().map(|j| run_trial(cfg, j)).collect();
            Ok((records, Vec::new(), diagnostics))
        }
    }
}

fn plan_jobs<'a>(cfg: &ExperimentConfig, slots: &'a [Slot]) -> Vec<Job<'a>> {
    let mut jobs = Vec::new();
    for slot in slots {
        let base = slot.walk_seed_base(cfg.seed);
        let starts = if cfg.worst_start {
            sweep_starts(slot.n, base, DEFAULT_SAMPLED_STARTS)
        } else {
            vec![cfg.start]
        };
        for (multiplier, length) in cfg.lengths(slot.n) {
            for trial in 0..starts.len() * cfg.trials {
                jobs.push(Job {
                    slot,
                    multiplier,
                    length,
                    trial,
                    walk_seed: split(base, trial as u64),
                    start: starts[trial / cfg.trials],
                });
            }
        }
    }
    jobs
}

fn run_trial(cfg: &ExperimentConfig, job: &Job) -> TrialRecord {
    let mut rec = TrialRecord {
        n: job.slot.n,
        multiplier: job.multiplier,
        length: job.length,
        replicate: job.slot.replicate,
        graph_seed: job.slot.graph_seed,
        trial: job.trial,
        walk_seed: job.walk_seed,
        start: job.start,
        value: None,
        aux: None,
        hits: None,
        attempts: None,
        censored: false,
        note: String::new(),
        error: String::new(),
    };
    let outcome = match &job.slot.graph {
        Err(e) => Err(LabError::InvalidGraph(e.clone())),
        Ok(g) if !is_connected(g) => Err(LabError::Disconnected),
        Ok(g) => fill_trial(cfg, g, job, &mut rec),
    };
    if let Err(e) = outcome {
        rec.error = e.to_string();
    }
    rec
}

fn set_censorable(rec: &mut TrialRecord, value: Option<u64>) {
    rec.value = value.map(|v| v as f64);
    rec.censored = value.is_none();
}

fn set_indicator(rec: &mut TrialRecord, hit: bool) {
    rec.value = Some(if hit { 1.0 } else { 0.0 });
    rec.hits = Some(u64::from(hit));
    rec.attempts = Some(1);
}

fn fill_trial(cfg: &ExperimentConfig, g: &Graph, job: &Job, rec: &mut TrialRecord) -> Result<()> {
    let n = g.n();
    let p = &cfg.params;
    let need_length = || job.length.ok_or_else(|| LabError::Config("walk length missing".into()));
    let target = p.target.unwrap_or(n - 1);
    match cfg.experiment {
        ExperimentKind::Cover | ExperimentKind::Counterexample => {
            let budget = cfg.budget.or(job.length).unwrap_or(u64::MAX);
            set_censorable(rec, cover_step(g, job.start, job.walk_seed, budget)?);
        }
        ExperimentKind::StrongCover => {
            let c = cover_step(g, job.start, job.walk_seed, need_length()?)?;
            set_indicator(rec, c.is_some());
            rec.aux = c.map(|c| c as f64);
        }
        ExperimentKind::Blanket => {
            let budget = cfg.budget.or(job.length).expect("validated");
            let b = blanket_time(g, job.start, p.delta, job.walk_seed, budget)?;
            set_censorable(rec, b.blanket_time);
            rec.aux = b.cover_step.map(|c| c as f64);
        }
        ExperimentKind::Visits => {
            let s = segment_trial(
                g,
                job.start,
                need_length()?,
                job.walk_seed,
                segment_burn_in(n),
                return_horizon(n, p.c),
                target,
            )?;
            rec.value = Some(s.rho_hat);
            rec.aux = s.cover_step.map(|c| c as f64);
            rec.hits = Some(s.hits);
            rec.attempts = Some(s.segments);
        }
        ExperimentKind::ReturnProbe => {
            if target == job.start {
                return Err(LabError::Precondition("return probe target equals the start".into()));
            }
            let horizon = p.horizon.unwrap_or_else(|| return_horizon(n, p.c));
            let trace = simulate_walk(g, job.start, horizon, job.walk_seed)?;
            let first = trace.first_visit_step[target];
            set_indicator(rec, first.is_some());
            rec.aux = first.map(|t| t as f64);
        }
        ExperimentKind::TraceHamilton => trace_hamilton_trial(cfg, g, job, need_length()?, rec)?,
        ExperimentKind::Tau => {
            let r = tau_times(g, job.start, need_length()?, job.walk_seed, &TauOptions::default())?;
            rec.value = match (r.tau_hc, r.tau_1) {
                (Some(hc), Some(t1)) => Some((hc - t1) as f64),
                _ => None,
            };
            rec.censored = r.tau_hc.is_none();
            rec.aux = r.tau_1.map(|t| t as f64);
            rec.note = serde_json::to_value(r.label)?.as_str().unwrap_or_default().to_string();
        }
        ExperimentKind::BoundsSweep | ExperimentKind::Mixing => unreachable!("not trial based"),
    }
    Ok(())
}

fn trace_hamilton_trial(
    cfg: &ExperimentConfig,
    g: &Graph,
    job: &Job,
    length: u64,
    rec: &mut TrialRecord,
) -> Result<()> {
    let trace = simulate_walk(g, job.start, length, job.walk_seed)?;
    let cover = trace.cover_step();
    rec.aux = cover.map(|c| c as f64);
    let tg = trace_graph(&trace, g);
    let mut notes = Vec::new();
    if cover.is_none() {
        notes.push("uncovered".to_string());
        set_indicator(rec, false);
    } else {
        let r = if tg.n() <= SUBSET_DP_LIMIT {
            hamiltonian_exact(&tg, u64::MAX)
        } else {
            hamiltonian_posa(&tg, split(job.walk_seed, 1), &PosaOptions::default())
        };
        let valid = r
            .cycle
            .as_ref()
            .is_some_and(|c| verify_cycle(&tg, c) && verify_cycle(g, c));
        notes.push(
            match (r.status, valid) {
                (CycleStatus::Found, true) => "found",
                (CycleStatus::Found, false) => "invalid_cycle",
                (CycleStatus::ProvenAbsent, _) => "proven_absent",
                (CycleStatus::BudgetExhausted, _) => "budget_exhausted",
            }
            .to_string(),
        );
        set_indicator(rec, valid);
    }
    if let Some(k) = cfg.params.certify_samples {
        let mode = CertMode::Sampled {
            k,
            seed: split(job.walk_seed, 2),
        };
        let best = largest_passing_c(&tg, &cfg.params.c_prime, mode)?;
        notes.push(match best {
            Some(c) => format!("c={c}"),
            None => "c=none".to_string(),
        });
    }
    // A trace vertex of degree < 2 rules out any Hamilton cycle.
    notes.push(format!("min_degree={}", tg.min_degree()));
    rec.note = notes.join(";");
    Ok(())
}

fn certify_slot(cfg: &ExperimentConfig, slot: &Slot) -> Value {
    let c = match cfg.graph {
        GenSpec::Counterexample { c, .. } => c as f64,
        _ => cfg.params.c,
    };
    let reference = 2.0 * slot.n as f64 * (slot.n as f64).ln();
    let Ok(g) = &slot.graph else {
        return json!({"n": slot.n, "error": "graph unavailable"});
    };
    let mode = if slot.n <= EXACT_CERT_LIMIT {
        CertMode::Exact
    } else {
        CertMode::Sampled {
            k: cfg.params.certify_samples.unwrap_or(DEFAULT_CERT_SAMPLES),
            seed: split(cfg.seed, u64::MAX),
        }
    };
    match certify_expander(g, c, mode) {
        Ok(v) => json!({
            "n": slot.n,
            "c": c,
            "passes": v.passes(),
            "verdict": v,
            "two_n_log_n": reference,
        }),
        Err(e) => json!({"n": slot.n, "c": c, "error": e.to_string(), "two_n_log_n": reference}),
    }
}

fn bounds_sweep(cfg: &ExperimentConfig) -> Result<Dispatched> {
    let eps = cfg.params.eps;
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    if let (Some(ratios), GenSpec::RandomRegular { d, .. }) = (&cfg.params.lambda_ratios, &cfg.graph) {
        for n in cfg.n_values() {
            for &r in ratios {
                let lambda = *d as f64 / r;
                let b = cover_time_spectral_bound(n, *d, lambda, eps)?;
                rows.push(BoundsRow {
                    n,
                    d: *d,
                    lambda,
                    eps,
                    h_lower: b.h_lower,
                    h_upper: b.h_upper,
                    cover_upper: b.cover_upper,
                });
            }
        }
        return Ok((Vec::new(), rows, diagnostics));
    }
    let slots = build_slots(cfg);
    let measured: Vec<Result<(usize, f64)>> = slots
        .par_iter()
        .map(|s| {
            let g = s.graph.as_ref().map_err(|e| LabError::InvalidGraph(e.clone()))?;
            let sum = eigen_extremes(g, &EigenOptions::default())?;
            Ok((sum.d, sum.lambda))
        })
        .collect();
    for (slot, m) in slots.iter().zip(measured) {
        match m.and_then(|(d, lambda)| Ok((d, lambda, cover_time_spectral_bound(slot.n, d, lambda, eps)?))) {
            Ok((d, lambda, b)) => {
                rows.push(BoundsRow {
                    n: slot.n,
                    d,
                    lambda,
                    eps,
                    h_lower: b.h_lower,
                    h_upper: b.h_upper,
                    cover_upper: b.cover_upper,
                });
                diagnostics.push(json!({"n": slot.n, "replicate": slot.replicate, "graph_seed": slot.graph_seed, "lambda": lambda}));
            }
            Err(e) => diagnostics.push(json!({"n": slot.n, "replicate": slot.replicate, "error": e.to_string()})),
        }
    }
    Ok((Vec::new(), rows, diagnostics))
}

/// Worst-start TV profile per graph; `trial` is the time index `t`.
fn mixing(cfg: &ExperimentConfig) -> Result<Dispatched> {
    let slots = build_slots(cfg);
    let per_slot: Vec<(Vec<TrialRecord>, Value)> = slots
        .par_iter()
        .map(|slot| match mixing_slot(cfg, slot) {
            Ok(x) => x,
            Err(e) => (
                Vec::new(),
                json!({"n": slot.n, "replicate": slot.replicate, "error": e.to_string()}),
            ),
        })
        .collect();
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (r, d) in per_slot {
        records.extend(r);
        diagnostics.push(d);
    }
    Ok((records, Vec::new(), diagnostics))
}

fn mixing_slot(cfg: &ExperimentConfig, slot: &Slot) -> Result<(Vec<TrialRecord>, Value)> {
    let g = slot.graph.as_ref().map_err(|e| LabError::InvalidGraph(e.clone()))?;
    let spec = eigen_extremes(g, &EigenOptions::default())?;
    let mut per_xi = Vec::new();
    let mut t_max = 1;
    for &xi in &cfg.params.xi {
        let t = empirical_mixing_time(g, xi)?;
        let bound = mixing_time_bound(slot.n, spec.d, spec.lambda, xi)?;
        t_max = t_max.max(t);
        per_xi.push(json!({"xi": xi, "empirical": t, "bound": bound, "within": t as f64 <= bound.ceil()}));
    }
    let profile = worst_start_tv_profile(g, t_max)?;
    let monotone = profile.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let records = profile
        .iter()
        .enumerate()
        .map(|(t, &tv)| TrialRecord {
            n: slot.n,
            multiplier: None,
            length: None,
            replicate: slot.replicate,
            graph_seed: slot.graph_seed,
            trial: t,
            walk_seed: 0,
            start: 0,
            value: Some(tv),
            aux: None,
            hits: None,
            attempts: None,
            censored: false,
            note: String::new(),
            error: String::new(),
        })
        .collect();
    let diag = json!({
        "n": slot.n,
        "replicate": slot.replicate,
        "graph_seed": slot.graph_seed,
        "lambda": spec.lambda,
        "d": spec.d,
        "monotone": monotone,
        "mixing": per_xi,
    });
    Ok((records, diag))
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    n: usize,
    multiplier_bits: Option<u64>,
    length: Option<u64>,
}

fn key_of(r: &TrialRecord) -> Key {
    Key {
        n: r.n,
        multiplier_bits: r.multiplier.map(f64::to_bits),
        length: r.length,
    }
}

fn summarize_rows(
    cfg: &ExperimentConfig,
    rows: &[&TrialRecord],
    replicate: Option<usize>,
) -> GroupSummary {
    let first = rows[0];
    let ok: Vec<&TrialRecord> = rows.iter().copied().filter(|r| r.error.is_empty()).collect();
    let summary = Summary::from_observations(ok.iter().map(|r| r.value.filter(|_| !r.censored)));
    let success = ok.iter().any(|r| r.attempts.is_some()).then(|| {
        let hits: u64 = ok.iter().filter_map(|r| r.hits).sum();
        let attempts: u64 = ok.iter().filter_map(|r| r.attempts).sum();
        let (ci_lower, ci_upper) = clopper_pearson(hits, attempts, cfg.params.confidence);
        Success {
            hits,
            attempts,
            fraction: if attempts > 0 { hits as f64 / attempts as f64 } else { 0.0 },
            ci_lower,
            ci_upper,
        }
    });
    let worst_start_mean = (cfg.worst_start && replicate.is_some()).then(|| {
        let mut per_start: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for r in &ok {
            if let (Some(v), false) = (r.value, r.censored) {
                let e = per_start.entry(r.start).or_default();
                e.0 += v;
                e.1 += 1;
            }
        }
        per_start
            .values()
            .map(|&(s, c)| s / c as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    GroupSummary {
        n: first.n,
        multiplier: first.multiplier,
        length: first.length,
        replicate,
        rows: rows.len(),
        errors: rows.len() - ok.len(),
        summary,
        success,
        worst_start_mean: worst_start_mean.filter(|x| x.is_finite()),
    }
}

/// Derives per-graph and pooled summaries from per-trial rows. Applied to
/// rows read back from the CSV, this reproduces the stored summary.
pub fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> (Vec<GroupSummary>, Vec<GroupSummary>) {
    let mut by_group: BTreeMap<(Key, usize), Vec<&TrialRecord>> = BTreeMap::new();
    let mut by_key: BTreeMap<Key, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_group.entry((key_of(r), r.replicate)).or_default().push(r);
        by_key.entry(key_of(r)).or_default().push(r);
    }
    let groups: Vec<GroupSummary> = by_group
        .iter()
        .map(|((_, rep), rows)| summarize_rows(cfg, rows, Some(*rep)))
        .collect();
    let pooled = by_key
        .iter()
        .map(|(key, rows)| {
            let mut s = summarize_rows(cfg, rows, None);
            s.worst_start_mean = groups
                .iter()
                .filter(|g| key_of_summary(g) == *key)
                .filter_map(|g| g.worst_start_mean)
                .reduce(f64::max);
            s
        })
        .collect();
    (groups, pooled)
}

fn key_of_summary(g: &GroupSummary) -> Key {
    Key {
        n: g.n,
        multiplier_bits: g.multiplier.map(f64::to_bits),
        length: g.length,
    }
}

fn evaluate_checks(cfg: &ExperimentConfig, groups: &[GroupSummary], pooled: &[GroupSummary]) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for e in &cfg.expect {
        let rows = match e.scope {
            Scope::Pooled => pooled,
            Scope::Group => groups,
        };
        for g in rows {
            let value = g.stat(e.stat);
            let passed = value.is_some_and(|v| e.min.is_none_or(|m| v >= m) && e.max.is_none_or(|m| v <= m));
            out.push(CheckOutcome {
                stat: e.stat,
                scope: e.scope,
                n: g.n,
                multiplier: g.multiplier,
                replicate: g.replicate,
                value,
                min: e.min,
                max: e.max,
                passed,
            });
        }
    }
    out
}

pub fn output_paths(cfg: &ExperimentConfig) -> OutputPaths {
    let stem = cfg.stem();
    OutputPaths {
        csv: cfg.output.dir.join(format!("{stem}.csv")),
        summary: cfg.output.dir.join(format!("{stem}.summary.json")),
    }
}

/// Writes the per-trial (or bounds) CSV and the JSON summary.
pub fn persist(res: &ExperimentResult) -> Result<OutputPaths> {
    let paths = output_paths(&res.config);
    std::fs::create_dir_all(&res.config.output.dir)?;
    let mut w = csv::Writer::from_path(&paths.csv)?;
    if res.config.experiment == ExperimentKind::BoundsSweep {
        write_rows(&mut w, &res.bounds, &BOUNDS_COLUMNS)?;
    } else {
        write_rows(&mut w, &res.records, &TRIAL_COLUMNS)?;
    }
    w.flush()?;
    std::fs::write(&paths.summary, serde_json::to_string_pretty(res)? + "\n")?;
    Ok(paths)
}

fn write_rows<W: std::io::Write, T: Serialize>(w: &mut csv::Writer<W>, rows: &[T], header: &[&str]) -> Result<()> {
    if rows.is_empty() {
        // Header only, so empty results still parse.
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    Ok(())
}

pub const BOUNDS_COLUMNS: [&str; 7] = ["n", "d", "lambda", "eps", "h_lower", "h_upper", "cover_upper"];

pub const TRIAL_COLUMNS: [&str; 15] = [
    "n",
    "multiplier",
    "length",
    "replicate",
    "graph_seed",
    "trial",
    "walk_seed",
    "start",
    "value",
    "aux",
    "hits",
    "attempts",
    "censored",
    "note",
    "error",
];

pub fn read_trial_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(LabError::from)).collect()
}

pub fn read_bounds_csv(path: &Path) -> Result<Vec<BoundsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(LabError::from)).collect()
}

/// Reads a persisted summary, without the skipped per-trial rows.
pub fn read_summary(path: &Path) -> Result<ExperimentResult> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

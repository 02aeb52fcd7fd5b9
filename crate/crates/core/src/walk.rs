//! Simple random walk simulation and the statistics read off a walk:
//! cover, strong cover, blanket time, visit counts, return probes.
//!
//! Conventions: a walk of length `L` has positions `X_0..=X_L`; visit counts
//! include `X_0`, so they sum to `L + 1`. Trial `i` of an experiment with
//! master seed `s` draws from the stream `rng::split(s, i)`, so results do
//! not depend on how trials are scheduled across threads.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::graph::Graph;
use crate::rng::{rng_from_seed, split, LabRng};
use crate::stats::{clopper_pearson, Summary};

/// Graphs up to this size have every start swept in worst-start mode.
pub const START_SWEEP_LIMIT: usize = 200;
pub const DEFAULT_SAMPLED_STARTS: usize = 32;

struct Walker<'g> {
    g: &'g Graph,
    pos: usize,
    rng: LabRng,
}

impl<'g> Walker<'g> {
    fn new(g: &'g Graph, start: usize, seed: u64) -> Result<Self> {
        g.check_vertex(start)?;
        if g.degree(start) == 0 {
            return Err(LabError::Precondition(format!("start vertex {start} is isolated")));
        }
        Ok(Self {
            g,
            pos: start,
            rng: rng_from_seed(seed),
        })
    }

    #[inline]
    fn step(&mut self) -> usize {
        let nb = self.g.neighbors(self.pos);
        self.pos = nb[self.rng.gen_range(0..nb.len())];
        self.pos
    }
}

/// An undirected trace edge `(u, v)`, `u < v`, first traversed at `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEdge {
    pub u: usize,
    pub v: usize,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub start: usize,
    pub length: u64,
    pub seed: u64,
    pub end: usize,
    /// `gamma(v)`: number of `t in 0..=L` with `X_t = v`.
    pub visit_counts: Vec<u64>,
    pub first_visit_step: Vec<Option<u64>>,
    /// Distinct traversed edges in order of first traversal.
    pub trace_edges: Vec<TraceEdge>,
}

impl WalkTrace {
    pub fn n(&self) -> usize {
        self.visit_counts.len()
    }

    /// Step at which the last vertex was first reached.
    pub fn cover_step(&self) -> Option<u64> {
        self.first_visit_step
            .iter()
            .try_fold(0u64, |acc, s| s.map(|s| acc.max(s)))
    }

    pub fn stats(&self) -> CoverStats {
        CoverStats {
            cover_step: self.cover_step(),
            min_visit_ratio: min_visit_ratio(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverStats {
    pub cover_step: Option<u64>,
    pub min_visit_ratio: f64,
}

pub fn simulate_walk(g: &Graph, start: usize, length: u64, seed: u64) -> Result<WalkTrace> {
    let n = g.n();
    let mut walker = Walker::new(g, start, seed)?;
    let mut visit_counts = vec![0u64; n];
    let mut first_visit_step = vec![None; n];
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut trace_edges = Vec::new();
    visit_counts[start] = 1;
    first_visit_step[start] = Some(0);
    let mut prev = start;
    for t in 1..=length {
        let cur = walker.step();
        visit_counts[cur] += 1;
        if first_visit_step[cur].is_none() {
            first_visit_step[cur] = Some(t);
        }
        let key = (prev.min(cur), prev.max(cur));
        if seen.insert(key) {
            trace_edges.push(TraceEdge {
                u: key.0,
                v: key.1,
                step: t,
            });
        }
        prev = cur;
    }
    Ok(WalkTrace {
        start,
        length,
        seed,
        end: prev,
        visit_counts,
        first_visit_step,
        trace_edges,
    })
}

/// The vertex sequence `X_0..=X_L` drawn from the same stream as
/// [`simulate_walk`] with identical arguments.
pub fn walk_path(g: &Graph, start: usize, length: u64, seed: u64) -> Result<Vec<usize>> {
    let mut walker = Walker::new(g, start, seed)?;
    let mut path = Vec::with_capacity(length as usize + 1);
    path.push(start);
    for _ in 0..length {
        path.push(walker.step());
    }
    Ok(path)
}

/// The graph on `V(g)` whose edges are the traversed edges.
pub fn trace_graph(t: &WalkTrace, g: &Graph) -> Graph {
    trace_graph_prefix(t, g, t.length)
}

/// Trace graph of the first `steps` steps of the walk.
pub fn trace_graph_prefix(t: &WalkTrace, g: &Graph, steps: u64) -> Graph {
    debug_assert_eq!(t.n(), g.n());
    let mut lists = vec![Vec::new(); g.n()];
    for e in t.trace_edges.iter().take_while(|e| e.step <= steps) {
        lists[e.u].push(e.v);
        lists[e.v].push(e.u);
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    Graph::from_sorted_lists(lists)
}

/// `min_v gamma(v) / ln n`; zero when some vertex was never visited.
pub fn min_visit_ratio(t: &WalkTrace) -> f64 {
    let n = t.n();
    if n < 2 {
        return f64::NAN;
    }
    let min = t.visit_counts.iter().copied().min().unwrap_or(0);
    min as f64 / (n as f64).ln()
}

/// Steps until every vertex has been visited, or `None` past `budget`.
pub fn cover_step(g: &Graph, start: usize, seed: u64, budget: u64) -> Result<Option<u64>> {
    let mut walker = Walker::new(g, start, seed)?;
    let mut seen = vec![false; g.n()];
    seen[start] = true;
    let mut remaining = g.n() - 1;
    let mut t = 0;
    while remaining > 0 {
        if t >= budget {
            return Ok(None);
        }
        let v = walker.step();
        t += 1;
        if !seen[v] {
            seen[v] = true;
            remaining -= 1;
        }
    }
    Ok(Some(t))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverOptions {
    pub trials: usize,
    pub seed: u64,
    /// Sweep starts and report the worst per-start mean.
    pub worst_start: bool,
    /// Start vertex when not in worst-start mode.
    pub start: usize,
    /// Starts sampled in worst-start mode when `n > START_SWEEP_LIMIT`.
    pub sampled_starts: usize,
    /// Per-trial step cap; trials hitting it are censored.
    pub budget: u64,
}

impl CoverOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            worst_start: false,
            start: 0,
            sampled_starts: DEFAULT_SAMPLED_STARTS,
            budget: u64::MAX,
        }
    }

    pub fn worst_start(mut self) -> Self {
        self.worst_start = true;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverRecord {
    pub trial: usize,
    pub start: usize,
    pub seed: u64,
    pub cover_step: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverReport {
    pub summary: Summary,
    /// `(start, mean over that start's trials)`.
    pub per_start_mean: Vec<(usize, f64)>,
    pub worst_start: usize,
    pub worst_mean: f64,
    pub records: Vec<CoverRecord>,
}

impl CoverReport {
    pub fn any_censored(&self) -> bool {
        self.summary.censored > 0
    }
}

/// Starts used by worst-start sweeps: all vertices for small graphs,
/// otherwise a seeded sample.
pub fn sweep_starts(n: usize, seed: u64, sampled: usize) -> Vec<usize> {
    if n <= START_SWEEP_LIMIT {
        (0..n).collect()
    } else {
        let mut rng = rng_from_seed(split(seed, u64::MAX));
        let mut s = sample(&mut rng, n, sampled.min(n)).into_vec();
        s.sort_unstable();
        s
    }
}

pub fn cover_time_empirical(g: &Graph, opts: &CoverOptions) -> Result<CoverReport> {
    let starts = if opts.worst_start {
        sweep_starts(g.n(), opts.seed, opts.sampled_starts)
    } else {
        g.check_vertex(opts.start)?;
        vec![opts.start]
    };
    let total = starts.len() * opts.trials;
    let records: Vec<CoverRecord> = (0..total)
        .into_par_iter()
        .map(|trial| {
            let start = starts[trial / opts.trials];
            let seed = split(opts.seed, trial as u64);
            cover_step(g, start, seed, opts.budget).map(|cover_step| CoverRecord {
                trial,
                start,
                seed,
                cover_step,
            })
        })
        .collect::<Result<_>>()?;
    let summary = Summary::from_observations(records.iter().map(|r| r.cover_step.map(|c| c as f64)));
    let per_start_mean: Vec<(usize, f64)> = starts
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let chunk = &records[i * opts.trials..(i + 1) * opts.trials];
            // Censored trials count at the budget, which biases the mean low;
            // the summary flags them.
            let sum: f64 = chunk
                .iter()
                .map(|r| r.cover_step.unwrap_or(opts.budget) as f64)
                .sum();
            (s, sum / chunk.len().max(1) as f64)
        })
        .collect();
    let (worst_start, worst_mean) = per_start_mean
        .iter()
        .copied()
        .fold((starts[0], f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(CoverReport {
        summary,
        per_start_mean,
        worst_start,
        worst_mean,
        records,
    })
}

/// Start vertex of trial `i`: swept round-robin on small graphs, otherwise
/// drawn from the trial's own stream.
fn trial_start(n: usize, trial: usize, seed: u64) -> usize {
    if n <= START_SWEEP_LIMIT {
        trial % n
    } else {
        rng_from_seed(split(seed, u64::MAX - 1 - trial as u64)).gen_range(0..n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongCoverEstimate {
    pub length: u64,
    pub trials: usize,
    pub covered: usize,
    pub fraction: f64,
    pub ci99: (f64, f64),
}

/// Fraction of walks of length `length` that cover the graph.
pub fn strong_cover_estimate(g: &Graph, length: u64, trials: usize, seed: u64) -> Result<StrongCoverEstimate> {
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let start = trial_start(g.n(), i, seed);
            cover_step(g, start, split(seed, i as u64), length).map(|c| c.is_some())
        })
        .collect::<Result<_>>()?;
    let covered = outcomes.iter().filter(|&&c| c).count();
    Ok(StrongCoverEstimate {
        length,
        trials,
        covered,
        fraction: if trials > 0 { covered as f64 / trials as f64 } else { 0.0 },
        ci99: clopper_pearson(covered as u64, trials as u64, 0.99),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlanketOutcome {
    pub cover_step: Option<u64>,
    /// First `t` with `min_v gamma_t(v) >= delta t / n`; `None` if censored.
    pub blanket_time: Option<u64>,
}

pub fn blanket_time(g: &Graph, start: usize, delta: f64, seed: u64, budget: u64) -> Result<BlanketOutcome> {
    if g.regular_degree().is_none() {
        return Err(LabError::NotRegular);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LabError::Precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = g.n();
    let mut walker = Walker::new(g, start, seed)?;
    let mut gamma = vec![0u64; n];
    // hist[k] = number of vertices with gamma == k.
    let mut hist: Vec<usize> = vec![n, 0];
    let mut min_count = 0u64;
    let bump = |v: usize, gamma: &mut Vec<u64>, hist: &mut Vec<usize>, min_count: &mut u64| {
        let old = gamma[v] as usize;
        gamma[v] += 1;
        hist[old] -= 1;
        if hist.len() <= old + 1 {
            hist.push(0);
        }
        hist[old + 1] += 1;
        while hist[*min_count as usize] == 0 {
            *min_count += 1;
        }
    };
    bump(start, &mut gamma, &mut hist, &mut min_count);
    let mut cover = if n == 1 { Some(0) } else { None };
    let rate = delta / n as f64;
    let mut t = 0u64;
    loop {
        if cover.is_some() && min_count as f64 >= rate * t as f64 {
            return Ok(BlanketOutcome {
                cover_step: cover,
                blanket_time: Some(t),
            });
        }
        if t >= budget {
            return Ok(BlanketOutcome {
                cover_step: cover,
                blanket_time: None,
            });
        }
        let v = walker.step();
        t += 1;
        bump(v, &mut gamma, &mut hist, &mut min_count);
        if cover.is_none() && min_count >= 1 {
            cover = Some(t);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnProbeResult {
    pub u: usize,
    pub v: usize,
    pub horizon: u64,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub confidence: f64,
    pub ci: (f64, f64),
}

/// `floor(n / sqrt(C))`.
pub fn return_horizon(n: usize, c: f64) -> u64 {
    (n as f64 / c.sqrt()).floor() as u64
}

/// `ceil(10 ln n)`.
pub fn segment_burn_in(n: usize) -> u64 {
    (10.0 * (n as f64).ln()).ceil() as u64
}

/// Estimates the probability that a walk from `u` visits `v` within
/// `horizon` steps, with an exact Clopper-Pearson interval.
pub fn return_probe(
    g: &Graph,
    u: usize,
    v: usize,
    horizon: u64,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<ReturnProbeResult> {
    g.check_vertex(v)?;
    if u == v {
        return Err(LabError::Precondition("return_probe needs u != v".into()));
    }
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut w = Walker::new(g, u, split(seed, i))?;
            Ok((0..horizon).any(|_| w.step() == v))
        })
        .collect::<Result<_>>()?;
    let hits = hits.iter().filter(|&&h| h).count() as u64;
    Ok(ReturnProbeResult {
        u,
        v,
        horizon,
        trials,
        hits,
        estimate: if trials > 0 { hits as f64 / trials as f64 } else { 0.0 },
        confidence,
        ci: clopper_pearson(hits, trials, confidence),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub length: u64,
    pub target: usize,
    /// Burn-in at the start of each segment, `ceil(10 ln n)`.
    pub burn_in: u64,
    /// Observation window after the burn-in, `floor(n / sqrt(C))`.
    pub window: u64,
    pub segments: u64,
    pub segment_hits: u64,
    pub hit_frequency: f64,
    pub hit_ci99: (f64, f64),
    /// `(1 - 0.2 eps) / sqrt(C)`, the per-segment target rate.
    pub reference_rate: f64,
    pub rho_hat: Summary,
    pub rho_positive_fraction: f64,
}

/// Splits each walk into segments of `ceil(10 ln n) + floor(n/sqrt(C))` steps
/// and records whether `target` is visited inside the window that follows
/// each segment's burn-in. Also collects `rho_hat` of every walk.
pub fn segmented_visit_experiment(
    g: &Graph,
    length: u64,
    c: f64,
    eps: f64,
    target: usize,
    trials: usize,
    seed: u64,
) -> Result<SegmentReport> {
    g.check_vertex(target)?;
    let n = g.n();
    let burn_in = segment_burn_in(n);
    let window = return_horizon(n, c);
    if burn_in + window == 0 {
        return Err(LabError::Precondition("segment length is zero".into()));
    }
    let per_trial: Vec<SegmentTrial> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let start = trial_start(n, i, seed);
            segment_trial(g, start, length, split(seed, i as u64), burn_in, window, target)
        })
        .collect::<Result<_>>()?;
    let segments: u64 = per_trial.iter().map(|p| p.segments).sum();
    let segment_hits: u64 = per_trial.iter().map(|p| p.hits).sum();
    let rho_positive = per_trial.iter().filter(|p| p.rho_hat > 0.0).count();
    Ok(SegmentReport {
        length,
        target,
        burn_in,
        window,
        segments,
        segment_hits,
        hit_frequency: if segments > 0 { segment_hits as f64 / segments as f64 } else { 0.0 },
        hit_ci99: clopper_pearson(segment_hits, segments, 0.99),
        reference_rate: (1.0 - 0.2 * eps) / c.sqrt(),
        rho_hat: Summary::from_observations(per_trial.iter().map(|p| Some(p.rho_hat))),
        rho_positive_fraction: if trials > 0 { rho_positive as f64 / trials as f64 } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentTrial {
    pub segments: u64,
    /// Segments whose post-burn-in window visited the target.
    pub hits: u64,
    pub rho_hat: f64,
    pub cover_step: Option<u64>,
}

/// One walk of the segmented experiment. Segments have `burn_in + window`
/// steps; a trailing partial segment is dropped.
pub fn segment_trial(
    g: &Graph,
    start: usize,
    length: u64,
    seed: u64,
    burn_in: u64,
    window: u64,
    target: usize,
) -> Result<SegmentTrial> {
    g.check_vertex(target)?;
    let n = g.n();
    let seg_len = burn_in + window;
    if seg_len == 0 {
        return Err(LabError::Precondition("segment length is zero".into()));
    }
    let mut w = Walker::new(g, start, seed)?;
    let mut gamma = vec![0u64; n];
    gamma[start] = 1;
    let mut unseen = n - 1;
    let mut cover_step = (unseen == 0).then_some(0);
    let (mut segments, mut hits, mut hit_here) = (0u64, 0u64, false);
    for t in 1..=length {
        let x = w.step();
        if gamma[x] == 0 {
            unseen -= 1;
            if unseen == 0 {
                cover_step = Some(t);
            }
        }
        gamma[x] += 1;
        let offset = (t - 1) % seg_len + 1;
        if x == target && offset >= burn_in {
            hit_here = true;
        }
        if offset == seg_len {
            segments += 1;
            hits += u64::from(hit_here);
            hit_here = false;
        }
    }
    let min = gamma.iter().copied().min().unwrap_or(0);
    Ok(SegmentTrial {
        segments,
        hits,
        rho_hat: min as f64 / (n as f64).ln(),
        cover_step,
    })
}

/// Endpoint `X_t` of a walk; used to sample the step distribution.
pub fn walk_endpoint(g: &Graph, start: usize, steps: u64, seed: u64) -> Result<usize> {
    let mut w = Walker::new(g, start, seed)?;
    for _ in 0..steps {
        w.step();
    }
    Ok(w.pos)
}

use serde::{Deserialize, Serialize};

use super::cycle::{hamiltonian_exact, hamiltonian_posa, PosaOptions, SUBSET_DP_LIMIT};
use crate::error::Result;
use crate::graph::Graph;
use crate::rng::split;
use crate::walk::{simulate_walk, trace_graph_prefix, WalkTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauLabel {
    /// Every probe was decided exactly.
    Exact,
    /// Some probe relied on a heuristic failure; `tau_hc` is an upper bound.
    HeuristicUpperBound,
    /// The full trace is not (known to be) Hamiltonian.
    Censored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauResult {
    /// First step at which the trace has minimum degree 1.
    pub tau_1: Option<u64>,
    /// First step at which the trace has minimum degree 2.
    pub tau_2: Option<u64>,
    /// First step at which the trace is Hamiltonian.
    pub tau_hc: Option<u64>,
    pub label: TauLabel,
    pub probes: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct TauOptions {
    /// Node budget for backtracking probes on graphs beyond the DP limit.
    pub exact_budget: u64,
    pub posa: PosaOptions,
}

impl Default for TauOptions {
    fn default() -> Self {
        Self {
            exact_budget: 1_000_000,
            posa: PosaOptions::default(),
        }
    }
}

/// First step at which every vertex has trace degree at least `k`.
pub fn min_degree_time(trace: &WalkTrace, k: usize) -> Option<u64> {
    let n = trace.n();
    let mut deg = vec![0usize; n];
    let mut short = n;
    if k == 0 {
        return Some(0);
    }
    for e in &trace.trace_edges {
        for v in [e.u, e.v] {
            deg[v] += 1;
            if deg[v] == k {
                short -= 1;
            }
        }
        if short == 0 {
            return Some(e.step);
        }
    }
    None
}

enum Probe {
    Yes,
    No { exact: bool },
}

fn probe(g: &Graph, trace: &WalkTrace, steps: u64, seed: u64, opts: &TauOptions) -> Probe {
    let prefix = trace_graph_prefix(trace, g, steps);
    if prefix.n() <= SUBSET_DP_LIMIT {
        return if hamiltonian_exact(&prefix, opts.exact_budget).found() {
            Probe::Yes
        } else {
            Probe::No { exact: true }
        };
    }
    if hamiltonian_posa(&prefix, split(seed, steps), &opts.posa).found() {
        Probe::Yes
    } else {
        Probe::No { exact: false }
    }
}

/// Simulates one walk of `max_length` steps and locates `tau_1` and
/// `tau_HC` of its trace. Hamiltonicity of trace prefixes is monotone in the
/// prefix length, so `tau_HC` is found by bisection over the steps at which
/// new trace edges appear, starting from the minimum-degree-2 time.
pub fn tau_times(g: &Graph, start: usize, max_length: u64, seed: u64, opts: &TauOptions) -> Result<TauResult> {
    let trace = simulate_walk(g, start, max_length, seed)?;
    let tau_1 = min_degree_time(&trace, 1);
    let tau_2 = min_degree_time(&trace, 2);
    let mut result = TauResult {
        tau_1,
        tau_2,
        tau_hc: None,
        label: TauLabel::Censored,
        probes: 0,
    };
    let Some(lower) = tau_2 else {
        return Ok(result);
    };
    // Candidate prefix ends: steps that add a trace edge, from tau_2 on.
    let steps: Vec<u64> = trace
        .trace_edges
        .iter()
        .map(|e| e.step)
        .filter(|&s| s >= lower)
        .collect();
    let mut heuristic = false;
    result.probes += 1;
    match probe(g, &trace, max_length, seed, opts) {
        Probe::Yes => {}
        Probe::No { .. } => return Ok(result),
    }
    let (mut lo, mut hi) = (0usize, steps.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        result.probes += 1;
        match probe(g, &trace, steps[mid], seed, opts) {
            Probe::Yes => hi = mid,
            Probe::No { exact } => {
                heuristic |= !exact;
                lo = mid + 1;
            }
        }
    }
    result.tau_hc = Some(steps[lo]);
    result.label = if heuristic {
        TauLabel::HeuristicUpperBound
    } else {
        TauLabel::Exact
    };
    Ok(result)
}

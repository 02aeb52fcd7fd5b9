//! Hamilton cycle search: an exact oracle (subset DP up to 24 vertices,
//! pruned backtracking beyond) and the rotation-extension heuristic.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{connectivity_profile, Graph};
use crate::rng::{rng_from_seed, split};

/// Largest `n` handled by the subset DP.
pub const SUBSET_DP_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleStatus {
    Found,
    ProvenAbsent,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleMethod {
    Exact,
    Posa,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleResult {
    pub status: CycleStatus,
    pub cycle: Option<Vec<usize>>,
    pub method: CycleMethod,
    /// DP states, search nodes, or rotations, depending on the method.
    pub work: u64,
    pub restarts: u32,
}

impl CycleResult {
    pub fn found(&self) -> bool {
        self.status == CycleStatus::Found
    }

    fn absent(method: CycleMethod, work: u64) -> Self {
        Self {
            status: CycleStatus::ProvenAbsent,
            cycle: None,
            method,
            work,
            restarts: 0,
        }
    }
}

/// True iff `cycle` lists every vertex exactly once and cyclically
/// consecutive entries are adjacent.
pub fn verify_cycle(g: &Graph, cycle: &[usize]) -> bool {
    let n = g.n();
    if n < 3 || cycle.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in cycle {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    (0..n).all(|i| g.has_edge(cycle[i], cycle[(i + 1) % n]))
}

/// Exhaustive search. `budget` caps backtracking nodes when
/// `n > SUBSET_DP_LIMIT`; the subset DP always runs to completion.
pub fn hamiltonian_exact(g: &Graph, budget: u64) -> CycleResult {
    let n = g.n();
    if n < 3 || g.min_degree() < 2 || !connectivity_profile(g).connected || has_cut_vertex(g) {
        return CycleResult::absent(CycleMethod::Exact, 0);
    }
    let result = if n <= SUBSET_DP_LIMIT {
        subset_dp(g)
    } else {
        backtrack(g, budget)
    };
    debug_assert!(result.cycle.as_ref().is_none_or(|c| verify_cycle(g, c)));
    result
}

/// Iterative Hopcroft-Tarjan articulation test. Assumes `g` is connected.
fn has_cut_vertex(g: &Graph) -> bool {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut root_children = 0;
    // (vertex, parent, next neighbor index)
    let mut stack = vec![(0usize, usize::MAX, 0usize)];
    disc[0] = 0;
    low[0] = 0;
    let mut clock = 1;
    while let Some(&mut (v, parent, ref mut i)) = stack.last_mut() {
        if let Some(&w) = g.neighbors(v).get(*i) {
            *i += 1;
            if disc[w] == usize::MAX {
                disc[w] = clock;
                low[w] = clock;
                clock += 1;
                if v == 0 {
                    root_children += 1;
                }
                stack.push((w, v, 0));
            } else if w != parent {
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if parent != usize::MAX {
                low[parent] = low[parent].min(low[v]);
                if parent != 0 && low[v] >= disc[parent] {
                    return true;
                }
            }
        }
    }
    root_children > 1
}

/// `reach[S]` holds the endpoints `e` of paths that start at vertex 0 and
/// visit exactly `{0} ∪ S`. Vertex `v > 0` is bit `v - 1`.
fn subset_dp(g: &Graph) -> CycleResult {
    let n = g.n();
    let m = n - 1;
    let adj: Vec<u32> = (1..n)
        .map(|v| {
            g.neighbors(v)
                .iter()
                .filter(|&&w| w != 0)
                .fold(0u32, |acc, &w| acc | 1 << (w - 1))
        })
        .collect();
    let start_adj: u32 = g
        .neighbors(0)
        .iter()
        .fold(0u32, |acc, &w| acc | 1 << (w - 1));
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut reach = vec![0u32; full as usize + 1];
    for mask in 1..=full {
        let mut out = 0u32;
        if mask.count_ones() == 1 {
            out = mask & start_adj;
        } else {
            let mut bits = mask;
            while bits != 0 {
                let w = bits.trailing_zeros();
                let bit = 1u32 << w;
                if reach[(mask ^ bit) as usize] & adj[w as usize] != 0 {
                    out |= bit;
                }
                bits &= bits - 1;
            }
        }
        reach[mask as usize] = out;
    }
    let work = full as u64;
    let closing = reach[full as usize] & start_adj;
    if closing == 0 {
        return CycleResult::absent(CycleMethod::Exact, work);
    }
    let mut cycle = Vec::with_capacity(n);
    let mut mask = full;
    let mut end = closing.trailing_zeros();
    loop {
        cycle.push(end as usize + 1);
        let prev = mask ^ (1 << end);
        if prev == 0 {
            break;
        }
        let options = reach[prev as usize] & adj[end as usize];
        mask = prev;
        end = options.trailing_zeros();
    }
    cycle.push(0);
    cycle.reverse();
    CycleResult {
        status: CycleStatus::Found,
        cycle: Some(cycle),
        method: CycleMethod::Exact,
        work,
        restarts: 0,
    }
}

struct Backtracker<'g> {
    g: &'g Graph,
    on_path: Vec<bool>,
    path: Vec<usize>,
    /// Number of neighbors of each vertex that are off the path.
    free_degree: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<'g> Backtracker<'g> {
    fn enter(&mut self, v: usize) {
        self.on_path[v] = true;
        self.path.push(v);
        for &w in self.g.neighbors(v) {
            self.free_degree[w] -= 1;
        }
    }

    fn leave(&mut self) {
        let v = self.path.pop().expect("non-empty path");
        self.on_path[v] = false;
        for &w in self.g.neighbors(v) {
            self.free_degree[w] += 1;
        }
    }

    /// Off-path vertices need two usable neighbors (off-path, the current
    /// end, or the start), and together with the end they must be connected.
    fn feasible(&self) -> bool {
        let n = self.g.n();
        let end = *self.path.last().expect("non-empty path");
        let start = self.path[0];
        for &w in self.g.neighbors(end) {
            if !self.on_path[w] {
                let closes = usize::from(self.path.len() > 1 && self.g.has_edge(w, start));
                let usable = self.free_degree[w] + 1 + closes;
                if usable < 2 {
                    return false;
                }
            }
        }
        let remaining = n - self.path.len();
        if remaining == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![end];
        seen[end] = true;
        let mut reached = 0;
        while let Some(u) = stack.pop() {
            for &w in self.g.neighbors(u) {
                if !seen[w] && !self.on_path[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == remaining
    }

    fn search(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return false;
        }
        let end = *self.path.last().expect("non-empty path");
        if self.path.len() == self.g.n() {
            return self.g.has_edge(end, self.path[0]);
        }
        if !self.feasible() {
            return false;
        }
        let mut next: Vec<usize> = self
            .g
            .neighbors(end)
            .iter()
            .copied()
            .filter(|&w| !self.on_path[w])
            .collect();
        // Most constrained first; ties by index.
        next.sort_by_key(|&w| (self.free_degree[w], w));
        for w in next {
            self.enter(w);
            if self.search() {
                return true;
            }
            self.leave();
            if self.exhausted {
                return false;
            }
        }
        false
    }
}

fn backtrack(g: &Graph, budget: u64) -> CycleResult {
    let n = g.n();
    // Start from a minimum-degree vertex: every cycle passes through it.
    let start = (0..n).min_by_key(|&v| (g.degree(v), v)).unwrap_or(0);
    let mut bt = Backtracker {
        g,
        on_path: vec![false; n],
        path: Vec::with_capacity(n),
        free_degree: g.degrees(),
        nodes: 0,
        budget,
        exhausted: false,
    };
    bt.enter(start);
    let found = bt.search();
    let status = if found {
        CycleStatus::Found
    } else if bt.exhausted {
        CycleStatus::BudgetExhausted
    } else {
        CycleStatus::ProvenAbsent
    };
    CycleResult {
        status,
        cycle: found.then(|| bt.path.clone()),
        method: CycleMethod::Exact,
        work: bt.nodes,
        restarts: 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosaOptions {
    /// Rotations allowed per attempt; `None` means `100 n`.
    pub max_rotations: Option<u64>,
    pub max_restarts: u32,
}

impl Default for PosaOptions {
    fn default() -> Self {
        Self {
            max_rotations: None,
            max_restarts: 50,
        }
    }
}

/// Rotation-extension search. The path grows from its end; when the end has
/// no neighbor off the path, either the path closes into a cycle that is
/// reopened toward an outside vertex, or a rotation at a random path
/// neighbor of the end produces a new end.
pub fn hamiltonian_posa(g: &Graph, seed: u64, opts: &PosaOptions) -> CycleResult {
    let n = g.n();
    let max_rot = opts.max_rotations.unwrap_or(100 * n as u64);
    let mut work = 0u64;
    let exhausted = |work, restarts| CycleResult {
        status: CycleStatus::BudgetExhausted,
        cycle: None,
        method: CycleMethod::Posa,
        work,
        restarts,
    };
    if n < 3 || g.min_degree() < 2 {
        return exhausted(0, 0);
    }
    let mut pos = vec![usize::MAX; n];
    let mut candidates = Vec::new();
    for attempt in 0..=opts.max_restarts {
        let mut rng = rng_from_seed(split(seed, attempt as u64));
        pos.iter_mut().for_each(|p| *p = usize::MAX);
        let first = rng.gen_range(0..n);
        let mut path = vec![first];
        pos[first] = 0;
        let mut rotations = 0u64;
        loop {
            let end = *path.last().expect("non-empty path");
            candidates.clear();
            candidates.extend(g.neighbors(end).iter().copied().filter(|&w| pos[w] == usize::MAX));
            if !candidates.is_empty() {
                let w = candidates[rng.gen_range(0..candidates.len())];
                pos[w] = path.len();
                path.push(w);
                continue;
            }
            if g.has_edge(end, path[0]) && path.len() >= 3 {
                if path.len() == n {
                    debug_assert!(verify_cycle(g, &path));
                    if verify_cycle(g, &path) {
                        return CycleResult {
                            status: CycleStatus::Found,
                            cycle: Some(path),
                            method: CycleMethod::Posa,
                            work: work + rotations,
                            restarts: attempt,
                        };
                    }
                }
                // Reopen the cycle next to a vertex with an outside neighbor.
                let exit = path.iter().enumerate().find_map(|(i, &x)| {
                    g.neighbors(x)
                        .iter()
                        .find(|&&y| pos[y] == usize::MAX)
                        .map(|&y| (i, y))
                });
                if let Some((i, y)) = exit {
                    let mut reopened = Vec::with_capacity(path.len() + 1);
                    reopened.extend_from_slice(&path[i + 1..]);
                    reopened.extend_from_slice(&path[..=i]);
                    reopened.push(y);
                    path = reopened;
                    for (k, &v) in path.iter().enumerate() {
                        pos[v] = k;
                    }
                    rotations += 1;
                    if rotations >= max_rot {
                        break;
                    }
                    continue;
                }
            }
            // Rotate at a path neighbor other than the predecessor.
            let last = path.len() - 1;
            candidates.clear();
            candidates.extend(
                g.neighbors(end)
                    .iter()
                    .copied()
                    .filter(|&w| pos[w] != usize::MAX && pos[w] + 1 < last),
            );
            if candidates.is_empty() || rotations >= max_rot {
                break;
            }
            let pivot = pos[candidates[rng.gen_range(0..candidates.len())]];
            path[pivot + 1..].reverse();
            for (k, &v) in path.iter().enumerate().skip(pivot + 1) {
                pos[v] = k;
            }
            rotations += 1;
        }
        work += rotations;
    }
    exhausted(work, opts.max_restarts)
}

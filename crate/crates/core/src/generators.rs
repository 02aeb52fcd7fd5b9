//! Graph families: random regular graphs, classical fixtures, and the
//! clique-with-two-pendants construction whose cover time is far above
//! `n log n` despite being a good expander.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::graph::Graph;
use crate::rng::rng_from_seed;

/// Default number of full restarts allowed to the pairing sampler.
pub const DEFAULT_MAX_RESTARTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    Complete,
    Cycle,
    Path,
    Petersen,
}

impl std::str::FromStr for Fixture {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(Self::Complete),
            "cycle" => Ok(Self::Cycle),
            "path" => Ok(Self::Path),
            "petersen" => Ok(Self::Petersen),
            other => Err(LabError::Config(format!("unknown fixture tag {other:?}"))),
        }
    }
}

/// Serializable description of a graph to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GenSpec {
    RandomRegular {
        n: usize,
        d: usize,
        #[serde(default)]
        seed: u64,
    },
    Complete {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Path {
        n: usize,
    },
    Petersen,
    Counterexample {
        n: usize,
        c: usize,
    },
}

impl GenSpec {
    pub fn n(&self) -> usize {
        match *self {
            Self::RandomRegular { n, .. }
            | Self::Complete { n }
            | Self::Cycle { n }
            | Self::Path { n }
            | Self::Counterexample { n, .. } => n,
            Self::Petersen => 10,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Self::RandomRegular { .. })
    }

    /// Same family with a different vertex count.
    pub fn with_n(&self, n: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::RandomRegular { n: m, .. }
            | Self::Complete { n: m }
            | Self::Cycle { n: m }
            | Self::Path { n: m }
            | Self::Counterexample { n: m, .. } => *m = n,
            Self::Petersen => {}
        }
        out
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        if let Self::RandomRegular { seed: s, .. } = &mut out {
            *s = seed;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::RandomRegular { n, d, .. } => {
                if n == 0 || d == 0 {
                    return Err(LabError::Config("random_regular needs n, d > 0".into()));
                }
                if d >= n || (n * d) % 2 != 0 {
                    return Err(LabError::Config(format!(
                        "random_regular needs d < n and n*d even (n = {n}, d = {d})"
                    )));
                }
            }
            Self::Counterexample { n, c } => {
                if c == 0 || 2 * c + 2 > n {
                    return Err(LabError::Config(format!(
                        "counterexample needs 1 <= C and 2C <= n - 2 (n = {n}, C = {c})"
                    )));
                }
                let cap = 1.1 * n as f64 / (n as f64).ln();
                if c as f64 > cap {
                    return Err(LabError::Config(format!(
                        "counterexample needs C <= 1.1 n / log n = {cap:.3}"
                    )));
                }
            }
            Self::Complete { n } | Self::Path { n } if n == 0 => {
                return Err(LabError::Config("n must be positive".into()))
            }
            Self::Cycle { n } if n < 3 => {
                return Err(LabError::Config("cycle needs n >= 3".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Graph> {
        self.validate()?;
        match *self {
            Self::RandomRegular { n, d, seed } => random_regular(n, d, seed),
            Self::Complete { n } => fixture(Fixture::Complete, n),
            Self::Cycle { n } => fixture(Fixture::Cycle, n),
            Self::Path { n } => fixture(Fixture::Path, n),
            Self::Petersen => fixture(Fixture::Petersen, 10),
            Self::Counterexample { n, c } => counterexample_expander(n, c),
        }
    }
}

/// Samples a simple `d`-regular graph on `n` vertices from the pairing model.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    random_regular_with_budget(n, d, seed, DEFAULT_MAX_RESTARTS)
}

/// Pairing-model sampler with per-pair rejection.
///
/// Each round shuffles the unmatched half-edges and pairs them off in order.
/// A pair that would create a loop or a repeated edge is returned to the pool
/// and the pool is reshuffled in the next round. When no admissible pair is
/// left in the pool the whole pairing is discarded and counts as one restart.
pub fn random_regular_with_budget(n: usize, d: usize, seed: u64, max_restarts: usize) -> Result<Graph> {
    if d >= n || !(n * d).is_multiple_of(2) {
        return Err(LabError::Precondition(format!(
            "random_regular needs d < n and n*d even (n = {n}, d = {d})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut restarts = 0;
    'restart: loop {
        let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        while !stubs.is_empty() {
            stubs.shuffle(&mut rng);
            let mut rest = Vec::new();
            for pair in stubs.chunks_exact(2) {
                let (u, v) = (pair[0], pair[1]);
                if u != v && !adj[u].contains(&v) {
                    adj[u].push(v);
                    adj[v].push(u);
                } else {
                    rest.extend_from_slice(pair);
                }
            }
            if !rest.is_empty() && !has_admissible_pair(&rest, &adj) {
                restarts += 1;
                if restarts > max_restarts {
                    return Err(LabError::GenerationFailed { restarts: max_restarts });
                }
                continue 'restart;
            }
            stubs = rest;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        return Ok(Graph::from_sorted_lists(adj));
    }
}

fn has_admissible_pair(stubs: &[usize], adj: &[Vec<usize>]) -> bool {
    let mut distinct: Vec<usize> = stubs.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct.iter().enumerate().any(|(i, &u)| {
        distinct[i + 1..].iter().any(|&v| !adj[u].contains(&v))
    })
}

/// `K_{n-2}` on `{2, .., n-1}` plus vertex 0 joined to clique vertices
/// `2..2+c` and vertex 1 joined to `2+c..2+2c`.
pub fn counterexample_expander(n: usize, c: usize) -> Result<Graph> {
    if c == 0 || 2 * c + 2 > n {
        return Err(LabError::Precondition(format!(
            "counterexample needs 1 <= C and 2C <= n - 2 (n = {n}, C = {c})"
        )));
    }
    let mut edges = Vec::with_capacity((n - 2) * (n - 3) / 2 + 2 * c);
    edges.extend((2..2 + c).map(|w| (0, w)));
    edges.extend((2 + c..2 + 2 * c).map(|w| (1, w)));
    for u in 2..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges)
}

pub fn fixture(tag: Fixture, n: usize) -> Result<Graph> {
    let edges: Vec<(usize, usize)> = match tag {
        Fixture::Complete => (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect(),
        Fixture::Cycle => {
            if n < 3 {
                return Err(LabError::Precondition("cycle needs n >= 3".into()));
            }
            (0..n).map(|u| (u, (u + 1) % n)).collect()
        }
        Fixture::Path => (1..n).map(|u| (u - 1, u)).collect(),
        Fixture::Petersen => {
            return Graph::from_edges(
                10,
                &(0..5)
                    .flat_map(|i| [(i, (i + 1) % 5), (i, i + 5), (5 + i, 5 + (i + 2) % 5)])
                    .collect::<Vec<_>>(),
            )
        }
    };
    Graph::from_edges(n, &edges)
}

/// Erdős–Rényi `G(n, p)`; used for oracle sweeps on small dense graphs.
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("gnp edges are simple")
}

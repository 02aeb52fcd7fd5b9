//! Certification of the two C-expander conditions: small sets expand by a
//! factor `c`, and any two disjoint sets of size `n / 2c` are joined by an
//! edge.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::graph::{edges_between, neighborhood, Graph, VertexSet};
use crate::rng::{rng_from_seed, split};

/// Maximum number of subsets an exact check may enumerate.
pub const EXACT_SUBSET_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMode {
    Exact,
    Sampled { k: usize, seed: u64 },
}

impl std::str::FromStr for CertMode {
    type Err = LabError;

    /// `exact` or `sampled:<k>[:<seed>]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("exact"), None, _, _) => Ok(Self::Exact),
            (Some("sampled"), Some(k), seed, None) => {
                let k = k
                    .parse()
                    .map_err(|_| LabError::Config(format!("bad sample count in {s:?}")))?;
                let seed = match seed {
                    Some(x) => x
                        .parse()
                        .map_err(|_| LabError::Config(format!("bad seed in {s:?}")))?,
                    None => 0,
                };
                Ok(Self::Sampled { k, seed })
            }
            _ => Err(LabError::Config(format!("unknown mode {s:?}; use exact or sampled:<k>"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ExpansionOutcome {
    Pass,
    Violation { set: Vec<usize>, neighborhood: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum JoinednessOutcome {
    Pass,
    Violation { a: Vec<usize>, b: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionVerdict {
    pub c: f64,
    /// Largest set size checked, `floor(n / 2c)`.
    pub max_size: usize,
    pub sets_checked: u64,
    pub outcome: ExpansionOutcome,
    pub mode: CertMode,
    /// `false` for sampled passes.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinednessVerdict {
    pub c: f64,
    /// Size of the two sets, `ceil(n / 2c)`.
    pub set_size: usize,
    pub sets_checked: u64,
    pub outcome: JoinednessOutcome,
    pub mode: CertMode,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderVerdict {
    pub c: f64,
    pub expansion: ExpansionVerdict,
    pub joinedness: JoinednessVerdict,
}

impl ExpanderVerdict {
    pub fn passes(&self) -> bool {
        self.expansion.outcome == ExpansionOutcome::Pass && self.joinedness.outcome == JoinednessOutcome::Pass
    }
}

fn check_c(c: f64) -> Result<()> {
    if c >= 1.0 && c.is_finite() {
        Ok(())
    } else {
        Err(LabError::Precondition(format!("expansion parameter must be >= 1, got {c}")))
    }
}

fn binom(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn too_large(size: u64) -> LabError {
    LabError::TooLarge {
        what: "exact subset enumeration",
        size: size.min(usize::MAX as u64) as usize,
        limit: EXACT_SUBSET_BUDGET as usize,
        hint: "use sampled mode",
    }
}

/// Tracks `|N(X)|` while vertices are pushed onto and popped off `X`.
struct NeighborhoodCounter<'g> {
    g: &'g Graph,
    hits: Vec<u32>,
    in_set: Vec<bool>,
    members: Vec<usize>,
    /// `|N(X)|`, external neighborhood size.
    boundary: usize,
}

impl<'g> NeighborhoodCounter<'g> {
    fn new(g: &'g Graph) -> Self {
        Self {
            g,
            hits: vec![0; g.n()],
            in_set: vec![false; g.n()],
            members: Vec::new(),
            boundary: 0,
        }
    }

    fn push(&mut self, v: usize) {
        if self.hits[v] > 0 {
            self.boundary -= 1;
        }
        self.in_set[v] = true;
        self.members.push(v);
        for &w in self.g.neighbors(v) {
            self.hits[w] += 1;
            if self.hits[w] == 1 && !self.in_set[w] {
                self.boundary += 1;
            }
        }
    }

    fn pop(&mut self) {
        let v = self.members.pop().expect("pop on empty set");
        for &w in self.g.neighbors(v) {
            self.hits[w] -= 1;
            if self.hits[w] == 0 && !self.in_set[w] {
                self.boundary -= 1;
            }
        }
        self.in_set[v] = false;
        if self.hits[v] > 0 {
            self.boundary += 1;
        }
    }

    /// Vertices neither in `X` nor adjacent to it.
    fn untouched(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.g.n()).filter(|&v| !self.in_set[v] && self.hits[v] == 0)
    }

    fn untouched_count(&self) -> usize {
        self.g.n() - self.members.len() - self.boundary
    }
}

/// Depth-first enumeration of all subsets of size `1..=max` in lexicographic
/// order. `visit` returns `true` to stop.
fn for_each_subset<F>(counter: &mut NeighborhoodCounter<'_>, next: usize, max: usize, visit: &mut F) -> bool
where
    F: FnMut(&NeighborhoodCounter<'_>) -> bool,
{
    let n = counter.g.n();
    for v in next..n {
        counter.push(v);
        if visit(counter) {
            return true;
        }
        if counter.members.len() < max && for_each_subset(counter, v + 1, max, visit) {
            return true;
        }
        counter.pop();
    }
    false
}

pub fn check_expansion(g: &Graph, c: f64, mode: CertMode) -> Result<ExpansionVerdict> {
    check_c(c)?;
    let n = g.n();
    let max_size = (n as f64 / (2.0 * c)).floor() as usize;
    let mut sets_checked = 0u64;
    let mut outcome = ExpansionOutcome::Pass;
    match mode {
        CertMode::Exact => {
            let total: u64 = (1..=max_size).map(|s| binom(n, s)).fold(0u64, u64::saturating_add);
            if total > EXACT_SUBSET_BUDGET {
                return Err(too_large(total));
            }
            if max_size > 0 {
                let mut counter = NeighborhoodCounter::new(g);
                for_each_subset(&mut counter, 0, max_size, &mut |x| {
                    sets_checked += 1;
                    if (x.boundary as f64) < c * x.members.len() as f64 {
                        let mut set = x.members.clone();
                        set.sort_unstable();
                        outcome = ExpansionOutcome::Violation {
                            set,
                            neighborhood: x.boundary,
                        };
                        return true;
                    }
                    false
                });
            }
        }
        CertMode::Sampled { k, seed } => {
            'sizes: for s in 1..=max_size {
                let mut rng = rng_from_seed(split(seed, s as u64));
                for _ in 0..k {
                    let mut set = sample(&mut rng, n, s).into_vec();
                    set.sort_unstable();
                    let vs = VertexSet::new(set);
                    let nb = neighborhood(g, &vs)?.len();
                    sets_checked += 1;
                    if (nb as f64) < c * s as f64 {
                        outcome = ExpansionOutcome::Violation {
                            set: vs.members().to_vec(),
                            neighborhood: nb,
                        };
                        break 'sizes;
                    }
                }
            }
        }
    }
    let exhaustive = matches!(mode, CertMode::Exact);
    Ok(ExpansionVerdict {
        c,
        max_size,
        sets_checked,
        outcome,
        mode,
        exhaustive,
    })
}

pub fn check_joinedness(g: &Graph, c: f64, mode: CertMode) -> Result<JoinednessVerdict> {
    check_c(c)?;
    let n = g.n();
    let ratio = n as f64 / (2.0 * c);
    if ratio.floor() < 1.0 {
        return Err(LabError::Precondition(format!("n / 2c = {ratio} is below 1")));
    }
    let set_size = ratio.ceil() as usize;
    let mut sets_checked = 0u64;
    let mut outcome = JoinednessOutcome::Pass;
    // A violating pair exists for A exactly when at least `set_size`
    // vertices lie outside A and its neighborhood.
    let witness = |x: &NeighborhoodCounter<'_>| {
        let mut a = x.members.clone();
        a.sort_unstable();
        let b: Vec<usize> = x.untouched().take(set_size).collect();
        JoinednessOutcome::Violation { a, b }
    };
    if 2 * set_size <= n {
        match mode {
            CertMode::Exact => {
                let total = binom(n, set_size);
                if total > EXACT_SUBSET_BUDGET {
                    return Err(too_large(total));
                }
                let mut counter = NeighborhoodCounter::new(g);
                for_each_subset(&mut counter, 0, set_size, &mut |x| {
                    if x.members.len() < set_size {
                        return false;
                    }
                    sets_checked += 1;
                    if x.untouched_count() >= set_size {
                        outcome = witness(x);
                        return true;
                    }
                    false
                });
            }
            CertMode::Sampled { k, seed } => {
                let mut rng = rng_from_seed(seed);
                let mut counter = NeighborhoodCounter::new(g);
                for _ in 0..k {
                    for v in sample(&mut rng, n, set_size).into_vec() {
                        counter.push(v);
                    }
                    sets_checked += 1;
                    let violated = counter.untouched_count() >= set_size;
                    if violated {
                        outcome = witness(&counter);
                    }
                    while !counter.members.is_empty() {
                        counter.pop();
                    }
                    if violated {
                        break;
                    }
                }
            }
        }
    }
    let exhaustive = matches!(mode, CertMode::Exact);
    Ok(JoinednessVerdict {
        c,
        set_size,
        sets_checked,
        outcome,
        mode,
        exhaustive,
    })
}

pub fn certify_expander(g: &Graph, c: f64, mode: CertMode) -> Result<ExpanderVerdict> {
    Ok(ExpanderVerdict {
        c,
        expansion: check_expansion(g, c, mode)?,
        joinedness: check_joinedness(g, c, mode)?,
    })
}

/// Recounts an expansion witness directly from the definition.
pub fn expansion_witness_holds(g: &Graph, c: f64, set: &[usize]) -> Result<bool> {
    let x = VertexSet::new(set.to_vec());
    let max_size = (g.n() as f64 / (2.0 * c)).floor() as usize;
    Ok(!x.is_empty()
        && x.len() <= max_size
        && (neighborhood(g, &x)?.len() as f64) < c * x.len() as f64)
}

/// Recounts a joinedness witness: disjoint, both of size `ceil(n/2c)`, no
/// edge between them.
pub fn joinedness_witness_holds(g: &Graph, c: f64, a: &[usize], b: &[usize]) -> Result<bool> {
    let size = (g.n() as f64 / (2.0 * c)).ceil() as usize;
    let (a, b) = (VertexSet::new(a.to_vec()), VertexSet::new(b.to_vec()));
    Ok(a.len() == size
        && b.len() == size
        && a.is_disjoint(&b)
        && edges_between(g, &a, &b)? == 0)
}

/// Largest `c` in `candidates` (ascending) for which the graph passes.
pub fn largest_passing_c(g: &Graph, candidates: &[f64], mode: CertMode) -> Result<Option<f64>> {
    let mut best = None;
    for &c in candidates {
        if (g.n() as f64 / (2.0 * c)).floor() < 1.0 {
            break;
        }
        if certify_expander(g, c, mode)?.passes() {
            best = Some(c);
        } else {
            break;
        }
    }
    Ok(best)
}

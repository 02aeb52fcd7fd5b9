//! Analytic identities and inequalities relating resistance, hitting times,
//! cover time, mixing and edge distribution on regular graphs.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{LabError, Result};
use crate::graph::{is_connected, Graph};
use crate::rng::rng_from_seed;
use crate::spectral::linalg::solve_dense;
use crate::spectral::{Provenance, ResistanceHittingTable};

/// Largest graph accepted by the dense first-step solver.
pub const HITTING_DENSE_LIMIT: usize = 2000;

/// `H_k = 1 + 1/2 + ... + 1/k`.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

/// Expected hitting times `H(w, target)` for every `w`, from the first-step
/// equations `H(w) = 1 + mean_{x ~ w} H(x)`, `H(target) = 0`.
pub fn hitting_times_to(g: &Graph, target: usize) -> Result<Vec<f64>> {
    g.check_vertex(target)?;
    let n = g.n();
    if n > HITTING_DENSE_LIMIT {
        return Err(LabError::TooLarge {
            what: "dense hitting-time system",
            size: n,
            limit: HITTING_DENSE_LIMIT,
            hint: "use the resistance route instead",
        });
    }
    if !is_connected(g) {
        return Err(LabError::Disconnected);
    }
    // Unknowns are all vertices except the target, packed in order.
    let index = |w: usize| if w < target { w } else { w - 1 };
    let m = n - 1;
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for w in (0..n).filter(|&w| w != target) {
        let i = index(w);
        a[i][i] = g.degree(w) as f64;
        b[i] = g.degree(w) as f64;
        for &x in g.neighbors(w).iter().filter(|&&x| x != target) {
            a[i][index(x)] -= 1.0;
        }
    }
    let sol = solve_dense(a, b)?;
    Ok((0..n)
        .map(|w| if w == target { 0.0 } else { sol[index(w)] })
        .collect())
}

pub fn hitting_time_exact(g: &Graph, u: usize, v: usize) -> Result<f64> {
    g.check_vertex(u)?;
    Ok(hitting_times_to(g, v)?[u])
}

/// Full matrix `H[u][v]` by one dense solve per target.
pub fn hitting_matrix_exact(g: &Graph) -> Result<Vec<Vec<f64>>> {
    let n = g.n();
    let by_target: Vec<Vec<f64>> = (0..n).map(|v| hitting_times_to(g, v)).collect::<Result<_>>()?;
    Ok((0..n).map(|u| (0..n).map(|v| by_target[v][u]).collect()).collect())
}

/// `H(u, v) = 1/2 * sum_w deg(w) (R(u,v) - R(u,w) + R(v,w))`, term by term.
pub fn hitting_time_tetali(table: &ResistanceHittingTable, g: &Graph, u: usize, v: usize) -> Result<f64> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if table.n != g.n() || table.resistance.len() != g.n() {
        return Err(LabError::Precondition(
            "resistance table does not cover the graph".into(),
        ));
    }
    let r = &table.resistance;
    let sum: f64 = (0..g.n())
        .map(|w| g.degree(w) as f64 * (r[u][v] - r[u][w] + r[v][w]))
        .sum();
    Ok(0.5 * sum)
}

/// Fills `table.hitting` from the resistances. Uses the regrouped form
/// `m R(u,v) - S(u)/2 + S(v)/2` with `S(x) = sum_w deg(w) R(x,w)`.
pub fn fill_hitting_tetali(table: &mut ResistanceHittingTable, g: &Graph) -> Result<()> {
    let n = g.n();
    if table.n != n {
        return Err(LabError::Precondition(
            "resistance table does not cover the graph".into(),
        ));
    }
    let m = g.edge_count() as f64;
    let r = &table.resistance;
    let s: Vec<f64> = (0..n)
        .map(|x| (0..n).map(|w| g.degree(w) as f64 * r[x][w]).sum())
        .collect();
    let h = (0..n)
        .map(|u| {
            (0..n)
                .map(|v| if u == v { 0.0 } else { m * r[u][v] - 0.5 * s[u] + 0.5 * s[v] })
                .collect()
        })
        .collect();
    table.hitting = Some(h);
    table.hitting_source = Some(Provenance::Tetali);
    Ok(())
}

/// How many harmonic terms the Matthews lower bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicConvention {
    /// `H_n` on both sides, as usually printed.
    N,
    /// `H_{n-1}` on the lower side; exact for the complete graph.
    #[default]
    NMinusOne,
}

/// Matthews sandwich `(mu_minus * H_k, mu_plus * H_n)` for the cover time.
pub fn matthews_bounds(
    mu_minus: f64,
    mu_plus: f64,
    n: usize,
    convention: HarmonicConvention,
) -> Result<(f64, f64)> {
    if !(0.0 <= mu_minus && mu_minus <= mu_plus) {
        return Err(LabError::Precondition(format!(
            "need 0 <= mu_minus <= mu_plus, got {mu_minus}, {mu_plus}"
        )));
    }
    let k = match convention {
        HarmonicConvention::N => n,
        HarmonicConvention::NMinusOne => n.saturating_sub(1),
    };
    Ok((mu_minus * harmonic(k), mu_plus * harmonic(n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoverBound {
    pub h_lower: f64,
    pub h_upper: f64,
    /// `h_upper * H_n`.
    pub cover_upper: f64,
    /// Whether `(1 - eps/10) n <= h_lower` and `h_upper <= (1 + eps/10) n`.
    pub within_eps: bool,
}

/// Hitting-time sandwich implied by `2/(d+1) <= R(u,v) <= 2/(d - lambda)`
/// through Tetali's identity, and the resulting Matthews cover bound.
pub fn cover_time_spectral_bound(n: usize, d: usize, lambda: f64, eps: f64) -> Result<SpectralCoverBound> {
    let df = d as f64;
    if !(lambda < df) || lambda < 0.0 {
        return Err(LabError::Hypothesis(format!("need 0 <= lambda < d, got lambda = {lambda}, d = {d}")));
    }
    let nf = n as f64;
    let half_nd = 0.5 * nf * df;
    let h_lower = half_nd * (4.0 / (df + 1.0) - 2.0 / (df - lambda));
    let h_upper = half_nd * (4.0 / (df - lambda) - 2.0 / (df + 1.0));
    Ok(SpectralCoverBound {
        h_lower,
        h_upper,
        cover_upper: h_upper * harmonic(n),
        within_eps: (1.0 - 0.1 * eps) * nf <= h_lower && h_upper <= (1.0 + 0.1 * eps) * nf,
    })
}

/// `((ln n)/2 + ln(1/(2 xi))) / (1 - lambda/d)`.
pub fn mixing_time_bound(n: usize, d: usize, lambda: f64, xi: f64) -> Result<f64> {
    let df = d as f64;
    if !(lambda < df) {
        return Err(LabError::Hypothesis(format!("need lambda < d, got {lambda} >= {d}")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(LabError::Precondition(format!("xi must lie in (0, 1), got {xi}")));
    }
    Ok(((n as f64).ln() / 2.0 + (1.0 / (2.0 * xi)).ln()) / (1.0 - lambda / df))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingCheckMode {
    /// Every subset and every disjoint pair; `n <= 16`.
    ExactSmall,
    Sampled { k: usize, seed: u64 },
}

pub const MIXING_EXACT_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingLemmaReport {
    pub mode: MixingCheckMode,
    pub sets_checked: u64,
    pub pairs_checked: u64,
    pub violations: u64,
    /// Max of `|e(S) - d s^2/2n| / (lambda s / 2)`.
    pub max_set_slack: f64,
    /// Max of `|e(S,T) - d s t/n| / (lambda sqrt(st))`.
    pub max_pair_slack: f64,
    pub first_violation: Option<(Vec<usize>, Vec<usize>)>,
}

struct MixingAccumulator {
    d: f64,
    n: f64,
    lambda: f64,
    report: MixingLemmaReport,
}

impl MixingAccumulator {
    fn slack(dev: f64, allowance: f64) -> f64 {
        if allowance > 0.0 {
            dev / allowance
        } else if dev <= 1e-9 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn violates(dev: f64, allowance: f64) -> bool {
        dev > allowance + 1e-9 * (1.0 + allowance)
    }

    fn set(&mut self, s: usize, inner: usize, witness: impl FnOnce() -> Vec<usize>) {
        let sf = s as f64;
        let dev = (inner as f64 - self.d * sf * sf / (2.0 * self.n)).abs();
        let allowance = self.lambda * sf / 2.0;
        let r = &mut self.report;
        r.sets_checked += 1;
        r.max_set_slack = r.max_set_slack.max(Self::slack(dev, allowance));
        if Self::violates(dev, allowance) {
            r.violations += 1;
            if r.first_violation.is_none() {
                r.first_violation = Some((witness(), Vec::new()));
            }
        }
    }

    fn pair(&mut self, s: usize, t: usize, between: usize, witness: impl FnOnce() -> (Vec<usize>, Vec<usize>)) {
        let (sf, tf) = (s as f64, t as f64);
        let dev = (between as f64 - self.d * sf * tf / self.n).abs();
        let allowance = self.lambda * (sf * tf).sqrt();
        let r = &mut self.report;
        r.pairs_checked += 1;
        r.max_pair_slack = r.max_pair_slack.max(Self::slack(dev, allowance));
        if Self::violates(dev, allowance) {
            r.violations += 1;
            if r.first_violation.is_none() {
                r.first_violation = Some(witness());
            }
        }
    }
}

fn mask_members(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// Checks both edge-distribution inequalities of the expander mixing lemma
/// for a `d`-regular graph with second eigenvalue bound `lambda`.
pub fn expander_mixing_check(g: &Graph, lambda: f64, mode: MixingCheckMode) -> Result<MixingLemmaReport> {
    let d = g.regular_degree().ok_or(LabError::NotRegular)?;
    let n = g.n();
    let mut acc = MixingAccumulator {
        d: d as f64,
        n: n as f64,
        lambda,
        report: MixingLemmaReport {
            mode,
            sets_checked: 0,
            pairs_checked: 0,
            violations: 0,
            max_set_slack: 0.0,
            max_pair_slack: 0.0,
            first_violation: None,
        },
    };
    match mode {
        MixingCheckMode::ExactSmall => {
            if n > MIXING_EXACT_LIMIT {
                return Err(LabError::TooLarge {
                    what: "exhaustive mixing-lemma check",
                    size: n,
                    limit: MIXING_EXACT_LIMIT,
                    hint: "use sampled mode",
                });
            }
            let adj: Vec<u32> = (0..n)
                .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
                .collect();
            let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
            for k in 0..=full {
                let s = k.count_ones() as usize;
                let inner: u32 = (0..n)
                    .filter(|&v| k >> v & 1 == 1)
                    .map(|v| (adj[v] & k).count_ones())
                    .sum::<u32>()
                    / 2;
                acc.set(s, inner as usize, || mask_members(k));
                let into_k: Vec<u32> = (0..n).map(|v| (adj[v] & k).count_ones()).collect();
                let rest = full & !k;
                // Non-empty submasks of the complement.
                let mut l = rest;
                while l != 0 {
                    let t = l.count_ones() as usize;
                    let mut between = 0u32;
                    let mut bits = l;
                    while bits != 0 {
                        let v = bits.trailing_zeros() as usize;
                        between += into_k[v];
                        bits &= bits - 1;
                    }
                    acc.pair(s, t, between as usize, || (mask_members(k), mask_members(l)));
                    l = (l - 1) & rest;
                }
            }
        }
        MixingCheckMode::Sampled { k, seed } => {
            let mut rng = rng_from_seed(seed);
            let mut strata = Vec::new();
            let mut s = 1;
            while s <= n / 2 {
                strata.push(s);
                s *= 2;
            }
            if strata.is_empty() {
                return Ok(acc.report);
            }
            let mut mark = vec![0u8; n];
            for i in 0..k {
                let s = strata[i % strata.len()];
                let t = strata[rng.gen_range(0..strata.len())].min(n - s);
                let picked = sample(&mut rng, n, s + t).into_vec();
                let (ks, ls) = picked.split_at(s);
                for &v in ks {
                    mark[v] = 1;
                }
                for &v in ls {
                    mark[v] = 2;
                }
                let inner = ks
                    .iter()
                    .map(|&v| g.neighbors(v).iter().filter(|&&w| mark[w] == 1).count())
                    .sum::<usize>()
                    / 2;
                let between = ls
                    .iter()
                    .map(|&v| g.neighbors(v).iter().filter(|&&w| mark[w] == 1).count())
                    .sum::<usize>();
                let sorted = |xs: &[usize]| {
                    let mut v = xs.to_vec();
                    v.sort_unstable();
                    v
                };
                acc.set(s, inner, || sorted(ks));
                acc.pair(s, t, between, || (sorted(ks), sorted(ls)));
                for &v in &picked {
                    mark[v] = 0;
                }
            }
        }
    }
    Ok(acc.report)
}

/// Which multiplier the binomial lower-tail bound uses in front of the
/// point mass at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailConvention {
    /// `(t + 1) P(X = t)`: one term for each of `0..=t`, each at most `P(X = t)`.
    #[default]
    TermCount,
    /// `t P(X = t)`, as usually printed; undercounts at `t in {0, 1}`.
    Literal,
}

/// Upper bound on `P(Bin(n, p) <= t)` for `t <= np`, in log domain.
pub fn binomial_tail_bound(n: u64, p: f64, t: u64) -> Result<f64> {
    binomial_tail_bound_with(n, p, t, TailConvention::default())
}

pub fn binomial_tail_bound_with(n: u64, p: f64, t: u64, convention: TailConvention) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LabError::Precondition(format!("p must lie in [0, 1], got {p}")));
    }
    if t as f64 > n as f64 * p || t > n {
        return Err(LabError::Hypothesis(format!("need t <= np, got t = {t}, np = {}", n as f64 * p)));
    }
    let mult = match convention {
        TailConvention::TermCount => t + 1,
        TailConvention::Literal => t,
    };
    if mult == 0 {
        return Ok(0.0);
    }
    let ln_pmf = ln_binomial(n, t) + xlogy(t as f64, p) + xlogy((n - t) as f64, 1.0 - p);
    Ok(((mult as f64).ln() + ln_pmf).exp())
}

/// `x ln y` with the convention `0 ln 0 = 0`.
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `E[Z]^2 / E[Z^2]`.
pub fn paley_zygmund_lower(mean: f64, second_moment: f64) -> Result<f64> {
    if !(second_moment > 0.0) {
        return Err(LabError::Precondition("second moment must be positive".into()));
    }
    Ok(mean * mean / second_moment)
}

/// Summary of the analytic bounds for one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub cover_lower: f64,
    pub cover_upper: f64,
    pub xi: f64,
    pub mixing_bound: f64,
    pub harmonic_index_convention: HarmonicConvention,
}

/// Builds a report from the spectral hitting-time sandwich.
pub fn bounds_report(
    n: usize,
    d: usize,
    lambda: f64,
    eps: f64,
    xi: f64,
    convention: HarmonicConvention,
) -> Result<BoundsReport> {
    let sandwich = cover_time_spectral_bound(n, d, lambda, eps)?;
    let mu_minus = sandwich.h_lower.max(0.0);
    let (cover_lower, cover_upper) = matthews_bounds(mu_minus, sandwich.h_upper, n, convention)?;
    Ok(BoundsReport {
        n,
        d,
        lambda,
        mu_minus,
        mu_plus: sandwich.h_upper,
        cover_lower,
        cover_upper,
        xi,
        mixing_bound: mixing_time_bound(n, d, lambda, xi)?,
        harmonic_index_convention: convention,
    })
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{dot, norm, project_mean_zero, symmetric_eigenvalues, tridiagonal_ql};
use crate::error::{LabError, Result};
use crate::graph::Graph;
use crate::rng::rng_from_seed;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;
pub const DEFAULT_DENSE_THRESHOLD: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Rayleigh-quotient residual target for the iterative path.
    pub tol: f64,
    /// Maximum Krylov dimension for the iterative path.
    pub max_iter: usize,
    pub dense_threshold: usize,
    /// Forces a method regardless of `dense_threshold`.
    pub method: Option<EigenMethod>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_EIGEN_TOL,
            max_iter: 3000,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            method: None,
        }
    }
}

/// Extreme non-trivial adjacency eigenvalues of a regular graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub n: usize,
    pub d: usize,
    pub lambda2: f64,
    pub lambda_min: f64,
    /// `max(|lambda2|, |lambda_min|)`.
    pub lambda: f64,
    /// `d / lambda`; infinite when `lambda == 0`.
    pub ratio: f64,
    pub spectral_gap: f64,
    pub method: EigenMethod,
    pub residual: f64,
}

impl SpectralSummary {
    fn new(n: usize, d: usize, lambda2: f64, lambda_min: f64, method: EigenMethod, residual: f64) -> Self {
        let lambda = lambda2.abs().max(lambda_min.abs());
        Self {
            n,
            d,
            lambda2,
            lambda_min,
            lambda,
            ratio: d as f64 / lambda,
            spectral_gap: d as f64 - lambda2,
            method,
            residual,
        }
    }

    /// Whether the graph is an `(n, d, lambda_bound)`-graph.
    pub fn certifies(&self, lambda_bound: f64) -> bool {
        self.lambda <= lambda_bound
    }
}

pub fn eigen_extremes(g: &Graph, opts: &EigenOptions) -> Result<SpectralSummary> {
    let d = g.regular_degree().ok_or(LabError::NotRegular)?;
    let n = g.n();
    if n < 2 {
        return Err(LabError::Precondition("eigen_extremes needs n >= 2".into()));
    }
    let method = opts.method.unwrap_or(if n <= opts.dense_threshold {
        EigenMethod::Dense
    } else {
        EigenMethod::Iterative
    });
    match method {
        EigenMethod::Dense => dense_extremes(g, d),
        EigenMethod::Iterative => lanczos_extremes(g, d, opts),
    }
}

fn dense_extremes(g: &Graph, d: usize) -> Result<SpectralSummary> {
    let n = g.n();
    let ev = symmetric_eigenvalues(g.adjacency_dense())?;
    // ev ascending; the top entry is d for a regular graph.
    let lambda2 = ev[n - 2];
    let lambda_min = ev[0];
    let residual = (ev[n - 1] - d as f64).abs().max(f64::EPSILON * d as f64 * n as f64);
    Ok(SpectralSummary::new(n, d, lambda2, lambda_min, EigenMethod::Dense, residual))
}

fn adjacency_apply(g: &Graph, x: &[f64], out: &mut [f64]) {
    for (v, o) in out.iter_mut().enumerate() {
        *o = g.neighbors(v).iter().map(|&w| x[w]).sum();
    }
}

/// Lanczos with full reorthogonalization on the adjacency operator
/// restricted to the complement of the constant vector. Both ends of the
/// restricted spectrum converge in the same run; convergence is certified by
/// the Ritz residual `|beta_k * s_k|`, which equals `||A x - theta x||`.
fn lanczos_extremes(g: &Graph, d: usize, opts: &EigenOptions) -> Result<SpectralSummary> {
    let n = g.n();
    let max_dim = opts.max_iter.min(n - 1).max(1);
    let mut rng = rng_from_seed(0x5EED_1A2C_0000_0001);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    project_mean_zero(&mut q);
    let q_norm = norm(&q);
    for x in q.iter_mut() {
        *x /= q_norm;
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
    let mut alphas = Vec::with_capacity(max_dim);
    let mut betas: Vec<f64> = Vec::with_capacity(max_dim);
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;
    let scale = d as f64;

    basis.push(q);
    loop {
        let j = basis.len() - 1;
        adjacency_apply(g, &basis[j], &mut w);
        project_mean_zero(&mut w);
        let alpha = dot(&w, &basis[j]);
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
            project_mean_zero(&mut w);
        }
        let beta = norm(&w);
        let dim = basis.len();
        let exhausted = beta <= 1e-12 * scale || dim >= max_dim;

        if exhausted || dim.is_multiple_of(8) {
            let (ritz, last_row) = ritz_pairs(&alphas, &betas)?;
            let (imin, imax) = extreme_indices(&ritz);
            let res_max = (beta * last_row[imax]).abs();
            let res_min = (beta * last_row[imin]).abs();
            let res = res_max.max(res_min);
            best_residual = best_residual.min(res);
            if res <= opts.tol || beta <= 1e-12 * scale {
                return Ok(SpectralSummary::new(
                    n,
                    d,
                    ritz[imax],
                    ritz[imin],
                    EigenMethod::Iterative,
                    res,
                ));
            }
            if dim >= max_dim {
                return Err(LabError::NoConvergence {
                    iterations: dim,
                    residual: best_residual,
                });
            }
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
}

fn ritz_pairs(alphas: &[f64], betas: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = alphas.len();
    let mut diag = alphas.to_vec();
    let mut off: Vec<f64> = betas.iter().copied().take(k - 1).collect();
    off.push(0.0);
    let mut last = vec![vec![0.0; k]];
    last[0][k - 1] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut last)?;
    Ok((diag, last.pop().unwrap_or_default()))
}

fn extreme_indices(values: &[f64]) -> (usize, usize) {
    let mut imin = 0;
    let mut imax = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[imin] {
            imin = i;
        }
        if *v > values[imax] {
            imax = i;
        }
    }
    (imin, imax)
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{dot, norm, project_mean_zero};
use crate::error::{LabError, Result};
use crate::graph::{is_connected, Graph};

pub const DEFAULT_SOLVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    PseudoinverseSolve,
    LinearSystem,
    Tetali,
}

/// All-pairs effective resistances, optionally with hitting times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResistanceHittingTable {
    pub n: usize,
    pub resistance: Vec<Vec<f64>>,
    pub resistance_source: Provenance,
    /// `hitting[u][v]` is the expected time to reach `v` from `u`.
    pub hitting: Option<Vec<Vec<f64>>>,
    pub hitting_source: Option<Provenance>,
}

impl ResistanceHittingTable {
    pub fn r(&self, u: usize, v: usize) -> f64 {
        self.resistance[u][v]
    }
}

fn laplacian_apply(g: &Graph, x: &[f64], out: &mut [f64]) {
    for (v, o) in out.iter_mut().enumerate() {
        let nb = g.neighbors(v);
        *o = nb.len() as f64 * x[v] - nb.iter().map(|&w| x[w]).sum::<f64>();
    }
}

/// Conjugate gradients for `L x = b` on the mean-zero subspace. `b` must sum
/// to zero; iterates are re-projected every step.
pub(crate) fn solve_laplacian(g: &Graph, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = g.n();
    let mut rhs = b.to_vec();
    project_mean_zero(&mut rhs);
    let b_norm = norm(&rhs);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut lp = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let max_iter = 20 * n + 200;
    for _ in 0..max_iter {
        laplacian_apply(g, &p, &mut lp);
        let alpha = rr / dot(&p, &lp);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * lp[i];
        }
        project_mean_zero(&mut x);
        project_mean_zero(&mut r);
        let rr_next = dot(&r, &r);
        if rr_next.sqrt() <= tol * b_norm {
            // Confirm against the true residual, not the recurrence.
            laplacian_apply(g, &x, &mut lp);
            let true_res = lp.iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if true_res <= tol * b_norm {
                return Ok(x);
            }
            r = rhs.iter().zip(&lp).map(|(b, a)| b - a).collect();
            p = r.clone();
            rr = dot(&r, &r);
            continue;
        }
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
    }
    laplacian_apply(g, &x, &mut lp);
    let residual = lp.iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / b_norm;
    Err(LabError::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// `(e_u - e_v)^T L^+ (e_u - e_v)`.
pub fn effective_resistance(g: &Graph, u: usize, v: usize) -> Result<f64> {
    effective_resistance_with_tol(g, u, v, DEFAULT_SOLVE_TOL)
}

pub fn effective_resistance_with_tol(g: &Graph, u: usize, v: usize, tol: f64) -> Result<f64> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v {
        return Err(LabError::Precondition("effective_resistance needs u != v".into()));
    }
    if !is_connected(g) {
        return Err(LabError::Disconnected);
    }
    let mut b = vec![0.0; g.n()];
    b[u] = 1.0;
    b[v] = -1.0;
    let x = solve_laplacian(g, &b, tol)?;
    Ok(x[u] - x[v])
}

/// All-pairs resistances from `n - 1` solves `L x_w = e_w - e_0`.
/// Since `L^+ (e_u - e_v) = x_u - x_v`, every entry is read off the columns.
pub fn resistance_matrix(g: &Graph) -> Result<ResistanceHittingTable> {
    resistance_matrix_with_tol(g, DEFAULT_SOLVE_TOL)
}

pub fn resistance_matrix_with_tol(g: &Graph, tol: f64) -> Result<ResistanceHittingTable> {
    let n = g.n();
    if !is_connected(g) {
        return Err(LabError::Disconnected);
    }
    let mut columns: Vec<Vec<f64>> = (1..n)
        .into_par_iter()
        .map(|w| {
            let mut b = vec![0.0; n];
            b[w] = 1.0;
            b[0] = -1.0;
            solve_laplacian(g, &b, tol)
        })
        .collect::<Result<_>>()?;
    columns.insert(0, vec![0.0; n]);
    let mut resistance = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in u + 1..n {
            let r = columns[u][u] - columns[v][u] - columns[u][v] + columns[v][v];
            resistance[u][v] = r;
            resistance[v][u] = r;
        }
    }
    Ok(ResistanceHittingTable {
        n,
        resistance,
        resistance_source: Provenance::PseudoinverseSolve,
        hitting: None,
        hitting_source: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{fixture, random_regular, Fixture};

    /// Independent oracle: `L^+ = (L + J/n)^{-1} - J/n` by Gauss-Jordan.
    fn pseudoinverse_oracle(g: &Graph) -> Vec<Vec<f64>> {
        let n = g.n();
        let mut m = g.laplacian_dense();
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x += 1.0 / n as f64;
            }
        }
        let mut inv: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            m.swap(c, p);
            inv.swap(c, p);
            let piv = m[c][c];
            for j in 0..n {
                m[c][j] /= piv;
                inv[c][j] /= piv;
            }
            for r in 0..n {
                if r != c {
                    let f = m[r][c];
                    for j in 0..n {
                        m[r][j] -= f * m[c][j];
                        inv[r][j] -= f * inv[c][j];
                    }
                }
            }
        }
        for row in inv.iter_mut() {
            for x in row.iter_mut() {
                *x -= 1.0 / n as f64;
            }
        }
        inv
    }

    fn corpus() -> Vec<Graph> {
        let mut gs = vec![
            fixture(Fixture::Petersen, 10).unwrap(),
            fixture(Fixture::Complete, 5).unwrap(),
            fixture(Fixture::Cycle, 7).unwrap(),
            fixture(Fixture::Path, 6).unwrap(),
        ];
        gs.extend((0..4).map(|s| random_regular(12, 3, s).unwrap()).filter(is_connected));
        gs
    }

    #[test]
    fn elementary_circuits() {
        let edge = fixture(Fixture::Path, 2).unwrap();
        assert!((effective_resistance(&edge, 0, 1).unwrap() - 1.0).abs() < 1e-12);
        let k3 = fixture(Fixture::Complete, 3).unwrap();
        assert!((effective_resistance(&k3, 0, 2).unwrap() - 2.0 / 3.0).abs() < 1e-10);
        let k5 = fixture(Fixture::Complete, 5).unwrap();
        assert!((effective_resistance(&k5, 1, 3).unwrap() - 0.4).abs() < 1e-9);
        let path = fixture(Fixture::Path, 3).unwrap();
        assert!((resistance_matrix(&path).unwrap().r(0, 2) - 2.0).abs() < 1e-10);
        let c4 = fixture(Fixture::Cycle, 4).unwrap();
        assert!((resistance_matrix(&c4).unwrap().r(0, 2) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn errors() {
        let two = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(effective_resistance(&two, 0, 2), Err(LabError::Disconnected)));
        assert!(matches!(resistance_matrix(&two), Err(LabError::Disconnected)));
        let k3 = fixture(Fixture::Complete, 3).unwrap();
        assert!(effective_resistance(&k3, 1, 1).is_err());
    }

    #[test]
    fn matches_pseudoinverse_oracle() {
        for g in corpus() {
            let lp = pseudoinverse_oracle(&g);
            let table = resistance_matrix(&g).unwrap();
            for u in 0..g.n() {
                for v in 0..g.n() {
                    let want = lp[u][u] + lp[v][v] - 2.0 * lp[u][v];
                    assert!((table.r(u, v) - want).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn foster_symmetry_triangle() {
        for g in corpus() {
            let t = resistance_matrix(&g).unwrap();
            let n = g.n();
            let foster: f64 = g.edges().map(|(u, v)| t.r(u, v)).sum();
            assert!((foster - (n as f64 - 1.0)).abs() < 1e-8, "foster {foster} n {n}");
            for u in 0..n {
                assert_eq!(t.r(u, u), 0.0);
                for v in 0..n {
                    assert!((t.r(u, v) - t.r(v, u)).abs() <= 1e-10);
                    assert!(t.r(u, v) >= 0.0);
                    for w in 0..n {
                        assert!(t.r(u, w) <= t.r(u, v) + t.r(v, w) + 1e-9);
                    }
                }
            }
        }
    }
}

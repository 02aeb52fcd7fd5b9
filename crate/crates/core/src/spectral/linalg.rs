//! Small dense kernels: Householder tridiagonalization, implicit-shift QL
//! on symmetric tridiagonal matrices, and Gaussian elimination.

use crate::error::{LabError, Result};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes the component along the all-ones direction.
#[inline]
pub(crate) fn project_mean_zero(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= mean;
    }
}

/// Reduces a symmetric matrix to tridiagonal form by Householder
/// reflections. Returns `(diagonal, subdiagonal)`; the subdiagonal has the
/// same length as the diagonal with a trailing zero.
pub(crate) fn tridiagonalize(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let alpha_norm = (lo..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let alpha = if a[lo][k] > 0.0 { -alpha_norm } else { alpha_norm };
        for i in lo..n {
            v[i] = a[i][k];
        }
        v[lo] -= alpha;
        let vnorm = (lo..n).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for i in lo..n {
            v[i] /= vnorm;
        }
        // p = A v on the trailing block, then w = p - (v.p) v.
        for i in lo..n {
            w[i] = (lo..n).map(|j| a[i][j] * v[j]).sum();
        }
        let kk: f64 = (lo..n).map(|i| v[i] * w[i]).sum();
        for i in lo..n {
            w[i] -= kk * v[i];
        }
        for i in lo..n {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[i];
            for j in lo..n {
                row[j] -= 2.0 * (vi * w[j] + wi * v[j]);
            }
        }
        a[lo][k] = alpha;
        a[k][lo] = alpha;
        for i in lo + 1..n {
            a[i][k] = 0.0;
            a[k][i] = 0.0;
        }
    }
    for i in 0..n {
        diag[i] = a[i][i];
        if i + 1 < n {
            off[i] = a[i + 1][i];
        }
    }
    (diag, off)
}

/// Eigenvalues of the symmetric tridiagonal matrix `(diag, off)` by the
/// implicit-shift QL iteration. `off[i]` couples rows `i` and `i + 1`.
///
/// Each row in `tracked` is a row of the accumulated eigenvector matrix: it
/// receives the same plane rotations as the eigenvector columns. Seeding a
/// row with `e_k` yields the `k`-th components of every eigenvector.
pub(crate) fn tridiagonal_ql(
    diag: &mut [f64],
    off: &mut [f64],
    tracked: &mut [Vec<f64>],
) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(LabError::NoConvergence {
                    iterations: iter,
                    residual: off[l].abs(),
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                for row in tracked.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub(crate) fn symmetric_eigenvalues(a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let (mut d, mut e) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e, &mut [])?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-300 {
            return Err(LabError::Precondition("singular linear system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (head, tail) = a.split_at_mut(col + 1);
        let prow = &head[col];
        for (k, row) in tail.iter_mut().enumerate() {
            let factor = row[col] / prow[col];
            if factor != 0.0 {
                for j in col..n {
                    row[j] -= factor * prow[j];
                }
                b[col + 1 + k] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

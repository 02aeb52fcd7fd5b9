use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::graph::{connectivity_profile, Graph};

/// Largest graph for which step distributions are iterated exactly.
pub const EXACT_DISTRIBUTION_THRESHOLD: usize = 5000;
/// Scan limit for [`empirical_mixing_time`].
pub const MAX_MIXING_STEPS: usize = 1_000_000;

fn check_exact(g: &Graph) -> Result<usize> {
    let d = g.regular_degree().ok_or(LabError::NotRegular)?;
    if g.n() > EXACT_DISTRIBUTION_THRESHOLD {
        return Err(LabError::TooLarge {
            what: "exact distribution iteration",
            size: g.n(),
            limit: EXACT_DISTRIBUTION_THRESHOLD,
            hint: "use the Monte-Carlo occupation estimator instead",
        });
    }
    if d == 0 {
        return Err(LabError::Disconnected);
    }
    Ok(d)
}

/// `p P` for the simple walk on a `d`-regular graph.
fn step(g: &Graph, d: usize, p: &[f64], out: &mut [f64]) {
    let inv = 1.0 / d as f64;
    for (v, o) in out.iter_mut().enumerate() {
        *o = g.neighbors(v).iter().map(|&u| p[u]).sum::<f64>() * inv;
    }
}

fn tv_to_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.iter().map(|x| (x - u).abs()).sum::<f64>()
}

/// Total-variation distance to uniform of `X_t` started at `start`, for
/// `t = 0..=t_max`.
pub fn tv_distance_profile(g: &Graph, start: usize, t_max: usize) -> Result<Vec<f64>> {
    g.check_vertex(start)?;
    let d = check_exact(g)?;
    let n = g.n();
    let mut p = vec![0.0; n];
    p[start] = 1.0;
    let mut next = vec![0.0; n];
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(tv_to_uniform(&p));
    for _ in 0..t_max {
        step(g, d, &p, &mut next);
        std::mem::swap(&mut p, &mut next);
        out.push(tv_to_uniform(&p));
    }
    Ok(out)
}

/// Pointwise maximum over all starts of [`tv_distance_profile`].
pub fn worst_start_tv_profile(g: &Graph, t_max: usize) -> Result<Vec<f64>> {
    check_exact(g)?;
    let profiles: Vec<Vec<f64>> = (0..g.n())
        .into_par_iter()
        .map(|s| tv_distance_profile(g, s, t_max))
        .collect::<Result<_>>()?;
    Ok((0..=t_max)
        .map(|t| profiles.iter().map(|p| p[t]).fold(0.0, f64::max))
        .collect())
}

/// Smallest `t` such that the worst-start TV distance stays below `xi` from
/// `t` on. The distance from each start is non-increasing in `t`, so this is
/// the maximum over starts of the first time each drops below `xi`.
pub fn empirical_mixing_time(g: &Graph, xi: f64) -> Result<usize> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(LabError::Precondition(format!("xi must lie in (0, 1), got {xi}")));
    }
    let d = check_exact(g)?;
    let profile = connectivity_profile(g);
    if !profile.connected {
        return Err(LabError::Disconnected);
    }
    if profile.bipartite {
        return Err(LabError::Bipartite);
    }
    let n = g.n();
    let times: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut p = vec![0.0; n];
            p[s] = 1.0;
            let mut next = vec![0.0; n];
            let mut t = 0;
            while tv_to_uniform(&p) >= xi {
                if t >= MAX_MIXING_STEPS {
                    return Err(LabError::NoConvergence {
                        iterations: t,
                        residual: tv_to_uniform(&p),
                    });
                }
                step(g, d, &p, &mut next);
                std::mem::swap(&mut p, &mut next);
                t += 1;
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(times.into_iter().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{fixture, Fixture};

    /// Oracle: dense matrix powers of P, worst-start TV at each t.
    fn dense_power_worst_tv(g: &Graph, t_max: usize) -> Vec<f64> {
        let n = g.n();
        let mut p = g.adjacency_dense();
        for (u, row) in p.iter_mut().enumerate() {
            let deg = g.degree(u) as f64;
            for x in row.iter_mut() {
                *x /= deg;
            }
        }
        let mut pt: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let mut out = Vec::new();
        for _ in 0..=t_max {
            out.push(
                pt.iter()
                    .map(|row| 0.5 * row.iter().map(|x| (x - 1.0 / n as f64).abs()).sum::<f64>())
                    .fold(0.0, f64::max),
            );
            pt = (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| pt[i][k] * p[k][j]).sum()).collect())
                .collect();
        }
        out
    }

    #[test]
    fn complete_graph_one_step() {
        for n in [3usize, 5, 10] {
            let g = fixture(Fixture::Complete, n).unwrap();
            let prof = tv_distance_profile(&g, 0, 1).unwrap();
            assert!((prof[0] - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
            assert!((prof[1] - 1.0 / n as f64).abs() < 1e-12);
            assert_eq!(empirical_mixing_time(&g, 0.5).unwrap(), 1);
        }
    }

    #[test]
    fn bipartite_never_mixes() {
        let c4 = fixture(Fixture::Cycle, 4).unwrap();
        let prof = tv_distance_profile(&c4, 0, 50).unwrap();
        assert!(prof.iter().all(|&x| x >= 0.5 - 1e-12));
        assert!(matches!(empirical_mixing_time(&c4, 0.1), Err(LabError::Bipartite)));
    }

    #[test]
    fn five_cycle_against_dense_powers() {
        let c5 = fixture(Fixture::Cycle, 5).unwrap();
        let oracle = dense_power_worst_tv(&c5, 80);
        let prof = worst_start_tv_profile(&c5, 80).unwrap();
        for (a, b) in oracle.iter().zip(&prof) {
            assert!((a - b).abs() < 1e-12);
        }
        let want = (0..oracle.len())
            .find(|&t| oracle[t..].iter().all(|&x| x < 0.01))
            .unwrap();
        assert_eq!(empirical_mixing_time(&c5, 0.01).unwrap(), want);
    }

    #[test]
    fn worst_start_profile_is_non_increasing() {
        for g in [
            fixture(Fixture::Petersen, 10).unwrap(),
            fixture(Fixture::Cycle, 9).unwrap(),
            fixture(Fixture::Complete, 6).unwrap(),
        ] {
            let prof = worst_start_tv_profile(&g, 60).unwrap();
            assert!(prof.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
    }

    #[test]
    fn rejects_non_regular_and_bad_xi() {
        let path = fixture(Fixture::Path, 5).unwrap();
        assert!(matches!(tv_distance_profile(&path, 0, 3), Err(LabError::NotRegular)));
        let k4 = fixture(Fixture::Complete, 4).unwrap();
        assert!(empirical_mixing_time(&k4, 0.0).is_err());
    }
}

//! L1-penalized Gaussian log-determinant solver:
//!
//! ```text
//! min over PD Omega:  -log|Omega| + tr(Omega S) + rho * penalty(Omega)
//! ```
//!
//! where the penalty is either the full elementwise l1 norm or the
//! off-diagonal l1 norm. The solver runs block coordinate descent over
//! columns, maintaining the working covariance `W = Omega^-1` throughout.
//! Each column subproblem is a lasso solved by cyclic soft-thresholding
//! coordinate descent with covariance updates. Because every column step
//! exactly minimizes the objective over that row/column block, the
//! objective is non-increasing across sweeps and every iterate stays
//! positive definite.
//!
//! Zeros produced by soft-thresholding are exact `0.0` values, so the
//! support of the returned estimate can be read off directly.

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};

#[derive(Debug, Clone)]
pub struct GlassoConfig {
    /// Tuning parameter `rho >= 0`.
    pub rho: f64,
    /// Penalize the diagonal (full l1 norm) or off-diagonals only.
    pub penalize_diagonal: bool,
    /// Stop the per-column lasso when the largest coefficient change in a
    /// cycle falls below this.
    pub inner_tol: f64,
    pub inner_max_sweeps: usize,
    /// Outer stop: largest entrywise change of `W` in a sweep below
    /// `outer_tol * mean |S_offdiag|`.
    pub outer_tol: f64,
    pub outer_max_sweeps: usize,
    /// Record the objective value after every outer sweep (costs one
    /// Cholesky per sweep; off by default).
    pub record_objective_trace: bool,
}

impl GlassoConfig {
    pub fn new(rho: f64) -> Self {
        assert!(rho >= 0.0, "rho must be nonnegative");
        GlassoConfig {
            rho,
            penalize_diagonal: true,
            inner_tol: 1e-6,
            inner_max_sweeps: 500,
            outer_tol: 1e-5,
            outer_max_sweeps: 200,
            record_objective_trace: false,
        }
    }

    pub fn with_offdiagonal_penalty(mut self) -> Self {
        self.penalize_diagonal = false;
        self
    }
}

#[derive(Debug, Clone)]
pub struct GlassoSolution {
    /// The estimate; positive definite, with exact zeros off-diagonal.
    pub omega: SymMatrix,
    /// Working covariance `W = omega^-1` as maintained by the solver.
    pub sigma: SymMatrix,
    /// Objective value at `omega`.
    pub objective: f64,
    /// Outer sweeps executed.
    pub sweeps: usize,
    /// False when the sweep cap was reached before the stopping rule fired;
    /// the best iterate is still returned.
    pub converged: bool,
    /// Objective after each outer sweep (index 0 is the initial iterate);
    /// empty unless `record_objective_trace` is set.
    pub objective_trace: Vec<f64>,
}

/// Sum over `i,j` of `a_ij * b_ij`; equals `tr(a b)` for symmetric inputs.
fn trace_product(a: &SymMatrix, b: &SymMatrix) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x * y)
        .sum()
}

/// Exact objective value under the configured penalty mode.
pub fn objective_value(omega: &SymMatrix, s: &SymMatrix, cfg: &GlassoConfig) -> Result<f64> {
    if omega.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: omega.dim(),
        });
    }
    let log_det = linalg::log_det(omega)?;
    let penalty = if cfg.penalize_diagonal {
        omega.l1_norm()
    } else {
        omega.l1_norm_offdiag()
    };
    Ok(-log_det + trace_product(omega, s) + cfg.rho * penalty)
}

/// Largest violation of the stationarity conditions at `omega`:
/// with `V = omega^-1`, every entry must satisfy
/// `V_ij - S_ij = rho * sign(omega_ij)` on the support and
/// `|V_ij - S_ij| <= rho` off it (diagonal included only when penalized).
///
/// The inverse is recomputed from scratch, independent of the working
/// covariance the solver maintains.
pub fn kkt_residual(omega: &SymMatrix, s: &SymMatrix, cfg: &GlassoConfig) -> Result<f64> {
    if omega.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: omega.dim(),
        });
    }
    let v = linalg::inverse(omega)?;
    let p = s.dim();
    let rho = cfg.rho;
    let mut worst = 0.0f64;
    for i in 0..p {
        for j in i..p {
            let grad = v.get(i, j) - s.get(i, j);
            let penalized = i != j || cfg.penalize_diagonal;
            let w = if !penalized {
                grad.abs()
            } else if omega.get(i, j) == 0.0 {
                (grad.abs() - rho).max(0.0)
            } else {
                (grad - rho * omega.get(i, j).signum()).abs()
            };
            worst = worst.max(w);
        }
    }
    Ok(worst)
}

/// Per column visit the lasso runs at most this many cyclic passes; the
/// outer sweeps supply the remaining iterations.
const INNER_CYCLES_PER_VISIT: usize = 5;

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Solves the penalized log-determinant problem for a fixed input
/// covariance `S`.
///
/// `S` must be symmetric with nonnegative diagonal; with `rho == 0` it must
/// additionally be positive definite, and the solution is the direct
/// inverse. Hitting the sweep cap is not an error: the best iterate is
/// returned with `converged == false`.
pub fn glasso(s: &SymMatrix, cfg: &GlassoConfig) -> Result<GlassoSolution> {
    glasso_warm(s, cfg, None)
}

/// [`glasso`] with an optional warm start: a positive definite estimate
/// and its inverse, typically the solution of a nearby problem. Purely an
/// internal optimization; the solve is defined by `(s, cfg)` alone.
pub fn glasso_warm(
    s: &SymMatrix,
    cfg: &GlassoConfig,
    warm: Option<(&SymMatrix, &SymMatrix)>,
) -> Result<GlassoSolution> {
    assert!(cfg.rho >= 0.0, "rho must be nonnegative");
    assert!(
        cfg.inner_tol > 0.0 && cfg.outer_tol > 0.0,
        "tolerances must be positive"
    );
    let p = s.dim();
    for j in 0..p {
        let diag = s.get(j, j);
        // NaN diagonals fail this test as well
        if !(diag.is_finite() && diag >= 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
    }

    // rho = 0 reduces to plain inversion.
    if cfg.rho == 0.0 {
        let omega = linalg::inverse(s)?;
        let objective = objective_value(&omega, s, cfg)?;
        return Ok(GlassoSolution {
            omega,
            sigma: s.clone(),
            objective,
            sweeps: 0,
            converged: true,
            objective_trace: if cfg.record_objective_trace {
                vec![objective]
            } else {
                Vec::new()
            },
        });
    }

    let rho = cfg.rho;
    let rho_diag = if cfg.penalize_diagonal { rho } else { 0.0 };
    // Diagonal of W is pinned to s_jj + rho_diag by the stationarity
    // conditions; it must be positive for the problem to be bounded.
    let mut d = vec![0.0; p];
    for j in 0..p {
        d[j] = s.get(j, j) + rho_diag;
        if d[j] <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
    }

    if p == 1 {
        let omega = SymMatrix::diagonal(&[1.0 / d[0]]);
        let objective = objective_value(&omega, s, cfg)?;
        return Ok(GlassoSolution {
            omega,
            sigma: SymMatrix::diagonal(&[d[0]]),
            objective,
            sweeps: 0,
            converged: true,
            objective_trace: if cfg.record_objective_trace {
                vec![objective]
            } else {
                Vec::new()
            },
        });
    }

    let (mut omega, mut w) = match warm {
        Some((omega0, w0)) if omega0.dim() == p && w0.dim() == p => {
            (omega0.clone(), w0.clone())
        }
        _ => (
            SymMatrix::diagonal(&d.iter().map(|v| 1.0 / v).collect::<Vec<_>>()),
            SymMatrix::diagonal(&d),
        ),
    };

    let mean_abs_offdiag = s.l1_norm_offdiag() / (p * (p - 1)) as f64;
    let outer_thr = cfg.outer_tol * mean_abs_offdiag;

    let mut objective_trace = Vec::new();
    if cfg.record_objective_trace {
        objective_trace.push(objective_value(&omega, s, cfg)?);
    }

    // Scratch buffers reused across columns.
    let m = p - 1;
    let mut sub = vec![0usize; m]; // indices != j
    let mut q = vec![0.0; m * m]; // (Omega_11)^-1 = W11 - w12 w12^T / w22
    let mut s12 = vec![0.0; m];
    let mut beta = vec![0.0; m];
    let mut v = vec![0.0; m]; // A * beta with A = d_j * Q

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < cfg.outer_max_sweeps {
        sweeps += 1;
        let mut sweep_change = 0.0f64;
        for j in 0..p {
            let mut k = 0;
            for i in 0..p {
                if i != j {
                    sub[k] = i;
                    k += 1;
                }
            }
            let wjj = w.get(j, j);
            for a in 0..m {
                let ia = sub[a];
                let wa = w.get(ia, j);
                for b in a..m {
                    let ib = sub[b];
                    let val = w.get(ia, ib) - wa * w.get(ib, j) / wjj;
                    q[a * m + b] = val;
                    q[b * m + a] = val;
                }
                s12[a] = s.get(ia, j);
                beta[a] = omega.get(ia, j);
            }
            let dj = d[j];

            // v = A beta, A = dj * Q
            for a in 0..m {
                let mut acc = 0.0;
                let row = &q[a * m..(a + 1) * m];
                for (qv, bv) in row.iter().zip(&beta) {
                    if *bv != 0.0 {
                        acc += qv * bv;
                    }
                }
                v[a] = dj * acc;
            }

            // Lasso: min 0.5 b'Ab + s12'b + rho |b|_1. Every coordinate
            // step is an exact minimization, so capping the cycles per
            // column visit keeps the descent property while leaving the
            // remaining refinement to later outer sweeps.
            let cycle_cap = cfg.inner_max_sweeps.min(INNER_CYCLES_PER_VISIT);
            let mut inner = 0;
            loop {
                inner += 1;
                let mut max_delta = 0.0f64;
                for a in 0..m {
                    let akk = dj * q[a * m + a];
                    if akk <= 0.0 || akk.is_nan() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    let old = beta[a];
                    let partial = s12[a] + (v[a] - akk * old);
                    let new = soft_threshold(-partial, rho) / akk;
                    if new != old {
                        let delta = new - old;
                        beta[a] = new;
                        let scaled = dj * delta;
                        // q is symmetric: walk row `a` instead of column `a`
                        let q_row = &q[a * m..(a + 1) * m];
                        for (vb, qv) in v.iter_mut().zip(q_row) {
                            *vb += scaled * qv;
                        }
                        max_delta = max_delta.max(delta.abs());
                    }
                }
                if max_delta <= cfg.inner_tol || inner >= cycle_cap {
                    break;
                }
            }

            // Exact block minimum over (omega_12, omega_22) given the rest:
            // the Schur complement is pinned to 1/dj.
            let qb_dot_beta: f64 = beta.iter().zip(&v).map(|(b, vv)| b * vv).sum::<f64>() / dj;
            let new_omega_jj = 1.0 / dj + qb_dot_beta;
            omega.set(j, j, new_omega_jj);
            for a in 0..m {
                omega.set(sub[a], j, beta[a]);
            }

            // Refresh W = Omega^-1 via the block inverse: with mvec = Q beta,
            // w12 = -dj * mvec, w22 = dj, W11 = Q + dj * mvec mvec^T.
            // The change monitor covers the diagonal as well: off-diagonals
            // of W pin to their stationary values as soon as the support
            // settles, while the diagonal keeps moving until the estimate
            // itself has converged.
            for a in 0..m {
                let ia = sub[a];
                let mvec_a = v[a] / dj;
                let new_w = -dj * mvec_a;
                let delta = (new_w - w.get(ia, j)).abs();
                sweep_change = sweep_change.max(delta);
                w.set(ia, j, new_w);
                for b in a..m {
                    let ib = sub[b];
                    let new_w11 = q[a * m + b] + dj * mvec_a * (v[b] / dj);
                    let delta = (new_w11 - w.get(ia, ib)).abs();
                    sweep_change = sweep_change.max(delta);
                    w.set(ia, ib, new_w11);
                }
            }
            w.set(j, j, dj);
        }

        if cfg.record_objective_trace {
            objective_trace.push(objective_value(&omega, s, cfg)?);
        }
        if sweep_change <= outer_thr {
            converged = true;
            break;
        }
    }

    let objective = objective_value(&omega, s, cfg)?;
    Ok(GlassoSolution {
        omega,
        sigma: w,
        objective,
        sweeps,
        converged,
        objective_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn rho_zero_inverts_directly() {
        let s = SymMatrix::diagonal(&[2.0, 2.0]);
        let sol = glasso(&s, &GlassoConfig::new(0.0)).unwrap();
        assert_close(sol.omega.get(0, 0), 0.5, 1e-12);
        assert_close(sol.omega.get(1, 1), 0.5, 1e-12);
        assert_close(sol.omega.get(0, 1), 0.0, 1e-12);
        assert!(sol.converged);
        assert_eq!(sol.sweeps, 0);
    }

    #[test]
    fn rho_zero_requires_positive_definite_input() {
        let s = SymMatrix::from_entries(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            glasso(&s, &GlassoConfig::new(0.0)),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn strong_penalty_gives_diagonal_solution() {
        // Off-diagonal is zero exactly when |S_ij| <= rho; with the
        // off-diagonal penalty the diagonal of W stays at S_jj.
        let s = SymMatrix::from_entries(2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        for rho in [0.5, 0.6, 1.0] {
            let cfg = GlassoConfig::new(rho).with_offdiagonal_penalty();
            let sol = glasso(&s, &cfg).unwrap();
            assert_eq!(sol.omega.get(0, 1), 0.0, "rho = {rho}");
            assert_close(sol.omega.get(0, 0), 1.0, 1e-9);
            assert_close(sol.omega.get(1, 1), 1.0, 1e-9);
            assert!(sol.converged);
        }
    }

    #[test]
    fn two_by_two_closed_form_below_threshold() {
        // For |S_01| > rho with the off-diagonal penalty, the KKT conditions
        // give W_01 = S_01 - rho (positive correlation side) and
        // Omega = W^-1 with W_jj = S_jj.
        let s = SymMatrix::from_entries(2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        let rho = 0.2;
        let mut cfg = GlassoConfig::new(rho).with_offdiagonal_penalty();
        cfg.inner_tol = 1e-12;
        cfg.outer_tol = 1e-10;
        let sol = glasso(&s, &cfg).unwrap();
        let w01 = 0.5 - rho;
        let det = 1.0 - w01 * w01;
        assert_close(sol.omega.get(0, 0), 1.0 / det, 1e-6);
        assert_close(sol.omega.get(0, 1), -w01 / det, 1e-6);
        assert!(kkt_residual(&sol.omega, &s, &cfg).unwrap() < 1e-6);
    }

    #[test]
    fn objective_value_examples() {
        let i2 = SymMatrix::identity(2);
        let cfg = GlassoConfig::new(0.0);
        assert_close(objective_value(&i2, &i2, &cfg).unwrap(), 2.0, 1e-12);

        let cfg = GlassoConfig::new(0.1);
        assert_close(objective_value(&i2, &i2, &cfg).unwrap(), 2.2, 1e-12);

        let omega = SymMatrix::diagonal(&[2.0, 2.0]);
        let cfg = GlassoConfig::new(0.0);
        assert_close(
            objective_value(&omega, &i2, &cfg).unwrap(),
            -2.0 * 2.0f64.ln() + 4.0,
            1e-12,
        );
    }

    #[test]
    fn objective_rejects_indefinite_omega() {
        let bad = SymMatrix::from_entries(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        let s = SymMatrix::identity(2);
        assert!(matches!(
            objective_value(&bad, &s, &GlassoConfig::new(0.1)),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn huge_rho_zeroes_all_offdiagonals() {
        let s = SymMatrix::from_fn(4, |i, j| if i == j { 2.0 } else { 0.7 });
        let cfg = GlassoConfig::new(0.71);
        let sol = glasso(&s, &cfg).unwrap();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_eq!(sol.omega.get(i, j), 0.0);
            }
            assert_close(sol.omega.get(i, i), 1.0 / (2.0 + 0.71), 1e-9);
        }
    }

    #[test]
    fn maintained_sigma_matches_inverse() {
        let s = SymMatrix::from_entries(
            3,
            vec![1.5, 0.4, 0.1, 0.4, 1.2, -0.3, 0.1, -0.3, 1.0],
        )
        .unwrap();
        let cfg = GlassoConfig::new(0.05);
        let sol = glasso(&s, &cfg).unwrap();
        let prod = sol.omega.mat_mul(&sol.sigma).unwrap();
        let p = 3;
        for i in 0..p {
            for j in 0..p {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_close(prod[i * p + j], expect, 1e-6 * p as f64);
            }
        }
    }

    #[test]
    fn kkt_holds_on_a_dense_instance() {
        let s = SymMatrix::from_entries(
            4,
            vec![
                2.0, 0.8, 0.3, -0.2, //
                0.8, 1.5, 0.5, 0.1, //
                0.3, 0.5, 1.8, 0.6, //
                -0.2, 0.1, 0.6, 1.1,
            ],
        )
        .unwrap();
        for penalize_diag in [true, false] {
            for rho in [0.02, 0.1, 0.3] {
                let mut cfg = GlassoConfig::new(rho);
                cfg.penalize_diagonal = penalize_diag;
                let sol = glasso(&s, &cfg).unwrap();
                assert!(sol.converged);
                let r = kkt_residual(&sol.omega, &s, &cfg).unwrap();
                assert!(r < 1e-4, "kkt residual {r} at rho {rho}");
            }
        }
    }

    #[test]
    fn objective_trace_is_monotone() {
        let s = SymMatrix::from_entries(
            4,
            vec![
                1.9, 0.9, -0.4, 0.2, //
                0.9, 1.4, 0.3, -0.1, //
                -0.4, 0.3, 2.2, 0.5, //
                0.2, -0.1, 0.5, 0.9,
            ],
        )
        .unwrap();
        let mut cfg = GlassoConfig::new(0.05);
        cfg.record_objective_trace = true;
        let sol = glasso(&s, &cfg).unwrap();
        assert!(sol.objective_trace.len() >= 2);
        for pair in sol.objective_trace.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9,
                "objective increased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }
}

//! Property tests for the matrix kernels, the solver, and the weights.

use proptest::prelude::*;

use wglasso_core::dataset::Dataset;
use wglasso_core::glasso::{self, GlassoConfig};
use wglasso_core::linalg::{self, SymMatrix};
use wglasso_core::metrics;
use wglasso_core::wglasso;

/// Applies the Householder reflection for `v` on both sides of `m`.
fn householder_conjugate(m: &SymMatrix, v: &[f64]) -> SymMatrix {
    let p = m.dim();
    let norm_sq: f64 = v.iter().map(|x| x * x).sum();
    if norm_sq == 0.0 {
        return m.clone();
    }
    // H = I - 2 v v^T / (v^T v); compute H m H
    let mut h = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let id = if i == j { 1.0 } else { 0.0 };
            h[i * p + j] = id - 2.0 * v[i] * v[j] / norm_sq;
        }
    }
    let mut hm = vec![0.0; p * p];
    for i in 0..p {
        for k in 0..p {
            let a = h[i * p + k];
            for j in 0..p {
                hm[i * p + j] += a * m.get(k, j);
            }
        }
    }
    SymMatrix::from_fn(p, |i, j| {
        let mut acc = 0.0;
        for k in 0..p {
            acc += hm[i * p + k] * h[k * p + j];
        }
        acc
    })
}

/// Random PD matrix with a known spectrum: a positive diagonal conjugated
/// by two Householder reflections.
fn pd_with_spectrum(eigs: Vec<f64>, v1: Vec<f64>, v2: Vec<f64>) -> (SymMatrix, Vec<f64>) {
    let d = SymMatrix::diagonal(&eigs);
    let m = householder_conjugate(&householder_conjugate(&d, &v1), &v2);
    (m, eigs)
}

fn eig_strategy(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.3f64..3.0, p)
}

fn vec_strategy(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_roundtrip((eigs, v1, v2) in (2usize..7).prop_flat_map(|p| {
        (eig_strategy(p), vec_strategy(p), vec_strategy(p))
    })) {
        let (m, _) = pd_with_spectrum(eigs, v1, v2);
        let p = m.dim();
        let inv = linalg::inverse(&m).unwrap();
        let prod = m.mat_mul(&inv).unwrap();
        let mut frob = 0.0;
        for i in 0..p {
            for j in 0..p {
                let id = if i == j { 1.0 } else { 0.0 };
                frob += (prod[i * p + j] - id).powi(2);
            }
        }
        prop_assert!(frob.sqrt() < 1e-8 * p as f64);
    }

    #[test]
    fn log_det_matches_spectrum((eigs, v1, v2) in (2usize..7).prop_flat_map(|p| {
        (eig_strategy(p), vec_strategy(p), vec_strategy(p))
    })) {
        let (m, eigs) = pd_with_spectrum(eigs, v1, v2);
        let expect: f64 = eigs.iter().map(|e| e.ln()).sum();
        let got = linalg::log_det(&m).unwrap();
        prop_assert!((got - expect).abs() < 1e-8, "{got} vs {expect}");
    }

    #[test]
    fn determinant_l1_inequality((eigs, v1, v2) in (2usize..7).prop_flat_map(|p| {
        (eig_strategy(p), vec_strategy(p), vec_strategy(p))
    })) {
        // log-space form: (p/2) log(|m|_1 / p) - (1/2) log det m >= -1e-9
        let (m, _) = pd_with_spectrum(eigs, v1, v2);
        let p = m.dim() as f64;
        let slack = 0.5 * p * (m.l1_norm() / p).ln() - 0.5 * linalg::log_det(&m).unwrap();
        prop_assert!(slack >= -1e-9, "slack {slack}");
    }

    #[test]
    fn weights_normalize_and_order(rows in prop::collection::vec(
        prop::collection::vec(-3.0f64..3.0, 3), 2..40,
    )) {
        let d = Dataset::from_observations(&rows).unwrap();
        let omega = SymMatrix::from_entries(
            3,
            vec![1.5, 0.2, 0.0, 0.2, 1.0, -0.1, 0.0, -0.1, 2.0],
        )
        .unwrap();
        let w = wglasso::compute_weights(&d, &omega).unwrap();
        let n = d.n() as f64;
        let sum: f64 = w.as_slice().iter().sum();
        prop_assert!((sum - n).abs() <= 1e-8 * n);

        let q: Vec<f64> = (0..d.n())
            .map(|i| linalg::quad_form(&omega, d.row(i)).unwrap())
            .collect();
        let mean_q = q.iter().sum::<f64>() / n;
        for i in 0..d.n() {
            // strictly above-average quadratic form implies below-average
            // weight (Jensen), and weights are monotone in the form
            if q[i] > mean_q {
                prop_assert!(w.as_slice()[i] < 1.0);
            }
            for j in 0..d.n() {
                if q[i] > q[j] {
                    prop_assert!(w.as_slice()[i] <= w.as_slice()[j]);
                }
            }
        }
    }

    #[test]
    fn glasso_kkt_certificate((factors, rho, penalize_diag) in (
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 5), 8),
        0.01f64..0.5,
        any::<bool>(),
    )) {
        // S built as a well-conditioned Gram matrix
        let p = 5;
        let k = factors.len();
        let s = SymMatrix::from_fn(p, |i, j| {
            let dot: f64 = factors.iter().map(|f| f[i] * f[j]).sum::<f64>() / k as f64;
            dot + if i == j { 0.5 } else { 0.0 }
        });
        let mut cfg = GlassoConfig::new(rho);
        cfg.penalize_diagonal = penalize_diag;
        let sol = glasso::glasso(&s, &cfg).unwrap();
        prop_assert!(sol.converged);
        let kkt = glasso::kkt_residual(&sol.omega, &s, &cfg).unwrap();
        prop_assert!(kkt < 1e-4, "kkt residual {kkt}");
    }

    #[test]
    fn glasso_sparsity_monotone_in_rho(factors in
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 10),
    ) {
        let p = 6;
        let k = factors.len();
        let s = SymMatrix::from_fn(p, |i, j| {
            let dot: f64 = factors.iter().map(|f| f[i] * f[j]).sum::<f64>() / k as f64;
            dot + if i == j { 0.3 } else { 0.0 }
        });
        let grid = [0.01, 0.03, 0.08, 0.2, 0.5, 1.0];
        let mut last_nnz = usize::MAX;
        for rho in grid {
            let sol = glasso::glasso(&s, &GlassoConfig::new(rho)).unwrap();
            let nnz = (0..p)
                .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
                .filter(|&(i, j)| sol.omega.get(i, j) != 0.0)
                .count();
            prop_assert!(nnz <= last_nnz, "support grew from {last_nnz} to {nnz} at rho {rho}");
            last_nnz = nnz;
        }
        // beyond the largest |S_ij| everything off-diagonal is zero
        let rho_max = s.max_abs_offdiag() + 1e-9;
        let sol = glasso::glasso(&s, &GlassoConfig::new(rho_max)).unwrap();
        for i in 0..p {
            for j in (i + 1)..p {
                prop_assert_eq!(sol.omega.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn glasso_descent_is_monotone(factors in
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 5), 7),
    ) {
        let p = 5;
        let k = factors.len();
        let s = SymMatrix::from_fn(p, |i, j| {
            let dot: f64 = factors.iter().map(|f| f[i] * f[j]).sum::<f64>() / k as f64;
            dot + if i == j { 0.4 } else { 0.0 }
        });
        let mut cfg = GlassoConfig::new(0.05);
        cfg.record_objective_trace = true;
        let sol = glasso::glasso(&s, &cfg).unwrap();
        for pair in sol.objective_trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9 * (1.0 + pair[0].abs()));
        }
    }

    #[test]
    fn kl_congruence_invariance((eigs, v1, v2, m_entries) in (3usize..5).prop_flat_map(|p| {
        (
            eig_strategy(p),
            vec_strategy(p),
            vec_strategy(p),
            prop::collection::vec(-1.0f64..1.0, p * p),
        )
    })) {
        let (omega_true, _) = pd_with_spectrum(eigs.clone(), v1.clone(), v2.clone());
        // a distinct PD estimate from the same ingredients
        let shifted: Vec<f64> = eigs.iter().map(|e| e + 0.4).collect();
        let (omega_hat, _) = pd_with_spectrum(shifted, v2, v1);
        let p = omega_true.dim();

        // invertible M: random entries plus a dominant diagonal
        let mut m = m_entries;
        for i in 0..p {
            m[i * p + i] += 3.0;
        }
        let congruence = |a: &SymMatrix| {
            // M^T a M
            let mut am = vec![0.0; p * p];
            for i in 0..p {
                for kk in 0..p {
                    let v = a.get(i, kk);
                    for j in 0..p {
                        am[i * p + j] += v * m[kk * p + j];
                    }
                }
            }
            SymMatrix::from_fn(p, |i, j| {
                let mut acc = 0.0;
                for kk in 0..p {
                    acc += m[kk * p + i] * am[kk * p + j];
                }
                acc
            })
        };
        let kl_direct = metrics::kl_loss(&omega_hat, &omega_true).unwrap();
        let kl_conj = metrics::kl_loss(&congruence(&omega_hat), &congruence(&omega_true)).unwrap();
        prop_assert!(
            (kl_direct - kl_conj).abs() < 1e-8 * (1.0 + kl_direct.abs()),
            "{kl_direct} vs {kl_conj}"
        );
    }
}

#[test]
fn spearman_null_correlation_is_small() {
    // Independent permuted columns: the implied correlation stays within
    // 3/sqrt(n) for these fixed seeds.
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let n = 500;
    for seed in [1u64, 2, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut b = a.clone();
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        let rows: Vec<Vec<f64>> = a.iter().zip(&b).map(|(&x, &y)| vec![x, y]).collect();
        let d = Dataset::from_observations(&rows).unwrap();
        let s = wglasso_core::dataset::spearman_cov(&d).unwrap();
        let corr = s.get(0, 1) / (s.get(0, 0).sqrt() * s.get(1, 1).sqrt());
        assert!(
            corr.abs() < 3.0 / (n as f64).sqrt(),
            "seed {seed}: corr {corr}"
        );
    }
}

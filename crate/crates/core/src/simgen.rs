//! Ground-truth precision matrices and contaminated-sample generators for
//! the simulation study.
//!
//! Reproducibility: every random quantity is drawn from a `ChaCha8` stream
//! seeded by the caller, with one stream per purpose (permutation/inliers/
//! outliers/shuffle), so identical seeds give byte-identical datasets and
//! the draws for one purpose never perturb another.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::linalg::{self, SymMatrix};

/// Stream ids for the per-purpose ChaCha substreams.
mod stream {
    pub const PERMUTATION: u64 = 0;
    pub const INLIERS: u64 = 1;
    pub const OUTLIERS: u64 = 2;
    pub const SHUFFLE: u64 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `Omega = I`.
    Identity,
    /// Banded matrix: unit diagonal, `offdiag` on the first off-diagonal.
    Ar1,
    /// The banded matrix conjugated by a seeded random permutation.
    PermutedAr1,
}

/// A ground-truth precision matrix.
#[derive(Debug, Clone)]
pub struct TrueModel {
    pub kind: ModelKind,
    pub p: usize,
    pub offdiag: f64,
    pub perm_seed: u64,
    pub omega: SymMatrix,
}

/// Default first-off-diagonal value of the banded models.
pub const DEFAULT_OFFDIAG: f64 = 0.2;

/// Builds one of the three ground-truth models. `perm_seed` matters only
/// for [`ModelKind::PermutedAr1`].
pub fn build_model(kind: ModelKind, p: usize, perm_seed: u64) -> TrueModel {
    build_model_with_offdiag(kind, p, perm_seed, DEFAULT_OFFDIAG)
}

pub fn build_model_with_offdiag(
    kind: ModelKind,
    p: usize,
    perm_seed: u64,
    offdiag: f64,
) -> TrueModel {
    assert!(p >= 2, "model dimension must be at least 2");
    let banded = |i: usize, j: usize| {
        if i == j {
            1.0
        } else if j == i + 1 || i == j + 1 {
            offdiag
        } else {
            0.0
        }
    };
    let omega = match kind {
        ModelKind::Identity => SymMatrix::identity(p),
        ModelKind::Ar1 => SymMatrix::from_fn(p, banded),
        ModelKind::PermutedAr1 => {
            let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
            rng.set_stream(stream::PERMUTATION);
            let mut perm: Vec<usize> = (0..p).collect();
            perm.shuffle(&mut rng);
            // (Q M Q^T)[perm[i], perm[j]] = M[i, j]
            let mut m = SymMatrix::zeros(p);
            for i in 0..p {
                for j in i..p {
                    m.set(perm[i], perm[j], banded(i, j));
                }
            }
            m
        }
    };
    TrueModel {
        kind,
        p,
        offdiag,
        perm_seed,
        omega,
    }
}

/// Outlier mean: a scalar broadcast over all coordinates or a full vector.
#[derive(Debug, Clone)]
pub enum MuShift {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl MuShift {
    fn resolve(&self, p: usize) -> Vec<f64> {
        match self {
            MuShift::Scalar(v) => vec![*v; p],
            MuShift::Vector(v) => {
                assert_eq!(v.len(), p, "outlier mean length must match p");
                v.clone()
            }
        }
    }
}

/// Contamination layout: `n1` inliers from the model, `round(gamma * n1)`
/// outliers from a unit-covariance Gaussian at `mu_shift`.
#[derive(Debug, Clone)]
pub struct ContaminationSpec {
    pub n1: usize,
    pub gamma: f64,
    pub mu_shift: MuShift,
    pub seed: u64,
}

impl ContaminationSpec {
    pub fn new(n1: usize, gamma: f64, mu_shift: MuShift, seed: u64) -> Self {
        assert!(n1 >= 2, "need at least two inliers");
        assert!(gamma >= 0.0, "gamma must be nonnegative");
        ContaminationSpec {
            n1,
            gamma,
            mu_shift,
            seed,
        }
    }

    pub fn n2(&self) -> usize {
        (self.gamma * self.n1 as f64).round() as usize
    }
}

/// Draws the contaminated sample. Returns the shuffled dataset together
/// with a mask that is `true` on inlier rows.
pub fn sample(model: &TrueModel, spec: &ContaminationSpec) -> Result<(Dataset, Vec<bool>)> {
    let p = model.p;
    let sigma = linalg::inverse(&model.omega)?;
    let chol = sigma.cholesky()?;

    let n1 = spec.n1;
    let n2 = spec.n2();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n1 + n2);
    let mut mask: Vec<bool> = Vec::with_capacity(n1 + n2);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream::INLIERS);
    let mut z = vec![0.0; p];
    for _ in 0..n1 {
        for zi in &mut z {
            *zi = rng.sample(StandardNormal);
        }
        rows.push(chol.mul_vec(&z));
        mask.push(true);
    }

    let mu = spec.mu_shift.resolve(p);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream::OUTLIERS);
    for _ in 0..n2 {
        let row: Vec<f64> = mu
            .iter()
            .map(|m| m + rng.sample::<f64, _>(StandardNormal))
            .collect();
        rows.push(row);
        mask.push(false);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream::SHUFFLE);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng);
    let shuffled_rows: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
    let shuffled_mask: Vec<bool> = order.iter().map(|&i| mask[i]).collect();

    Ok((Dataset::from_observations(&shuffled_rows)?, shuffled_mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{center, sample_cov};

    #[test]
    fn ar1_three_by_three() {
        let m = build_model(ModelKind::Ar1, 3, 0);
        let expect = [
            [1.0, 0.2, 0.0],
            [0.2, 1.0, 0.2],
            [0.0, 0.2, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.omega.get(i, j), expect[i][j]);
            }
        }
    }

    #[test]
    fn identity_model() {
        let m = build_model(ModelKind::Identity, 4, 0);
        assert_eq!(m.omega, SymMatrix::identity(4));
    }

    #[test]
    fn permuted_ar1_is_a_permutation_of_ar1() {
        let a = build_model(ModelKind::Ar1, 5, 0);
        let b = build_model(ModelKind::PermutedAr1, 5, 17);
        let mut ea: Vec<f64> = a.omega.entries().to_vec();
        let mut eb: Vec<f64> = b.omega.entries().to_vec();
        ea.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(ea, eb);
        // permutation similarity preserves the spectrum, hence trace and
        // determinant
        assert!((a.omega.trace() - b.omega.trace()).abs() < 1e-12);
        let da = linalg::log_det(&a.omega).unwrap();
        let db = linalg::log_det(&b.omega).unwrap();
        assert!((da - db).abs() < 1e-10);
    }

    #[test]
    fn gamma_zero_is_all_inliers() {
        let model = build_model(ModelKind::Identity, 3, 0);
        let spec = ContaminationSpec::new(10, 0.0, MuShift::Scalar(5.0), 3);
        let (d, mask) = sample(&model, &spec).unwrap();
        assert_eq!(d.n(), 10);
        assert!(mask.iter().all(|&m| m));
    }

    #[test]
    fn outlier_count_rounds() {
        let spec = ContaminationSpec::new(50, 0.10, MuShift::Scalar(5.0), 3);
        assert_eq!(spec.n2(), 5);
        let spec = ContaminationSpec::new(50, 0.06, MuShift::Scalar(5.0), 3);
        assert_eq!(spec.n2(), 3);
    }

    #[test]
    fn identical_seeds_reproduce_exactly() {
        let model = build_model(ModelKind::Ar1, 4, 0);
        let spec = ContaminationSpec::new(20, 0.1, MuShift::Scalar(2.0), 99);
        let (a, ma) = sample(&model, &spec).unwrap();
        let (b, mb) = sample(&model, &spec).unwrap();
        assert_eq!(ma, mb);
        for i in 0..a.n() {
            assert_eq!(a.row(i), b.row(i));
        }
    }

    #[test]
    fn sampler_covariance_is_consistent() {
        let model = build_model(ModelKind::Ar1, 3, 0);
        let sigma = linalg::inverse(&model.omega).unwrap();
        let spec = ContaminationSpec::new(100_000, 0.0, MuShift::Scalar(0.0), 12345);
        let (d, _) = sample(&model, &spec).unwrap();
        let s = sample_cov(&center(&d));
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (s.get(i, j) - sigma.get(i, j)).abs() < 0.02,
                    "entry ({i},{j}): {} vs {}",
                    s.get(i, j),
                    sigma.get(i, j)
                );
            }
        }
    }

    #[test]
    fn empirical_covariance_error_shrinks_with_n() {
        let model = build_model(ModelKind::Ar1, 3, 0);
        let sigma = linalg::inverse(&model.omega).unwrap();
        let max_err = |n: usize| {
            let spec = ContaminationSpec::new(n, 0.0, MuShift::Scalar(0.0), 7);
            let (d, _) = sample(&model, &spec).unwrap();
            let s = sample_cov(&center(&d));
            let mut worst = 0.0f64;
            for i in 0..3 {
                for j in 0..3 {
                    worst = worst.max((s.get(i, j) - sigma.get(i, j)).abs());
                }
            }
            worst
        };
        assert!(max_err(40_000) < max_err(400));
    }
}

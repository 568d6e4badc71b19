//! Shrinkage covariance baseline: a convex combination of the sample
//! covariance and a scaled identity target, with the plug-in optimal
//! intensity of Ledoit and Wolf's well-conditioned estimator.

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};

#[derive(Debug, Clone)]
pub struct LwEstimate {
    /// `shrinkage * target_scale * I + (1 - shrinkage) * S`.
    pub sigma_hat: SymMatrix,
    /// Inverse of `sigma_hat`.
    pub omega_hat: SymMatrix,
    /// Shrinkage intensity in `[0, 1]`.
    pub shrinkage: f64,
    /// Target scale `trace(S) / p`.
    pub target_scale: f64,
}

/// Ledoit-Wolf shrinkage toward the scaled identity.
///
/// The intensity is `min(1, b2 / d2)` where `d2 = ||S - mu I||_F^2`
/// measures the dispersion of the sample covariance around the target and
/// `b2 = (1/n^2) sum_i ||x_i x_i' - S||_F^2` (capped at `d2`) estimates its
/// sampling noise. When `d2 = 0` the sample covariance already equals the
/// target and the intensity is defined as 1.
pub fn ledoit_wolf(d: &Dataset) -> Result<LwEstimate> {
    if d.n() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: d.n(),
        });
    }
    let n = d.n();
    let p = d.p();
    let s = dataset::sample_cov(d);
    let mu = s.trace() / p as f64;

    let mut d2 = 0.0;
    for i in 0..p {
        for j in 0..p {
            let target = if i == j { mu } else { 0.0 };
            let diff = s.get(i, j) - target;
            d2 += diff * diff;
        }
    }

    let mut b2_raw = 0.0;
    for row in d.rows() {
        let mut norm = 0.0;
        for i in 0..p {
            for j in 0..p {
                let diff = row[i] * row[j] - s.get(i, j);
                norm += diff * diff;
            }
        }
        b2_raw += norm;
    }
    b2_raw /= (n * n) as f64;
    let b2 = b2_raw.min(d2);

    let shrinkage = if d2 > 0.0 { b2 / d2 } else { 1.0 };
    let sigma_hat = SymMatrix::from_fn(p, |i, j| {
        let target = if i == j { mu } else { 0.0 };
        shrinkage * target + (1.0 - shrinkage) * s.get(i, j)
    });
    let omega_hat = linalg::inverse(&sigma_hat)?;
    Ok(LwEstimate {
        sigma_hat,
        omega_hat,
        shrinkage,
        target_scale: mu,
    })
}

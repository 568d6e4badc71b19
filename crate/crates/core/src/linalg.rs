//! Dense symmetric matrix kernels: Cholesky factorization, log-determinant,
//! inversion, Frobenius distances and quadratic forms.
//!
//! All estimators in this crate run at moderate dimension (p up to a few
//! hundred), so the kernels are plain row-major `f64` loops with no BLAS
//! dependency. Positive definiteness is decided by the Cholesky pivot test
//! with a scale-relative tolerance.

use crate::error::{Error, Result};

/// Relative pivot tolerance: a Cholesky pivot at or below
/// `PD_PIVOT_RTOL * max_diagonal` counts as a positive-definiteness failure.
pub const PD_PIVOT_RTOL: f64 = 1e-12;

/// Dense symmetric `p x p` matrix stored row-major.
///
/// Symmetry is enforced on construction by mirroring the upper triangle
/// onto the lower one, so `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Builds a symmetric matrix from `dim * dim` row-major entries.
    /// The strict lower triangle of the input is ignored and replaced by
    /// the mirrored upper triangle.
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let mut m = SymMatrix { dim, entries };
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = m.entries[i * dim + j];
                m.entries[j * dim + i] = v;
            }
        }
        Ok(m)
    }

    /// Builds a matrix from a symmetric function of the index pair.
    /// `f` is evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        SymMatrix { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Sets entry `(i, j)` and its mirror `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Sum of absolute values over all entries.
    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    /// Sum of absolute values over the off-diagonal entries.
    pub fn l1_norm_offdiag(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    s += self.get(i, j).abs();
                }
            }
        }
        s
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_abs_offdiag(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(SymMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Adds `v` to every diagonal entry.
    pub fn add_diagonal(&self, v: f64) -> SymMatrix {
        let mut m = self.clone();
        for i in 0..self.dim {
            let d = m.get(i, i) + v;
            m.set(i, i, d);
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut y = vec![0.0; p];
        for i in 0..p {
            let row = &self.entries[i * p..(i + 1) * p];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// General (dense) matrix product; the result is not symmetrized.
    /// Mainly useful in tests for residual checks like `m * inverse(m)`.
    pub fn mat_mul(&self, other: &SymMatrix) -> Result<Vec<f64>> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let p = self.dim;
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            for k in 0..p {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..p {
                    out[i * p + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        cholesky(self)
    }
}

/// Lower-triangular Cholesky factor `L` with `L * L^T = m`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    /// Row-major dense storage; entries above the diagonal are zero.
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// `2 * sum(log L_ii)`, the log-determinant of the factored matrix.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// Solves `L L^T x = b` by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.dim;
        debug_assert_eq!(b.len(), p);
        let mut y = b.to_vec();
        for i in 0..p {
            let mut s = y[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        for i in (0..p).rev() {
            let mut s = y[i];
            for k in (i + 1)..p {
                s -= self.get(k, i) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        y
    }

    /// `L * z`, used to turn standard normal draws into draws with the
    /// factored covariance.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut x = vec![0.0; p];
        for i in 0..p {
            let mut s = 0.0;
            for k in 0..=i {
                s += self.get(i, k) * z[k];
            }
            x[i] = s;
        }
        x
    }

    /// Inverse of the factored matrix, symmetrized exactly.
    pub fn inverse(&self) -> SymMatrix {
        let p = self.dim;
        let mut cols = vec![0.0; p * p];
        let mut e = vec![0.0; p];
        for j in 0..p {
            e[j] = 1.0;
            let x = self.solve(&e);
            e[j] = 0.0;
            for i in 0..p {
                cols[i * p + j] = x[i];
            }
        }
        SymMatrix::from_fn(p, |i, j| 0.5 * (cols[i * p + j] + cols[j * p + i]))
    }

    /// `L * L^T`, reconstructing the factored matrix.
    pub fn reconstruct(&self) -> SymMatrix {
        let p = self.dim;
        SymMatrix::from_fn(p, |i, j| {
            let k_max = i.min(j);
            (0..=k_max).map(|k| self.get(i, k) * self.get(j, k)).sum()
        })
    }
}

/// Cholesky factorization of a symmetric matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot falls at or below
/// `PD_PIVOT_RTOL` times the largest diagonal entry, which makes the test
/// invariant under rescaling of the input.
pub fn cholesky(m: &SymMatrix) -> Result<CholeskyFactor> {
    let p = m.dim();
    let max_diag = (0..p).map(|i| m.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    let tol = PD_PIVOT_RTOL * max_diag;
    let mut lower = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= lower[i * p + k] * lower[j * p + k];
            }
            if i == j {
                // NaN pivots fail this test as well
                if s.is_finite() && s > tol {
                    lower[i * p + i] = s.sqrt();
                } else {
                    return Err(Error::NotPositiveDefinite);
                }
            } else {
                lower[i * p + j] = s / lower[j * p + j];
            }
        }
    }
    Ok(CholeskyFactor { dim: p, lower })
}

/// Log-determinant of a positive definite matrix via its Cholesky factor.
pub fn log_det(m: &SymMatrix) -> Result<f64> {
    Ok(cholesky(m)?.log_det())
}

/// Inverse of a positive definite matrix. The result is exactly symmetric
/// and satisfies `m * inverse(m) = I` within `1e-8 * p` in max-abs error
/// for the well-conditioned inputs these estimators produce.
pub fn inverse(m: &SymMatrix) -> Result<SymMatrix> {
    Ok(cholesky(m)?.inverse())
}

/// Frobenius distance `sqrt(sum_ij (a_ij - b_ij)^2)`.
pub fn frobenius_dist(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let s: f64 = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(s.sqrt())
}

/// Quadratic form `x^T m x`.
pub fn quad_form(m: &SymMatrix, x: &[f64]) -> Result<f64> {
    let p = m.dim();
    if x.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: x.len(),
        });
    }
    let mut total = 0.0;
    for i in 0..p {
        let mut row = 0.0;
        for j in 0..p {
            row += m.get(i, j) * x[j];
        }
        total += x[i] * row;
    }
    Ok(total)
}

//! Shared fixtures for the criterion benchmarks.

use wglasso_core::dataset::{center, Dataset};
use wglasso_core::linalg::SymMatrix;
use wglasso_core::simgen::{build_model, sample, ContaminationSpec, ModelKind, MuShift};

/// A centered contaminated dataset at the benchmark's standard scale.
pub fn bench_dataset(p: usize, n1: usize, seed: u64) -> Dataset {
    let model = build_model(ModelKind::Ar1, p, seed);
    let spec = ContaminationSpec::new(n1, 0.10, MuShift::Scalar(5.0), seed);
    let (d, _) = sample(&model, &spec).expect("model is positive definite");
    center(&d)
}

/// The sample covariance of [`bench_dataset`].
pub fn bench_cov(p: usize, n1: usize, seed: u64) -> SymMatrix {
    wglasso_core::dataset::sample_cov(&bench_dataset(p, n1, seed))
}

//! Evaluation of a precision-matrix estimate against a known truth:
//! F1 support recovery over the off-diagonal entries, Frobenius distance,
//! and the Gaussian Kullback-Leibler (Stein) loss.

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};

/// Support-recovery counts and scores over the strict upper triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportScore {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

/// Full evaluation of one estimate against the truth.
#[derive(Debug, Clone, Copy)]
pub struct EvalReport {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub fnorm: f64,
    /// Stein loss `tr(est * true^-1) - log det(est * true^-1) - p`.
    pub kl: f64,
    /// The degenerate variant `tr(est * true^-1) - p`, reported alongside
    /// for comparison with sources that use it.
    pub kl_printed: f64,
}

fn check_dims(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            got: a.dim(),
        });
    }
    Ok(())
}

/// F1/precision/recall of the estimated edge set. An edge is any strictly
/// off-diagonal entry that is exactly nonzero, counted over the upper
/// triangle; solvers in this crate produce exact zeros, and for dense
/// estimates every entry counts as an edge.
pub fn support_f1(omega_hat: &SymMatrix, omega_true: &SymMatrix) -> Result<SupportScore> {
    check_dims(omega_hat, omega_true)?;
    let p = omega_hat.dim();
    let (mut tp, mut fp, mut fnc) = (0usize, 0usize, 0usize);
    for i in 0..p {
        for j in (i + 1)..p {
            let est = omega_hat.get(i, j) != 0.0;
            let truth = omega_true.get(i, j) != 0.0;
            match (est, truth) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnc += 1,
                (false, false) => {}
            }
        }
    }
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fnc > 0 {
        tp as f64 / (tp + fnc) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(SupportScore {
        f1,
        precision,
        recall,
        true_pos: tp,
        false_pos: fp,
        false_neg: fnc,
    })
}

/// Frobenius distance over all entries.
pub fn fnorm_loss(omega_hat: &SymMatrix, omega_true: &SymMatrix) -> Result<f64> {
    linalg::frobenius_dist(omega_hat, omega_true)
}

/// Gaussian KL (Stein) loss: `tr(H T^-1) - log det(H T^-1) - p`.
/// Nonnegative, zero exactly at the truth.
pub fn kl_loss(omega_hat: &SymMatrix, omega_true: &SymMatrix) -> Result<f64> {
    check_dims(omega_hat, omega_true)?;
    let p = omega_hat.dim() as f64;
    let sigma_true = linalg::inverse(omega_true)?;
    let ld_hat = linalg::log_det(omega_hat)?;
    let ld_true = linalg::log_det(omega_true)?;
    let tr: f64 = omega_hat
        .entries()
        .iter()
        .zip(sigma_true.entries())
        .map(|(a, b)| a * b)
        .sum();
    Ok(tr - (ld_hat - ld_true) - p)
}

/// The loss with the log-determinant term cancelled: `tr(H T^-1) - p`.
pub fn kl_printed(omega_hat: &SymMatrix, omega_true: &SymMatrix) -> Result<f64> {
    check_dims(omega_hat, omega_true)?;
    let p = omega_hat.dim() as f64;
    let sigma_true = linalg::inverse(omega_true)?;
    let tr: f64 = omega_hat
        .entries()
        .iter()
        .zip(sigma_true.entries())
        .map(|(a, b)| a * b)
        .sum();
    Ok(tr - p)
}

/// All metrics of one estimate against the truth.
pub fn evaluate(omega_hat: &SymMatrix, omega_true: &SymMatrix) -> Result<EvalReport> {
    let support = support_f1(omega_hat, omega_true)?;
    Ok(EvalReport {
        f1: support.f1,
        precision: support.precision,
        recall: support.recall,
        true_pos: support.true_pos,
        false_pos: support.false_pos,
        false_neg: support.false_neg,
        fnorm: fnorm_loss(omega_hat, omega_true)?,
        kl: kl_loss(omega_hat, omega_true)?,
        kl_printed: kl_printed(omega_hat, omega_true)?,
    })
}

//! Square-matrix CSV reading and writing.
//!
//! Matrices are stored as `p` lines of `p` comma-separated floats with
//! round-trip formatting, the same layout `estimate` writes and
//! `export-graph` reads.

use std::path::Path;

use wglasso_core::dataset;
use wglasso_core::error::{Error, Result};
use wglasso_core::linalg::SymMatrix;

/// Reads a square symmetric matrix from CSV. Non-square input is rejected;
/// the upper triangle wins on asymmetric round-off.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<SymMatrix> {
    let d = dataset::load_csv(path, false)?;
    if d.n() != d.p() {
        return Err(Error::NonSquareInput);
    }
    let p = d.p();
    let mut entries = Vec::with_capacity(p * p);
    for row in d.rows() {
        entries.extend_from_slice(row);
    }
    SymMatrix::from_entries(p, entries)
}

pub fn matrix_to_csv(m: &SymMatrix) -> String {
    let p = m.dim();
    let mut out = String::new();
    for i in 0..p {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(m: &SymMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, matrix_to_csv(m))?;
    Ok(())
}

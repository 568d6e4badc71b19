//! Data ingestion, centering, and covariance initializers.
//!
//! The sample covariance uses the `1/n` divisor so that the unweighted case
//! coincides with the weighted covariance used by the estimator. The robust
//! initializer pairs Spearman rank correlation (mapped through
//! `2 sin(pi/6 r)`) with a MAD scale per variable.

use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// An `n x p` observation matrix with centering metadata.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    p: usize,
    /// Row-major storage: observation `i` occupies `rows[i*p .. (i+1)*p]`.
    rows: Vec<f64>,
    centered: bool,
    /// Column means subtracted by [`center`], retained for reporting.
    shift: Option<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset from row-major values. Estimation entry points
    /// impose their own sample-size requirements (`fit` needs `n >= 2`,
    /// `spearman_cov` needs `n >= 3`); construction only requires a
    /// nonempty rectangular table.
    pub fn from_rows(n: usize, p: usize, rows: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 || rows.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: rows.len(),
            });
        }
        Ok(Dataset {
            n,
            p,
            rows,
            centered: false,
            shift: None,
        })
    }

    /// Builds a dataset from a slice of observation vectors.
    pub fn from_observations(obs: &[Vec<f64>]) -> Result<Self> {
        let n = obs.len();
        let p = obs.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(n * p);
        for r in obs {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: r.len(),
                });
            }
            rows.extend_from_slice(r);
        }
        Dataset::from_rows(n, p, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Column means removed by centering, if any.
    pub fn centering_shift(&self) -> Option<&[f64]> {
        self.shift.as_deref()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.p)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.p];
        for row in self.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= self.n as f64;
        }
        means
    }

    /// The subset of observations at `indices`, preserving order and the
    /// centering flag of the parent.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut rows = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            rows.extend_from_slice(self.row(i));
        }
        Dataset {
            n: indices.len(),
            p: self.p,
            rows,
            centered: self.centered,
            shift: None,
        }
    }
}

/// Reads a rectangular numeric CSV file: comma-separated, UTF-8, one
/// observation per line, optionally one header row. The returned dataset
/// is uncentered.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    parse_csv(BufReader::new(file), has_header)
}

/// CSV parsing from any reader; see [`load_csv`].
pub fn parse_csv(reader: impl BufRead, has_header: bool) -> Result<Dataset> {
    let mut rows: Vec<f64> = Vec::new();
    let mut p = 0usize;
    let mut n = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if idx == 0 && has_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if p == 0 {
            p = fields.len();
        } else if fields.len() != p {
            return Err(Error::Parse {
                line: line_no,
                field: 1,
                message: format!("expected {} fields, found {}", p, fields.len()),
            });
        }
        for (fi, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                field: fi + 1,
                message: format!("not a number: {:?}", field.trim()),
            })?;
            rows.push(v);
        }
        n += 1;
    }
    if n == 0 || p == 0 {
        return Err(Error::Parse {
            line: 1,
            field: 1,
            message: "empty table".to_string(),
        });
    }
    Dataset::from_rows(n, p, rows)
}

/// Serializes a dataset in the same CSV format [`load_csv`] reads: no
/// header, one observation per line, full round-trip float formatting.
pub fn to_csv_string(d: &Dataset) -> String {
    let mut out = String::new();
    for row in d.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Writes [`to_csv_string`] to a file.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_csv_string(d))?;
    Ok(())
}

/// Subtracts the column means; the removed means are retained on the
/// returned dataset for reporting.
pub fn center(d: &Dataset) -> Dataset {
    let means = d.column_means();
    let p = d.p;
    let mut rows = d.rows.clone();
    for row in rows.chunks_exact_mut(p) {
        for (v, m) in row.iter_mut().zip(&means) {
            *v -= m;
        }
    }
    Dataset {
        n: d.n,
        p,
        rows,
        centered: true,
        shift: Some(means),
    }
}

/// Sample covariance `S = (1/n) sum_i x_i x_i^T` of a centered dataset.
pub fn sample_cov(d: &Dataset) -> SymMatrix {
    let p = d.p;
    let mut acc = vec![0.0; p * p];
    for row in d.rows() {
        for i in 0..p {
            let xi = row[i];
            if xi == 0.0 {
                continue;
            }
            for j in i..p {
                acc[i * p + j] += xi * row[j];
            }
        }
    }
    let inv_n = 1.0 / d.n as f64;
    SymMatrix::from_fn(p, |i, j| acc[i * p + j] * inv_n)
}

/// Robust covariance initializer: Spearman rank correlation mapped through
/// `R_ij = 2 sin(pi/6 r_ij)`, scaled by per-variable MAD estimates
/// (`1.4826 * median absolute deviation`). The diagonal is forced to the
/// squared scale.
pub fn spearman_cov(d: &Dataset) -> Result<SymMatrix> {
    let n = d.n;
    let p = d.p;
    if n < 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: n });
    }
    let mut scales = vec![0.0; p];
    let mut col = vec![0.0; n];
    for j in 0..p {
        for i in 0..n {
            col[i] = d.row(i)[j];
        }
        let mad = median_abs_deviation(&col);
        if mad == 0.0 {
            return Err(Error::DegenerateColumn(j));
        }
        scales[j] = 1.4826 * mad;
    }
    let ranks: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let column: Vec<f64> = (0..n).map(|i| d.row(i)[j]).collect();
            average_ranks(&column)
        })
        .collect();
    let corr = SymMatrix::from_fn(p, |i, j| {
        if i == j {
            1.0
        } else {
            let r = pearson(&ranks[i], &ranks[j]);
            2.0 * (std::f64::consts::FRAC_PI_6 * r).sin()
        }
    });
    Ok(SymMatrix::from_fn(p, |i, j| {
        if i == j {
            scales[i] * scales[i]
        } else {
            scales[i] * scales[j] * corr.get(i, j)
        }
    }))
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn median_abs_deviation(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = median(&sorted);
    let mut dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    dev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    median(&dev)
}

/// Ranks in 1..=n with ties receiving the average of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share the same value
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let da = x - ma;
        let db = y - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

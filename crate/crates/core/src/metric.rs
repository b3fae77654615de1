//! Finite metric spaces stored as dense, validated distance matrices.
//!
//! A [`DistanceMatrix`] is immutable once built. Every constructor runs the
//! full set of checks (square, nonnegative, zero diagonal, symmetric within
//! tolerance, positive off the diagonal, triangle inequality within
//! `tol_rel * max_entry`), so downstream scans can assume a genuine metric.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_TOL_REL: f64 = 1e-9;

/// Outcome of checking a raw matrix against the metric axioms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport<T> {
    pub symmetric: bool,
    pub triangle_ok: bool,
    /// `(i, j, k, d[i][j] - d[i][k] - d[k][j])` maximizing the violation.
    pub worst_triple: Option<(usize, usize, usize, T)>,
    pub positive_offdiag: bool,
    pub nonnegative: bool,
    pub zero_diagonal: bool,
    pub tol_rel: T,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn is_valid(&self) -> bool {
        self.symmetric
            && self.triangle_ok
            && self.positive_offdiag
            && self.nonnegative
            && self.zero_diagonal
    }
}

/// Labeled symmetric matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    labels: Vec<String>,
    n: usize,
    d: Vec<T>,
    tol_rel: T,
}

/// Unvalidated matrix as read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RawMatrix<T> {
    pub labels: Vec<String>,
    pub d: Vec<Vec<T>>,
}

fn check_square<T>(labels: usize, entries: &[Vec<T>]) -> Result<()> {
    if entries.len() != labels || entries.iter().any(|row| row.len() != labels) {
        return Err(Error::NonSquare { labels });
    }
    Ok(())
}

fn max_entry<T: Scalar>(entries: &[Vec<T>]) -> T {
    entries
        .iter()
        .flat_map(|r| r.iter().copied())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Largest `d[i][j] - d[i][k] - d[k][j]` over `i < j`, `k ∉ {i, j}`.
/// Ties keep the lexicographically smallest triple.
fn worst_triple<T: Scalar>(n: usize, at: impl Fn(usize, usize) -> T) -> Option<(usize, usize, usize, T)> {
    let mut worst: Option<(usize, usize, usize, T)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = at(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let v = dij - at(i, k) - at(k, j);
                if worst.is_none_or(|w| v > w.3) {
                    worst = Some((i, j, k, v));
                }
            }
        }
    }
    worst
}

/// Checks `entries` without building a matrix. Only structural problems
/// (non-square input) are errors; everything else lands in the report.
pub fn validate_entries<T: Scalar>(entries: &[Vec<T>], tol_rel: T) -> Result<ValidationReport<T>> {
    let n = entries.len();
    check_square(n, entries)?;
    let scale = max_entry(entries);
    let slack = tol_rel * scale;
    let mut nonnegative = true;
    let mut zero_diagonal = true;
    let mut symmetric = true;
    let mut positive_offdiag = true;
    for i in 0..n {
        for j in 0..n {
            let v = entries[i][j];
            if !(v >= T::zero()) || !v.is_finite() {
                nonnegative = false;
            }
            if i == j {
                if v.abs() > slack {
                    zero_diagonal = false;
                }
            } else {
                if (v - entries[j][i]).abs() > slack {
                    symmetric = false;
                }
                if !(v > T::zero()) {
                    positive_offdiag = false;
                }
            }
        }
    }
    let half = T::lit(0.5);
    let worst = worst_triple(n, |i, j| half * (entries[i][j] + entries[j][i]));
    let triangle_ok = worst.is_none_or(|w| w.3 <= slack);
    Ok(ValidationReport {
        symmetric,
        triangle_ok,
        worst_triple: worst,
        positive_offdiag,
        nonnegative,
        zero_diagonal,
        tol_rel,
    })
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Validates and builds. Asymmetry within `tol_rel * max_entry` is
    /// averaged away; anything larger is an error.
    pub fn build(labels: Vec<String>, entries: Vec<Vec<T>>, tol_rel: T) -> Result<Self> {
        let n = labels.len();
        check_square(n, &entries)?;
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !(*v >= T::zero()) || !v.is_finite() {
                    return Err(Error::NegativeEntry { i, j });
                }
            }
        }
        let scale = max_entry(&entries);
        let slack = tol_rel * scale;
        for i in 0..n {
            if entries[i][i] > slack {
                return Err(Error::NonZeroDiagonal { i });
            }
        }
        let mut d = vec![T::zero(); n * n];
        let half = T::lit(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (entries[i][j], entries[j][i]);
                if (a - b).abs() > slack {
                    return Err(Error::Asymmetric { i, j, amount: (a - b).abs().to_f64_lossy() });
                }
                let v = if a == b { a } else { half * (a + b) };
                if !(v > T::zero()) {
                    return Err(Error::ZeroOffDiagonal { i, j });
                }
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        if let Some((i, j, k, amount)) = worst_triple(n, |i, j| d[i * n + j]) {
            if amount > slack {
                return Err(Error::TriangleViolation { i, j, k, amount: amount.to_f64_lossy() });
            }
        }
        Ok(Self { labels, n, d, tol_rel })
    }

    /// Builds with generated labels `0, 1, ..., n-1`.
    pub fn from_entries(entries: Vec<Vec<T>>, tol_rel: T) -> Result<Self> {
        let labels = (0..entries.len()).map(|i| i.to_string()).collect();
        Self::build(labels, entries, tol_rel)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tol_rel(&self) -> T {
        self.tol_rel
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.d[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry (the diameter).
    pub fn scale(&self) -> T {
        self.d.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Re-runs validation at the tolerance the matrix was built with.
    pub fn validate(&self) -> ValidationReport<T> {
        validate_entries(&self.to_rows(), self.tol_rel).expect("stored matrix is square")
    }

    /// Principal submatrix on `subset` (in the given order).
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut seen = HashSet::new();
        for &i in subset {
            if i >= self.n {
                return Err(Error::IndexOutOfRange { index: i, len: self.n });
            }
            if !seen.insert(i) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        let m = subset.len();
        let mut d = Vec::with_capacity(m * m);
        for &i in subset {
            for &j in subset {
                d.push(self.get(i, j));
            }
        }
        Ok(Self {
            labels: subset.iter().map(|&i| self.labels[i].clone()).collect(),
            n: m,
            d,
            tol_rel: self.tol_rel,
        })
    }

    /// Scales every distance by `s > 0`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            labels: self.labels.clone(),
            n: self.n,
            d: self.d.iter().map(|&v| v * s).collect(),
            tol_rel: self.tol_rel,
        }
    }

    pub fn to_raw(&self) -> RawMatrix<T> {
        RawMatrix { labels: self.labels.clone(), d: self.to_rows() }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_raw().write_csv(w)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, &self.to_raw())?;
        Ok(())
    }
}

impl<T: Scalar> RawMatrix<T> {
    /// Reads the `label,<l1>,...,<ln>` CSV layout.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(r);
        let mut records = rdr.records();
        let header = records.next().ok_or_else(|| Error::Parse("empty matrix file".into()))??;
        let mut fields = header.iter();
        fields.next();
        let labels: Vec<String> = fields.map(|s| s.trim().to_string()).collect();
        let n = labels.len();
        let mut d = Vec::with_capacity(n);
        for (row_no, rec) in records.enumerate() {
            let rec = rec?;
            if rec.len() == 1 && rec.get(0).is_none_or(|s| s.trim().is_empty()) {
                continue;
            }
            if rec.len() != n + 1 {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    row_no + 1,
                    rec.len(),
                    n + 1
                )));
            }
            let label = rec.get(0).unwrap_or("").trim();
            if labels.get(row_no).map(|s| s.as_str()) != Some(label) {
                return Err(Error::Parse(format!("row {} label `{label}` does not match header", row_no + 1)));
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.trim()
                        .parse::<T>()
                        .map_err(|_| Error::Parse(format!("row {}: bad number `{s}`", row_no + 1)))
                })
                .collect::<Result<Vec<T>>>()?;
            d.push(row);
        }
        if d.len() != n {
            return Err(Error::Parse(format!("expected {n} rows, found {}", d.len())));
        }
        Ok(Self { labels, d })
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    /// Dispatches on the file extension: `.json` is JSON, anything else CSV.
    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::read_json(f)
        } else {
            Self::read_csv(f)
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(w);
        let mut header = vec!["label".to_string()];
        header.extend(self.labels.iter().cloned());
        wtr.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.d) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.fmt_exact()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn validate(&self, tol_rel: T) -> Result<ValidationReport<T>> {
        if self.d.len() != self.labels.len() {
            return Err(Error::NonSquare { labels: self.labels.len() });
        }
        validate_entries(&self.d, tol_rel)
    }

    pub fn into_matrix(self, tol_rel: T) -> Result<DistanceMatrix<T>> {
        DistanceMatrix::build(self.labels, self.d, tol_rel)
    }
}

/// Free-function form of [`DistanceMatrix::build`].
pub fn build_matrix<T: Scalar>(labels: Vec<String>, entries: Vec<Vec<T>>, tol_rel: T) -> Result<DistanceMatrix<T>> {
    DistanceMatrix::build(labels, entries, tol_rel)
}

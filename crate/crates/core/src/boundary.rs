//! Boundary-inversion metric on a sampled domain.
//!
//! For a domain `U` with boundary sample `B`,
//!
//! ```text
//! λ(x, y) = max_{p ∈ B} d(x, y) / (d(x, p) · d(y, p))
//! ρ(x, y) = log(1 + λ(x, y))
//! ```
//!
//! In a Ptolemaic ambient space `ρ` is a metric that is strongly hyperbolic
//! with parameter 1 (hence Gromov hyperbolic with parameter `log 2`), for any
//! nonempty boundary sample.

use std::collections::HashSet;
use std::io::Read;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;
use crate::model::{ModelSpace, Point};
use crate::scalar::Scalar;

/// Largest boundary inversion of the pair `(x, y)`.
///
/// Zero when `x` and `y` coincide. A boundary point at distance zero from
/// either argument is an error; the index of the first offender is returned.
pub fn lambda_sup<P, T, F>(x: &P, y: &P, boundary: &[P], dist: F) -> Result<T>
where
    T: Scalar,
    F: Fn(&P, &P) -> T,
{
    lambda_sup_indexed(x, y, boundary, &dist).map_err(|f| fault_to_error(f, |k| k.to_string()))
}

fn lambda_sup_indexed<P, T, F>(x: &P, y: &P, boundary: &[P], dist: &F) -> std::result::Result<T, BoundaryFault>
where
    T: Scalar,
    F: Fn(&P, &P) -> T,
{
    if boundary.is_empty() {
        return Err(BoundaryFault::Empty);
    }
    let dxy = dist(x, y);
    let mut best = T::zero();
    for (k, p) in boundary.iter().enumerate() {
        let (dxp, dyp) = (dist(x, p), dist(y, p));
        if !(dxp > T::zero()) || !(dyp > T::zero()) {
            return Err(BoundaryFault::On(k));
        }
        let v = dxy / dxp / dyp;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BoundaryFault {
    Empty,
    On(usize),
}

fn fault_to_error(fault: BoundaryFault, label: impl Fn(usize) -> String) -> Error {
    match fault {
        BoundaryFault::Empty => Error::EmptyBoundary,
        BoundaryFault::On(k) => Error::PointOnBoundary { boundary: label(k) },
    }
}

/// `log(1 + λ(x, y))`.
pub fn rho<P, T, F>(x: &P, y: &P, boundary: &[P], dist: F) -> Result<T>
where
    T: Scalar,
    F: Fn(&P, &P) -> T,
{
    if boundary.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    Ok(lambda_sup(x, y, boundary, dist)?.ln_1p())
}

/// `log(1 + d(x,y) / ((1 + d(x,p))(1 + d(y,p))))`.
pub fn sp_metric<P, T, F>(x: &P, y: &P, p: &P, dist: F) -> T
where
    T: Scalar,
    F: Fn(&P, &P) -> T,
{
    let s = dist(x, y) / ((T::one() + dist(x, p)) * (T::one() + dist(y, p)));
    s.ln_1p()
}

/// Earlier Gromov constant for boundaries with pairwise separation at least
/// `R`: `½ log max{2 + 20/R, 392}`.
pub fn zx_prior_bound<T: Scalar>(r_sep: T) -> Result<T> {
    if !(r_sep > T::zero()) {
        return Err(Error::NonPositiveR(r_sep.to_f64_lossy()));
    }
    let arg = (T::lit(2.0) + T::lit(20.0) / r_sep).max(T::lit(392.0));
    Ok(T::lit(0.5) * arg.ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint<T> {
    pub label: String,
    pub point: Point<T>,
}

impl<T> LabeledPoint<T> {
    pub fn new(label: impl Into<String>, point: impl Into<Point<T>>) -> Self {
        Self { label: label.into(), point: point.into() }
    }
}

/// Interior and boundary points of a domain in one model space.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSample<T> {
    space: ModelSpace<T>,
    interior: Vec<LabeledPoint<T>>,
    boundary: Vec<LabeledPoint<T>>,
}

impl<T: Scalar> DomainSample<T> {
    /// Checks: nonempty boundary, every point on the model, distinct interior
    /// points and labels, and every interior point off the boundary.
    pub fn new(space: ModelSpace<T>, interior: Vec<LabeledPoint<T>>, boundary: Vec<LabeledPoint<T>>) -> Result<Self> {
        if boundary.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        for p in interior.iter().chain(&boundary) {
            space.check_point(&p.point)?;
        }
        let mut seen = HashSet::new();
        for p in &interior {
            if !seen.insert(p.label.as_str()) {
                return Err(Error::DuplicateLabel(p.label.clone()));
            }
        }
        for (i, a) in interior.iter().enumerate() {
            for b in &interior[..i] {
                if !(space.distance_unchecked(&a.point, &b.point) > T::zero()) {
                    return Err(Error::DuplicatePoint(a.label.clone()));
                }
            }
            for w in &boundary {
                if !(space.distance_unchecked(&a.point, &w.point) > T::zero()) {
                    return Err(Error::PointOnBoundary { boundary: format!("{} (interior {})", w.label, a.label) });
                }
            }
        }
        Ok(Self { space, interior, boundary })
    }

    pub fn space(&self) -> &ModelSpace<T> {
        &self.space
    }

    pub fn interior(&self) -> &[LabeledPoint<T>] {
        &self.interior
    }

    pub fn boundary(&self) -> &[LabeledPoint<T>] {
        &self.boundary
    }

    fn dist(&self) -> impl Fn(&Point<T>, &Point<T>) -> T + Sync + '_ {
        move |a, b| self.space.distance_unchecked(a, b)
    }

    /// `λ` between interior points `i` and `j` over the boundary subset `subset`.
    pub fn lambda(&self, i: usize, j: usize, subset: &[usize]) -> Result<T> {
        let pts: Vec<Point<T>> = subset.iter().map(|&k| self.boundary[k].point.clone()).collect();
        lambda_sup_indexed(&self.interior[i].point, &self.interior[j].point, &pts, &self.dist())
            .map_err(|f| fault_to_error(f, |k| self.boundary[subset[k]].label.clone()))
    }
}

/// `ρ` over the interior points of a sample, with the boundary subset used.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoMatrix<T> {
    pub matrix: DistanceMatrix<T>,
    /// Indices into the sample's boundary list.
    pub boundary_subset: Vec<usize>,
}

impl<T: Scalar> RhoMatrix<T> {
    /// Largest deviation between stored entries and `log(1+λ)` recomputed
    /// from `sample`.
    pub fn recheck(&self, sample: &DomainSample<T>) -> Result<T> {
        let n = self.matrix.len();
        let mut worst = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = sample.lambda(i, j, &self.boundary_subset)?.ln_1p();
                worst = worst.max((v - self.matrix.get(i, j)).abs());
            }
        }
        Ok(worst)
    }
}

/// `ρ` over all interior pairs using the full boundary sample.
pub fn rho_matrix<T: Scalar>(sample: &DomainSample<T>) -> Result<RhoMatrix<T>> {
    let all: Vec<usize> = (0..sample.boundary.len()).collect();
    rho_matrix_subset(sample, &all)
}

/// `ρ` over all interior pairs using only `subset` of the boundary. The
/// result is validated as a metric; a triangle violation here means a bug.
pub fn rho_matrix_subset<T: Scalar>(sample: &DomainSample<T>, subset: &[usize]) -> Result<RhoMatrix<T>> {
    if subset.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let nb = sample.boundary.len();
    if let Some(&k) = subset.iter().find(|&&k| k >= nb) {
        return Err(Error::IndexOutOfRange { index: k, len: nb });
    }
    let n = sample.interior.len();
    let pts: Vec<Point<T>> = subset.iter().map(|&k| sample.boundary[k].point.clone()).collect();
    let dist = sample.dist();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        return Ok(T::zero());
                    }
                    // compute each unordered pair in one orientation so the matrix is exactly symmetric
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    lambda_sup_indexed(&sample.interior[a].point, &sample.interior[b].point, &pts, &dist)
                        .map(|l| l.ln_1p())
                        .map_err(|f| fault_to_error(f, |k| sample.boundary[subset[k]].label.clone()))
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = sample.interior.iter().map(|p| p.label.clone()).collect();
    let matrix = DistanceMatrix::build(labels, rows, T::lit(crate::metric::DEFAULT_TOL_REL))?;
    Ok(RhoMatrix { matrix, boundary_subset: subset.to_vec() })
}

/// Reads `label,x1,...,xn` rows (an optional header row whose second field is
/// not numeric is skipped) and checks each point against `space`.
pub fn read_points<T: Scalar, R: Read>(space: &ModelSpace<T>, r: R) -> Result<Vec<LabeledPoint<T>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(r);
    let mut out = Vec::new();
    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let label = rec.get(0).unwrap_or("").trim().to_string();
        let coords: std::result::Result<Vec<T>, _> = rec.iter().skip(1).map(|s| s.trim().parse::<T>()).collect();
        let coords = match coords {
            Ok(c) => c,
            Err(_) if row_no == 0 => continue,
            Err(_) => return Err(Error::Parse(format!("row {}: non-numeric coordinate", row_no + 1))),
        };
        if coords.len() != space.coord_dim() {
            return Err(Error::Parse(format!(
                "row {} (`{label}`): {} coordinates, expected {}",
                row_no + 1,
                coords.len(),
                space.coord_dim()
            )));
        }
        space.check_point(&coords).map_err(|e| Error::Parse(format!("point `{label}`: {e}")))?;
        out.push(LabeledPoint::new(label, coords));
    }
    Ok(out)
}

/// Writes points as `label,x1,...,xn` with 17 significant digits.
pub fn write_points<T: Scalar, W: std::io::Write>(points: &[LabeledPoint<T>], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(w);
    for p in points {
        let mut rec = vec![p.label.clone()];
        rec.extend(p.point.iter().map(|v| v.fmt_exact()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

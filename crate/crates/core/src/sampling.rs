//! Seeded random generators for points, domain samples and finite metrics.

use rand::Rng;

use crate::boundary::{DomainSample, LabeledPoint};
use crate::error::Result;
use crate::metric::DistanceMatrix;
use crate::model::{exp_trusted, ModelSpace, Point};
use crate::scalar::Scalar;

/// Random point within `radius` of the basepoint (a cube in Euclidean space,
/// a geodesic disk in the hyperbolic plane, anywhere on the sphere).
pub fn random_point<T: Scalar, R: Rng + ?Sized>(space: &ModelSpace<T>, radius: T, rng: &mut R) -> Point<T> {
    let uniform = |rng: &mut R| T::lit(rng.gen_range(-1.0..1.0));
    match *space {
        ModelSpace::Euclidean { dim } => Point((0..dim).map(|_| radius * uniform(rng)).collect()),
        ModelSpace::Hyperbolic2 { .. } => {
            let angle = T::lit(rng.gen_range(0.0..std::f64::consts::TAU));
            let v = [T::zero(), angle.cos(), angle.sin()];
            let s = radius * T::lit(rng.gen_range(0.0..1.0f64).sqrt());
            exp_trusted(space, &space.basepoint(), &v, s)
        }
        ModelSpace::Sphere2 => loop {
            let v: Vec<T> = (0..3).map(|_| uniform(rng)).collect();
            let n = v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
            if n > T::lit(0.1) && n <= T::one() {
                break Point(v.into_iter().map(|x| x / n).collect());
            }
        },
    }
}

/// Random domain sample whose points are pairwise at least `min_sep` apart.
pub fn random_domain_sample<T: Scalar, R: Rng + ?Sized>(
    space: &ModelSpace<T>,
    n_interior: usize,
    n_boundary: usize,
    radius: T,
    min_sep: T,
    rng: &mut R,
) -> Result<DomainSample<T>> {
    let mut pts: Vec<Point<T>> = Vec::with_capacity(n_interior + n_boundary);
    while pts.len() < n_interior + n_boundary {
        let p = random_point(space, radius, rng);
        if pts.iter().all(|q| space.distance_unchecked(&p, q) >= min_sep) {
            pts.push(p);
        }
    }
    let boundary = pts.split_off(n_interior);
    DomainSample::new(
        *space,
        pts.into_iter().enumerate().map(|(i, p)| LabeledPoint::new(format!("u{i}"), p)).collect(),
        boundary.into_iter().enumerate().map(|(i, p)| LabeledPoint::new(format!("b{i}"), p)).collect(),
    )
}

/// Distance matrix of `points`.
pub fn distance_matrix<T: Scalar>(space: &ModelSpace<T>, points: &[Point<T>], tol_rel: T) -> Result<DistanceMatrix<T>> {
    let rows = points.iter().map(|a| points.iter().map(|b| space.distance_unchecked(a, b)).collect()).collect();
    DistanceMatrix::from_entries(rows, tol_rel)
}

/// Shortest-path metric of a complete graph with random edge weights in
/// `[lo, hi)`.
pub fn random_path_metric<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<DistanceMatrix<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.gen_range(lo..hi);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    DistanceMatrix::from_entries(d, 1e-9)
}

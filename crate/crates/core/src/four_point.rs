//! Exhaustive four-point analysis of finite metric spaces.
//!
//! Every scan visits each unordered quadruple `x < y < z < t` once and looks
//! only at the pairing with the largest left-hand side; the other two
//! inequalities of the quadruple are implied by it.
//!
//! Pairings are numbered `0 = xy|zt`, `1 = xz|yt`, `2 = xt|yz`.
//!
//! Parallel scans split the index space on the leading pair `(x, y)` and
//! merge chunk maxima with a lexicographic tie-break, so serial and parallel
//! runs return identical witnesses.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;
use crate::scalar::Scalar;

/// Serial or rayon-parallel scan. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrupleWitness<T> {
    pub indices: [usize; 4],
    /// Pairing used as the left-hand side, in `0..3`.
    pub pairing: u8,
    pub defect: T,
}

impl<T: Scalar> QuadrupleWitness<T> {
    /// The two index pairs of the witnessing pairing.
    pub fn pairs(&self) -> [(usize, usize); 2] {
        let [x, y, z, t] = self.indices;
        match self.pairing {
            0 => [(x, y), (z, t)],
            1 => [(x, z), (y, t)],
            _ => [(x, t), (y, z)],
        }
    }

    /// `true` if `self` wins over `other`: larger defect, then smaller indices.
    fn beats(&self, other: &Self) -> bool {
        if self.defect != other.defect {
            return self.defect > other.defect;
        }
        (self.indices, self.pairing) < (other.indices, other.pairing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GromovResult<T> {
    pub delta_min: T,
    pub witness: Option<QuadrupleWitness<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongResult<T> {
    pub epsilon: T,
    /// `1 - exp(ε(b-a)) - exp(ε(c-a))` maximized over quadruples; `-inf` below four points.
    pub max_defect: T,
    pub witness: Option<QuadrupleWitness<T>>,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMax<T> {
    Finite(T),
    /// No quadruple has a strictly largest pairing sum.
    Unbounded,
}

impl<T: Scalar> EpsilonMax<T> {
    pub fn value(self) -> T {
        match self {
            EpsilonMax::Finite(v) => v,
            EpsilonMax::Unbounded => T::infinity(),
        }
    }
}

fn better<T: Scalar>(a: Option<QuadrupleWitness<T>>, b: Option<QuadrupleWitness<T>>) -> Option<QuadrupleWitness<T>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Distances of a quadruple laid out as pairing pairs:
/// `[xy, zt, xz, yt, xt, yz]`.
type Sextet<T> = [T; 6];

fn scan_chunk<T, F>(m: &DistanceMatrix<T>, x: usize, y: usize, f: &F) -> Option<QuadrupleWitness<T>>
where
    T: Scalar,
    F: Fn(&Sextet<T>) -> (T, u8),
{
    let n = m.len();
    let (rx, ry) = (m.row(x), m.row(y));
    let dxy = rx[y];
    let mut best: Option<QuadrupleWitness<T>> = None;
    for z in (y + 1)..n {
        let rz = m.row(z);
        let (dxz, dyz) = (rx[z], ry[z]);
        for t in (z + 1)..n {
            let s = [dxy, rz[t], dxz, ry[t], rx[t], dyz];
            let (defect, pairing) = f(&s);
            // strict comparison keeps the first (smallest) maximizer
            if best.is_none_or(|b| defect > b.defect) {
                best = Some(QuadrupleWitness { indices: [x, y, z, t], pairing, defect });
            }
        }
    }
    best
}

/// Maximizes `f` over all unordered quadruples.
fn scan_max<T, F>(m: &DistanceMatrix<T>, exec: Exec, f: F) -> Option<QuadrupleWitness<T>>
where
    T: Scalar,
    F: Fn(&Sextet<T>) -> (T, u8) + Sync,
{
    let n = m.len();
    if n < 4 {
        return None;
    }
    let leading = (0..n - 3).flat_map(|x| ((x + 1)..n - 2).map(move |y| (x, y)));
    match exec {
        Exec::Serial => leading.fold(None, |acc, (x, y)| better(acc, scan_chunk(m, x, y, &f))),
        Exec::Parallel => {
            let pairs: Vec<(usize, usize)> = leading.collect();
            pairs
                .par_iter()
                .map(|&(x, y)| scan_chunk(m, x, y, &f))
                .reduce(|| None, better)
        }
    }
}

/// Index of the largest of three values (first on ties) and the other two
/// values in pairing order.
#[inline]
fn split_largest<T: Scalar>(v: [T; 3]) -> (u8, T, T, T) {
    let k = if v[0] >= v[1] && v[0] >= v[2] {
        0
    } else if v[1] >= v[2] {
        1
    } else {
        2
    };
    let (o1, o2) = match k {
        0 => (v[1], v[2]),
        1 => (v[0], v[2]),
        _ => (v[0], v[1]),
    };
    (k as u8, v[k], o1, o2)
}

#[inline]
fn pair_sums<T: Scalar>(s: &Sextet<T>) -> [T; 3] {
    [s[0] + s[1], s[2] + s[3], s[4] + s[5]]
}

/// Largest pairing product minus the sum of the other two, maximized over
/// quadruples. Returns `(-inf, None)` below four points.
pub fn ptolemaic_defect<T: Scalar>(m: &DistanceMatrix<T>) -> (T, Option<QuadrupleWitness<T>>) {
    ptolemaic_defect_with(m, Exec::default())
}

pub fn ptolemaic_defect_with<T: Scalar>(m: &DistanceMatrix<T>, exec: Exec) -> (T, Option<QuadrupleWitness<T>>) {
    let w = scan_max(m, exec, |s| {
        let (k, big, o1, o2) = split_largest([s[0] * s[1], s[2] * s[3], s[4] * s[5]]);
        (big - (o1 + o2), k)
    });
    (w.map_or(T::neg_infinity(), |w| w.defect), w)
}

/// Least δ with `S1 <= S2 + 2δ` on every quadruple.
pub fn gromov_delta<T: Scalar>(m: &DistanceMatrix<T>) -> GromovResult<T> {
    gromov_delta_with(m, Exec::default())
}

pub fn gromov_delta_with<T: Scalar>(m: &DistanceMatrix<T>, exec: Exec) -> GromovResult<T> {
    let half = T::lit(0.5);
    let w = scan_max(m, exec, |s| {
        let (k, big, o1, o2) = split_largest(pair_sums(s));
        (half * (big - o1.max(o2)), k)
    });
    GromovResult { delta_min: w.map_or(T::zero(), |w| w.defect), witness: w }
}

fn check_epsilon<T: Scalar>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveEpsilon(epsilon.to_f64_lossy()))
    }
}

/// Largest violation of `exp(εa) <= exp(εb) + exp(εc)` (halved pairing sums
/// `a >= b >= c`), evaluated as `1 - exp(ε(b-a)) - exp(ε(c-a))`.
pub fn strong_defect<T: Scalar>(m: &DistanceMatrix<T>, epsilon: T) -> Result<StrongResult<T>> {
    strong_defect_with(m, epsilon, Exec::default())
}

pub fn strong_defect_with<T: Scalar>(m: &DistanceMatrix<T>, epsilon: T, exec: Exec) -> Result<StrongResult<T>> {
    check_epsilon(epsilon)?;
    let half_eps = T::lit(0.5) * epsilon;
    let w = scan_max(m, exec, |s| {
        let (k, big, o1, o2) = split_largest(pair_sums(s));
        let defect = T::one() - (half_eps * (o1 - big)).exp() - (half_eps * (o2 - big)).exp();
        (defect, k)
    });
    let max_defect = w.map_or(T::neg_infinity(), |w| w.defect);
    Ok(StrongResult { epsilon, max_defect, witness: w, feasible: max_defect <= T::zero() })
}

/// Quadruples reduced to their halved-sum gaps `(a-b, a-c)`, keeping only
/// those not dominated coordinatewise by another quadruple. The defect grows
/// with both gaps, so the strong defect at any ε is attained on this set.
fn binding_gaps<T: Scalar>(m: &DistanceMatrix<T>, gap_floor: T) -> Vec<(T, T)> {
    fn front<T: Scalar>(mut v: Vec<(T, T)>) -> Vec<(T, T)> {
        v.sort_by(|a, b| b.partial_cmp(a).expect("finite gaps"));
        let mut out: Vec<(T, T)> = Vec::new();
        for g in v {
            if out.last().is_none_or(|l| g.1 > l.1) {
                out.push(g);
            }
        }
        out
    }
    let n = m.len();
    if n < 4 {
        return Vec::new();
    }
    let half = T::lit(0.5);
    let pairs: Vec<(usize, usize)> = (0..n - 3).flat_map(|x| ((x + 1)..n - 2).map(move |y| (x, y))).collect();
    let parts: Vec<Vec<(T, T)>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let (rx, ry) = (m.row(x), m.row(y));
            let mut local = Vec::new();
            for z in (y + 1)..n {
                let rz = m.row(z);
                for t in (z + 1)..n {
                    let sums = [rx[y] + rz[t], rx[z] + ry[t], rx[t] + ry[z]];
                    let (_, big, o1, o2) = split_largest(sums);
                    let (g1, g2) = (half * (big - o1.max(o2)), half * (big - o1.min(o2)));
                    if g1 > gap_floor {
                        local.push((g1, g2));
                    }
                }
            }
            front(local)
        })
        .collect();
    front(parts.into_iter().flatten().collect())
}

fn gaps_feasible<T: Scalar>(gaps: &[(T, T)], eps: T) -> bool {
    gaps.iter().all(|&(g1, g2)| T::one() - (-eps * g1).exp() - (-eps * g2).exp() <= T::zero())
}

/// Supremum of feasible ε by bisection on `[eps_lo, eps_hi]` to absolute
/// tolerance `tol`. Feasibility is monotone: the feasible set is `(0, ε*]`.
/// The returned value is the feasible end of the final bracket.
pub fn max_strong_epsilon<T: Scalar>(m: &DistanceMatrix<T>, eps_lo: T, eps_hi: T, tol: T) -> Result<EpsilonMax<T>> {
    check_epsilon(eps_lo)?;
    if !(eps_hi > eps_lo) {
        return Err(Error::BracketDoesNotStraddle { lo: eps_lo.to_f64_lossy(), hi: eps_hi.to_f64_lossy() });
    }
    let gaps = binding_gaps(m, gap_floor(m));
    if gaps.is_empty() {
        return Ok(EpsilonMax::Unbounded);
    }
    bisect(&gaps, eps_lo, eps_hi, tol)
}

/// Gaps at or below rounding noise of the largest distance never bind.
fn gap_floor<T: Scalar>(m: &DistanceMatrix<T>) -> T {
    T::lit(16.0) * T::epsilon() * m.scale()
}

fn bisect<T: Scalar>(gaps: &[(T, T)], eps_lo: T, eps_hi: T, tol: T) -> Result<EpsilonMax<T>> {
    if !gaps_feasible(gaps, eps_lo) || gaps_feasible(gaps, eps_hi) {
        return Err(Error::BracketDoesNotStraddle { lo: eps_lo.to_f64_lossy(), hi: eps_hi.to_f64_lossy() });
    }
    let (mut lo, mut hi) = (eps_lo, eps_hi);
    let two = T::lit(2.0);
    while hi - lo > tol {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if gaps_feasible(gaps, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EpsilonMax::Finite(lo))
}

pub const DEFAULT_EPS_TOL: f64 = 1e-10;

/// [`max_strong_epsilon`] with bracket `(1e-6, 64/diameter)` and tolerance
/// `1e-10`. If the upper end is still feasible it is doubled until it is not.
pub fn max_strong_epsilon_auto<T: Scalar>(m: &DistanceMatrix<T>) -> Result<EpsilonMax<T>> {
    let gaps = binding_gaps(m, gap_floor(m));
    if gaps.is_empty() {
        return Ok(EpsilonMax::Unbounded);
    }
    let lo = T::lit(1e-6);
    let mut hi = T::lit(64.0) / m.scale();
    while gaps_feasible(&gaps, hi) {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Ok(EpsilonMax::Unbounded);
        }
    }
    bisect(&gaps, lo, hi, T::lit(DEFAULT_EPS_TOL))
}

/// Gromov parameter implied by strong hyperbolicity with parameter ε.
pub fn strong_to_gromov<T: Scalar>(epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    Ok(T::LN_2() / epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{LN_2, PI, SQRT_2};

    fn line4() -> DistanceMatrix<f64> {
        let p = [0.0, 1.0, 2.0, 3.0f64];
        DistanceMatrix::from_entries(p.iter().map(|a| p.iter().map(|b| (a - b).abs()).collect()).collect(), 1e-9)
            .unwrap()
    }

    fn square() -> DistanceMatrix<f64> {
        let s = SQRT_2;
        DistanceMatrix::from_entries(
            vec![
                vec![0.0, 1.0, s, 1.0],
                vec![1.0, 0.0, 1.0, s],
                vec![s, 1.0, 0.0, 1.0],
                vec![1.0, s, 1.0, 0.0],
            ],
            1e-9,
        )
        .unwrap()
    }

    /// Great-circle distances between unit vectors, evaluated directly.
    fn great_circle_quadruple() -> DistanceMatrix<f64> {
        let pts: Vec<[f64; 2]> = (0..4).map(|k| [(k as f64 * PI / 2.0).cos(), (k as f64 * PI / 2.0).sin()]).collect();
        let d = |a: [f64; 2], b: [f64; 2]| (a[0] * b[0] + a[1] * b[1]).clamp(-1.0, 1.0).acos();
        DistanceMatrix::from_entries(
            pts.iter().map(|&a| pts.iter().map(|&b| d(a, b)).collect()).collect(),
            1e-9,
        )
        .unwrap()
    }

    /// Four points with halved pairing sums 2, 1, 1 (sums 4, 2, 2).
    fn halved_211() -> DistanceMatrix<f64> {
        // xy = zt = 2, all other pairs 1
        DistanceMatrix::from_entries(
            vec![
                vec![0.0, 2.0, 1.0, 1.0],
                vec![2.0, 0.0, 1.0, 1.0],
                vec![1.0, 1.0, 0.0, 2.0],
                vec![1.0, 1.0, 2.0, 0.0],
            ],
            1e-9,
        )
        .unwrap()
    }

    #[test]
    fn ptolemaic_examples() {
        let (d, w) = ptolemaic_defect(&line4());
        assert_eq!(d, 0.0);
        assert_eq!(w.unwrap().pairing, 1);
        let (d, _) = ptolemaic_defect(&great_circle_quadruple());
        assert_relative_eq!(d, PI * PI / 2.0, epsilon = 1e-12);
        let (d, _) = ptolemaic_defect(&square());
        assert!(d.abs() < 1e-12);
        let small = line4().restrict(&[0, 1, 2]).unwrap();
        let (d, w) = ptolemaic_defect(&small);
        assert_eq!(d, f64::NEG_INFINITY);
        assert!(w.is_none());
    }

    #[test]
    fn gromov_examples() {
        assert_eq!(gromov_delta(&line4()).delta_min, 0.0);
        let g = gromov_delta(&square());
        assert_relative_eq!(g.delta_min, SQRT_2 - 1.0, epsilon = 1e-15);
        assert_eq!(g.witness.unwrap().pairing, 1);
        assert_eq!(g.witness.unwrap().defect, g.delta_min);
        let g3 = gromov_delta(&line4().restrict(&[0, 1, 3]).unwrap());
        assert_eq!(g3.delta_min, 0.0);
        assert!(g3.witness.is_none());
    }

    #[test]
    fn strong_examples() {
        let r = strong_defect(&line4(), 1.0).unwrap();
        assert_relative_eq!(r.max_defect, -(-1.0f64).exp(), epsilon = 1e-15);
        assert!(r.feasible);
        let r = strong_defect(&line4(), 1e-12).unwrap();
        assert_relative_eq!(r.max_defect, -1.0, epsilon = 1e-9);
        let r = strong_defect(&halved_211(), LN_2).unwrap();
        assert!(r.max_defect.abs() < 1e-15);
        assert!(r.feasible);
        assert!(matches!(strong_defect(&line4(), 0.0), Err(Error::NonPositiveEpsilon(_))));
        assert!(matches!(strong_defect(&line4(), -1.0), Err(Error::NonPositiveEpsilon(_))));
    }

    #[test]
    fn max_epsilon_examples() {
        assert_eq!(max_strong_epsilon(&line4(), 1e-6, 64.0 / 3.0, 1e-10).unwrap(), EpsilonMax::Unbounded);
        let e = max_strong_epsilon(&halved_211(), 1e-6, 32.0, 1e-10).unwrap().value();
        assert!((e - LN_2).abs() <= 1e-10, "{e}");
        let e = max_strong_epsilon(&square(), 1e-6, 64.0 / SQRT_2, 1e-10).unwrap().value();
        let expect = LN_2 / (SQRT_2 - 1.0);
        assert!((e - expect).abs() <= 1e-10, "{e} vs {expect}");
        assert_relative_eq!(expect, 1.6734, epsilon = 1e-3);
        let auto = max_strong_epsilon_auto(&square()).unwrap().value();
        assert!((auto - expect).abs() <= 1e-10);
    }

    #[test]
    fn bracket_must_straddle() {
        let err = max_strong_epsilon(&square(), 1e-6, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::BracketDoesNotStraddle { .. }));
        let err = max_strong_epsilon(&square(), 5.0, 10.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::BracketDoesNotStraddle { .. }));
    }

    #[test]
    fn strong_to_gromov_values() {
        assert_relative_eq!(strong_to_gromov(1.0).unwrap(), LN_2);
        assert_relative_eq!(strong_to_gromov(2.0).unwrap(), 0.5 * LN_2);
        assert_relative_eq!(strong_to_gromov(2.0 * LN_2).unwrap(), 0.5);
        assert!(strong_to_gromov(0.0f64).is_err());
    }

    /// Largest strong defect over all quadruples and pairings.
    fn brute_strong(m: &DistanceMatrix<f64>, eps: f64) -> f64 {
        let n = m.len();
        let mut worst = f64::NEG_INFINITY;
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    for t in z + 1..n {
                        let mut h = [m.get(x, y) + m.get(z, t), m.get(x, z) + m.get(y, t), m.get(x, t) + m.get(y, z)]
                            .map(|v| v / 2.0);
                        h.sort_by(|a, b| b.partial_cmp(a).unwrap());
                        worst = worst.max(1.0 - (eps * (h[1] - h[0])).exp() - (eps * (h[2] - h[0])).exp());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn bisection_matches_brute_force_threshold() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..40 {
            let m = crate::sampling::random_path_metric(7, 0.3, 3.0, &mut rng).unwrap();
            let EpsilonMax::Finite(star) = max_strong_epsilon_auto(&m).unwrap() else { continue };
            assert!(brute_strong(&m, star) <= 0.0);
            assert!(brute_strong(&m, star * (1.0 + 1e-8)) > 0.0, "ε* = {star} is not the threshold");
        }
    }

    #[test]
    fn serial_matches_parallel_on_ties() {
        // every quadruple of a 0-hyperbolic line ties at defect 0
        let p: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let m = DistanceMatrix::from_entries(p.iter().map(|a| p.iter().map(|b| (a - b).abs()).collect()).collect(), 1e-9)
            .unwrap();
        let s = gromov_delta_with(&m, Exec::Serial);
        let par = gromov_delta_with(&m, Exec::Parallel);
        assert_eq!(s, par);
        assert_eq!(s.witness.unwrap().indices, [0, 1, 2, 3]);
    }

    #[test]
    fn f32_square() {
        let s = 2f32.sqrt();
        let m = DistanceMatrix::<f32>::from_entries(
            vec![
                vec![0.0, 1.0, s, 1.0],
                vec![1.0, 0.0, 1.0, s],
                vec![s, 1.0, 0.0, 1.0],
                vec![1.0, s, 1.0, 0.0],
            ],
            1e-6,
        )
        .unwrap();
        assert!((gromov_delta(&m).delta_min - (s - 1.0)).abs() < 1e-6);
    }
}

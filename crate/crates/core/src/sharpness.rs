//! The four-point family that forces the Gromov parameter of `ρ` up to
//! `log 2`.
//!
//! Along a minimal geodesic `γ: [-r, r]` from `p` to `q` with parallel unit
//! normal `F`, shoot geodesics in direction `F` from `γ(∓r cos θ)` to get
//!
//! ```text
//! x± = exp_{γ(-r cos θ)}(± r sin θ · F)    y± = exp_{γ(r cos θ)}(± r sin θ · F)
//! ```
//!
//! With `p, q` on the boundary, the quadruple `(x+, x-, y+, y-)` under `ρ`
//! needs `δ(θ) → log 2` as `θ → 0`, while distances obey
//!
//! ```text
//! |d(x±,q) - 2r|, |d(y±,p) - 2r|           = O(θ)
//! |d(x±,y±) - 2r cos θ|, |d(x±,y∓) - 2r cos θ| = O(θ²)
//! |d(x±,p) - r sin θ|, |d(y±,q) - r sin θ|   = O(θ²)
//! d(x-,x+) = d(y-,y+) = 2r sin θ
//! ```

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{rho_matrix, DomainSample, LabeledPoint};
use crate::error::{Error, Result};
use crate::four_point::{max_strong_epsilon_auto, EpsilonMax};
use crate::metric::DistanceMatrix;
use crate::model::{exp_trusted, parallel_normal, GeodesicFrame, ModelSpace, Point};
use crate::scalar::Scalar;

pub const DEFAULT_THETA_MAX: f64 = 0.5;
pub const DEFAULT_STEPS: usize = 20;
/// Rows with `θ` at or below this are the asymptotic tail used for fits.
pub const TAIL_THETA: f64 = 0.1;

/// `θ_k = θ_max · 2^(-k)` for `k = 0..steps`.
pub fn geometric_grid<T: Scalar>(theta_max: T, steps: usize) -> Vec<T> {
    let half = T::lit(0.5);
    std::iter::successors(Some(theta_max), |&t| Some(t * half)).take(steps).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessConfig<T> {
    pub space: ModelSpace<T>,
    /// Half of `d(p, q)`.
    pub r: T,
    /// Strictly decreasing, each in `(0, π/2)`.
    pub theta_grid: Vec<T>,
    /// Boundary points besides `p` and `q`.
    pub extra_boundary: Vec<Point<T>>,
    /// Minimum distance from `q` to any other boundary point.
    pub r_sep: T,
}

fn check_space<T: Scalar>(space: &ModelSpace<T>) -> Result<()> {
    match space {
        ModelSpace::Euclidean { dim } if *dim >= 2 => Ok(()),
        ModelSpace::Hyperbolic2 { .. } => Ok(()),
        _ => Err(Error::InvalidConfig(format!("{space} is not a supported Ptolemaic model"))),
    }
}

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if theta > T::zero() && theta < T::lit(FRAC_PI_2) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("theta {theta} outside (0, π/2)")))
    }
}

impl<T: Scalar> SharpnessConfig<T> {
    /// Validates every invariant, including `d(p, w) >= d(p, q)` and
    /// `d(q, w) >= R` for each extra boundary point `w`.
    pub fn new(
        space: ModelSpace<T>,
        r: T,
        theta_grid: Vec<T>,
        extra_boundary: Vec<Point<T>>,
        r_sep: T,
    ) -> Result<Self> {
        check_space(&space)?;
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidConfig(format!("r must be positive, got {r}")));
        }
        if !(r_sep > T::zero()) {
            return Err(Error::InvalidConfig(format!("R must be positive, got {r_sep}")));
        }
        if theta_grid.is_empty() {
            return Err(Error::InvalidConfig("empty theta grid".into()));
        }
        for &t in &theta_grid {
            check_theta(t)?;
        }
        if theta_grid.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidConfig("theta grid must be strictly decreasing".into()));
        }
        let frame = GeodesicFrame::canonical(space, r)?;
        let (p, q) = (frame.start(), frame.end());
        let slack = T::one() - T::lit(1e-12);
        for (k, w) in extra_boundary.iter().enumerate() {
            space.check_point(w)?;
            let (dpw, dqw) = (space.distance_unchecked(&p, w), space.distance_unchecked(&q, w));
            if !(dpw >= T::lit(2.0) * r * slack) {
                return Err(Error::InvalidConfig(format!("extra boundary point {k} is closer to p than q is")));
            }
            if !(dqw >= r_sep * slack) {
                return Err(Error::InvalidConfig(format!("extra boundary point {k} is within R of q")));
            }
        }
        Ok(Self { space, r, theta_grid, extra_boundary, r_sep })
    }

    /// Boundary exactly `{p, q}`.
    pub fn bare(space: ModelSpace<T>, r: T, theta_grid: Vec<T>) -> Result<Self> {
        Self::new(space, r, theta_grid, Vec::new(), T::lit(2.0) * r)
    }

    /// One extra boundary point `w = γ(r + D)` beyond `q` on the extended
    /// geodesic, `D = max{R, 6η}` with `η` taken at the largest grid angle.
    pub fn with_default_extra(space: ModelSpace<T>, r: T, theta_grid: Vec<T>, r_sep: T) -> Result<Self> {
        check_space(&space)?;
        let theta_max = *theta_grid.first().ok_or_else(|| Error::InvalidConfig("empty theta grid".into()))?;
        let w = default_extra_point(&space, r, r_sep, theta_max)?;
        Self::new(space, r, theta_grid, vec![w], r_sep)
    }

    pub fn boundary(&self) -> Vec<Point<T>> {
        let frame = GeodesicFrame::canonical(self.space, self.r).expect("validated space");
        let mut b = vec![frame.start(), frame.end()];
        b.extend(self.extra_boundary.iter().cloned());
        b
    }
}

pub fn default_extra_point<T: Scalar>(space: &ModelSpace<T>, r: T, r_sep: T, theta_max: T) -> Result<Point<T>> {
    let c = build_configuration(space, r, theta_max)?;
    let reach = r_sep.max(T::lit(6.0) * c.eta());
    let frame = GeodesicFrame::canonical(*space, r)?;
    Ok(frame.point_at(r + reach))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<T> {
    pub space: ModelSpace<T>,
    pub r: T,
    pub theta: T,
    pub x_minus: Point<T>,
    pub x_plus: Point<T>,
    pub x_zero: Point<T>,
    pub y_minus: Point<T>,
    pub y_plus: Point<T>,
    pub y_zero: Point<T>,
    pub p: Point<T>,
    pub q: Point<T>,
}

/// The eight points of the construction on the canonical geodesic.
pub fn build_configuration<T: Scalar>(space: &ModelSpace<T>, r: T, theta: T) -> Result<Configuration<T>> {
    check_space(space)?;
    check_theta(theta)?;
    let frame = GeodesicFrame::canonical(*space, r)?;
    let (foot, reach) = (r * theta.cos(), r * theta.sin());
    let shoot = |t: T| -> Result<(Point<T>, Point<T>, Point<T>)> {
        let base = frame.point_at(t);
        let normal = parallel_normal(&frame, t)?;
        let minus = exp_trusted(space, &base, &normal, -reach);
        let plus = exp_trusted(space, &base, &normal, reach);
        Ok((minus, plus, base))
    };
    let (x_minus, x_plus, x_zero) = shoot(-foot)?;
    let (y_minus, y_plus, y_zero) = shoot(foot)?;
    Ok(Configuration {
        space: *space,
        r,
        theta,
        x_minus,
        x_plus,
        x_zero,
        y_minus,
        y_plus,
        y_zero,
        p: frame.start(),
        q: frame.end(),
    })
}

impl<T: Scalar> Configuration<T> {
    fn d(&self, a: &[T], b: &[T]) -> T {
        self.space.distance_unchecked(a, b)
    }

    /// `[x-, x+, y-, y+]`
    pub fn quadruple(&self) -> [&Point<T>; 4] {
        [&self.x_minus, &self.x_plus, &self.y_minus, &self.y_plus]
    }

    /// `max{d(x±, p), d(y±, q)}`
    pub fn eta(&self) -> T {
        [
            self.d(&self.x_minus, &self.p),
            self.d(&self.x_plus, &self.p),
            self.d(&self.y_minus, &self.q),
            self.d(&self.y_plus, &self.q),
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }

    /// Absolute deviations from the four distance estimates.
    pub fn residuals(&self) -> BoundResiduals<T> {
        let (r, th) = (self.r, self.theta);
        let two_r = T::lit(2.0) * r;
        let worst = |pairs: &[(&Point<T>, &Point<T>)], target: T| {
            pairs.iter().map(|(a, b)| (self.d(a, b) - target).abs()).fold(T::zero(), T::max)
        };
        let (xm, xp, ym, yp) = (&self.x_minus, &self.x_plus, &self.y_minus, &self.y_plus);
        BoundResiduals {
            rii: worst(&[(xm, &self.q), (xp, &self.q), (ym, &self.p), (yp, &self.p)], two_r),
            sv1: worst(&[(xm, ym), (xp, yp), (xm, yp), (xp, ym)], two_r * th.cos()),
            sv2: worst(&[(xm, &self.p), (xp, &self.p), (ym, &self.q), (yp, &self.q)], r * th.sin()),
            fc: worst(&[(xm, xp), (ym, yp)], two_r * th.sin()),
        }
    }
}

/// Largest absolute residual in each family of distance estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResiduals<T> {
    /// `|d(x±,q) - 2r|`, `|d(y±,p) - 2r|`
    pub rii: T,
    /// `|d(x±,y±) - 2r cos θ|`, `|d(x±,y∓) - 2r cos θ|`
    pub sv1: T,
    /// `|d(x±,p) - r sin θ|`, `|d(y±,q) - r sin θ|`
    pub sv2: T,
    /// `|d(x-,x+) - 2r sin θ|`, `|d(y-,y+) - 2r sin θ|`
    pub fc: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck<T> {
    pub residuals: BoundResiduals<T>,
    pub rii_ok: bool,
    pub sv1_ok: bool,
    pub sv2_ok: bool,
}

impl<T: Scalar> BoundCheck<T> {
    pub fn all_ok(&self) -> bool {
        self.rii_ok && self.sv1_ok && self.sv2_ok
    }
}

/// Compares a row's residuals with `σ̂θ` (first family) and `τ̂θ²` (second
/// and third).
pub fn verify_bounds<T: Scalar>(row: &SweepRow<T>, sigma_hat: T, tau_hat: T) -> BoundCheck<T> {
    let th = row.theta;
    let res = row.residuals;
    BoundCheck {
        residuals: res,
        rii_ok: res.rii <= sigma_hat * th,
        sv1_ok: res.sv1 <= tau_hat * th * th,
        sv2_ok: res.sv2 <= tau_hat * th * th,
    }
}

/// Where the boundary maximum is attained, and the margins of the
/// supporting product inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizerReport<T> {
    /// For every pair in `{x±, y±}` and extra point `w`, the inversion at `p`
    /// or `q` is at least the one at `w`.
    pub ok: bool,
    /// `(pair, extra index, relative margin)` with the smallest margin.
    pub worst: Option<((usize, usize), usize, T)>,
    /// Smallest relative margin of `d(x,p)d(y,p) < (5/6) d(x,w)d(y,w)`.
    pub margin_five_sixths: Option<T>,
    /// Smallest relative margin of `d(x-,p)d(x+,p) < (1/9) d(x-,w)d(x+,w)`
    /// and `d(y-,q)d(y+,q) < (1/9) d(y-,w)d(y+,w)`.
    pub margin_one_ninth: Option<T>,
    pub eta: T,
    /// `η < min{r/2, R/3}`
    pub eta_ok: bool,
}

/// Checks that the boundary suprema for pairs of `{x±, y±}` are attained at
/// `p` or `q`. Vacuously true without extra boundary points.
pub fn verify_maximizer_claim<T: Scalar>(config: &SharpnessConfig<T>, c: &Configuration<T>) -> MaximizerReport<T> {
    let eta = c.eta();
    let eta_ok = eta < (T::lit(0.5) * config.r).min(config.r_sep / T::lit(3.0));
    let z = c.quadruple();
    let mut ok = true;
    let mut worst: Option<((usize, usize), usize, T)> = None;
    let mut m56: Option<T> = None;
    let mut m19: Option<T> = None;
    let fold_min = |acc: Option<T>, v: T| Some(acc.map_or(v, |a: T| a.min(v)));
    for (k, w) in config.extra_boundary.iter().enumerate() {
        for i in 0..4 {
            for j in (i + 1)..4 {
                let dij = c.d(z[i], z[j]);
                let at = |b: &[T]| dij / c.d(z[i], b) / c.d(z[j], b);
                let best_pq = at(&c.p).max(at(&c.q));
                let margin = (best_pq - at(w)) / best_pq;
                if !(margin >= T::zero()) {
                    ok = false;
                }
                if worst.is_none_or(|(_, _, m)| margin < m) {
                    worst = Some(((i, j), k, margin));
                }
            }
        }
        for x in [&c.x_minus, &c.x_plus] {
            for y in [&c.y_minus, &c.y_plus] {
                let lhs = c.d(x, &c.p) * c.d(y, &c.p);
                let rhs = T::lit(5.0 / 6.0) * c.d(x, w) * c.d(y, w);
                m56 = fold_min(m56, (rhs - lhs) / rhs);
            }
        }
        let ninth = T::one() / T::lit(9.0);
        for (a, b, foot) in [(&c.x_minus, &c.x_plus, &c.p), (&c.y_minus, &c.y_plus, &c.q)] {
            let lhs = c.d(a, foot) * c.d(b, foot);
            let rhs = ninth * c.d(a, w) * c.d(b, w);
            m19 = fold_min(m19, (rhs - lhs) / rhs);
        }
    }
    MaximizerReport { ok, worst, margin_five_sixths: m56, margin_one_ninth: m19, eta, eta_ok }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepLambdas<T> {
    /// `λ(x-, x+)`
    pub xx: T,
    /// `λ(y-, y+)`
    pub yy: T,
    /// `λ(x-, y-)`
    pub xy_mm: T,
    /// `λ(x+, y+)`
    pub xy_pp: T,
    /// `λ(x-, y+)`
    pub xy_mp: T,
    /// `λ(x+, y-)`
    pub xy_pm: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub theta: T,
    pub configuration: Configuration<T>,
    pub lambda: SweepLambdas<T>,
    /// `4 · max cross product / diagonal product`
    pub ratio: T,
    /// `½ log(diagonal product / max cross product)`
    pub defect_delta: T,
    pub epsilon_max: EpsilonMax<T>,
    /// `ρ` on `[x-, x+, y-, y+]`.
    pub rho: DistanceMatrix<T>,
    pub residuals: BoundResiduals<T>,
    pub maximizer: MaximizerReport<T>,
}

fn sweep_row<T: Scalar>(config: &SharpnessConfig<T>, boundary: &[Point<T>], theta: T) -> Result<SweepRow<T>> {
    let c = build_configuration(&config.space, config.r, theta)?;
    let interior = ["x-", "x+", "y-", "y+"]
        .iter()
        .zip(c.quadruple())
        .map(|(l, p)| LabeledPoint::new(*l, p.clone()))
        .collect();
    let labels = ["p", "q"].into_iter().map(String::from).chain((0..).map(|k| format!("w{k}")));
    let bpts = boundary.iter().zip(labels).map(|(p, l)| LabeledPoint::new(l, p.clone())).collect();
    let sample = DomainSample::new(config.space, interior, bpts)?;
    let all: Vec<usize> = (0..boundary.len()).collect();
    let lam = |i, j| sample.lambda(i, j, &all);
    let lambda = SweepLambdas {
        xx: lam(0, 1)?,
        yy: lam(2, 3)?,
        xy_mm: lam(0, 2)?,
        xy_pp: lam(1, 3)?,
        xy_mp: lam(0, 3)?,
        xy_pm: lam(1, 2)?,
    };
    let one = T::one();
    let diag = (one + lambda.xx) * (one + lambda.yy);
    let cross = ((one + lambda.xy_mm) * (one + lambda.xy_pp)).max((one + lambda.xy_mp) * (one + lambda.xy_pm));
    let rho = rho_matrix(&sample)?.matrix;
    let epsilon_max = max_strong_epsilon_auto(&rho)?;
    Ok(SweepRow {
        theta,
        ratio: T::lit(4.0) * cross / diag,
        defect_delta: T::lit(0.5) * (diag / cross).ln(),
        lambda,
        epsilon_max,
        rho,
        residuals: c.residuals(),
        maximizer: verify_maximizer_claim(config, &c),
        configuration: c,
    })
}

/// One row per grid angle, in grid order.
pub fn sweep<T: Scalar>(config: &SharpnessConfig<T>) -> Result<Vec<SweepRow<T>>> {
    let boundary = config.boundary();
    config.theta_grid.par_iter().map(|&t| sweep_row(config, &boundary, t)).collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope<T: Scalar>(points: &[(T, T)]) -> Option<T> {
    if points.len() < 2 {
        return None;
    }
    let n = T::from_usize(points.len())?;
    let logs: Vec<(T, T)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = logs.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let sxy = logs.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    let sxx = logs.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    if !(sxx > T::zero()) {
        return None;
    }
    Some(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderFit<T> {
    pub slope: T,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualOrders<T> {
    pub rii: Option<OrderFit<T>>,
    pub sv1: Option<OrderFit<T>>,
    pub sv2: Option<OrderFit<T>>,
    pub defect: Option<OrderFit<T>>,
}

/// Residuals below this fraction of the quantity they are measured against
/// are rounding noise and excluded from fits.
pub const NOISE_FLOOR_REL: f64 = 1e-9;

/// Empirical orders of the residuals and of `log 2 - δ(θ)` over tail rows.
pub fn residual_orders<T: Scalar>(rows: &[SweepRow<T>]) -> ResidualOrders<T> {
    let floor = T::lit(NOISE_FLOOR_REL);
    let tail: Vec<&SweepRow<T>> = rows.iter().filter(|r| r.theta <= T::lit(TAIL_THETA)).collect();
    let fit = |value: &dyn Fn(&SweepRow<T>) -> (T, T)| {
        let pts: Vec<(T, T)> = tail
            .iter()
            .filter_map(|r| {
                let (v, reference) = value(r);
                (v > floor * reference).then_some((r.theta, v))
            })
            .collect();
        loglog_slope(&pts).map(|slope| OrderFit { slope, points: pts.len() })
    };
    let two = T::lit(2.0);
    ResidualOrders {
        rii: fit(&|r| (r.residuals.rii, two * r.configuration.r)),
        sv1: fit(&|r| (r.residuals.sv1, two * r.configuration.r * r.theta.cos())),
        sv2: fit(&|r| (r.residuals.sv2, r.configuration.r * r.theta.sin())),
        defect: fit(&|r| (T::LN_2() - r.defect_delta, T::LN_2())),
    }
}

/// Smallest `(σ̂, τ̂)` with `rii <= σ̂θ` and `sv1, sv2 <= τ̂θ²` on the given rows.
pub fn fit_bound_constants<T: Scalar>(rows: &[&SweepRow<T>]) -> (T, T) {
    rows.iter().fold((T::zero(), T::zero()), |(s, t), r| {
        let th = r.theta;
        (s.max(r.residuals.rii / th), t.max(r.residuals.sv1.max(r.residuals.sv2) / (th * th)))
    })
}

pub const SWEEP_COLUMNS: [&str; 13] = [
    "theta",
    "lambda_xx",
    "lambda_yy",
    "lambda_xy_pp",
    "lambda_xy_pm",
    "ratio",
    "defect_delta",
    "epsilon_max",
    "rii_resid",
    "sv1_resid",
    "sv2_resid",
    "fc_resid",
    "maximizer_ok",
];

/// Writes the sweep table with 17 significant digits per real.
pub fn write_sweep_csv<T: Scalar, W: Write>(rows: &[SweepRow<T>], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        let eps = match r.epsilon_max {
            EpsilonMax::Finite(v) => v.fmt_exact(),
            EpsilonMax::Unbounded => "inf".to_string(),
        };
        wtr.write_record([
            r.theta.fmt_exact(),
            r.lambda.xx.fmt_exact(),
            r.lambda.yy.fmt_exact(),
            r.lambda.xy_pp.fmt_exact(),
            r.lambda.xy_pm.fmt_exact(),
            r.ratio.fmt_exact(),
            r.defect_delta.fmt_exact(),
            eps,
            r.residuals.rii.fmt_exact(),
            r.residuals.sv1.fmt_exact(),
            r.residuals.sv2.fmt_exact(),
            r.residuals.fc.fmt_exact(),
            r.maximizer.ok.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::four_point::gromov_delta;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn plane() -> ModelSpace<f64> {
        ModelSpace::euclidean(2).unwrap()
    }

    #[test]
    fn euclidean_configuration_closed_form() {
        let th = 0.3f64;
        let c = build_configuration(&plane(), 1.0, th).unwrap();
        let close = |a: &Point<f64>, b: [f64; 2]| (a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15;
        assert!(close(&c.p, [-1.0, 0.0]));
        assert!(close(&c.q, [1.0, 0.0]));
        assert!(close(&c.x_minus, [-th.cos(), -th.sin()]));
        assert!(close(&c.x_plus, [-th.cos(), th.sin()]));
        assert!(close(&c.y_minus, [th.cos(), -th.sin()]));
        assert!(close(&c.y_plus, [th.cos(), th.sin()]));
        assert!(close(&c.x_zero, [-th.cos(), 0.0]));
        assert!(close(&c.y_zero, [th.cos(), 0.0]));
        assert!(c.residuals().fc < 1e-15);
    }

    #[test]
    fn configuration_rejects_bad_theta_and_space() {
        assert!(build_configuration(&plane(), 1.0, 0.0).is_err());
        assert!(build_configuration(&plane(), 1.0, FRAC_PI_2).is_err());
        assert!(build_configuration(&ModelSpace::Sphere2, 1.0, 0.1).is_err());
    }

    #[test]
    fn configuration_converges_to_endpoints() {
        for space in [plane(), ModelSpace::hyperbolic(1.0).unwrap()] {
            for th in [1e-2, 1e-4, 1e-6] {
                let c = build_configuration(&space, 1.0, th).unwrap();
                assert!(c.eta() <= 2.0 * th);
                assert!(space.distance_unchecked(&c.y_plus, &c.q) <= 2.0 * th);
            }
        }
    }

    #[test]
    fn euclidean_residual_closed_forms() {
        let th = 0.2f64;
        let c = build_configuration(&plane(), 1.0, th).unwrap();
        let res = c.residuals();
        let half = th / 2.0;
        assert_relative_eq!(res.sv2, 2.0 * half.sin() * (1.0 - half.cos()), max_relative = 1e-9);
        assert_relative_eq!(res.sv1, 2.0 * (1.0 - th.cos()), max_relative = 1e-9);
        assert_relative_eq!(res.rii, 2.0 - 2.0 * half.cos(), max_relative = 1e-9);
        let d = |a: &Point<f64>, b: &Point<f64>| plane().distance_unchecked(a, b);
        assert_relative_eq!(d(&c.x_plus, &c.y_plus), 2.0 * th.cos(), epsilon = 1e-15);
        assert_relative_eq!(d(&c.x_minus, &c.y_plus), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn euclidean_lambdas_match_closed_form() {
        let grid = vec![0.4, 0.1, 1e-3];
        let cfg = SharpnessConfig::bare(plane(), 1.0, grid).unwrap();
        for row in sweep(&cfg).unwrap() {
            let th = row.theta;
            let cot = |x: f64| x.cos() / x.sin();
            assert_relative_eq!(row.lambda.xx, cot(th / 2.0), max_relative = 1e-12);
            assert_relative_eq!(row.lambda.yy, cot(th / 2.0), max_relative = 1e-12);
            assert_relative_eq!(row.lambda.xy_mp, 1.0 / th.sin(), max_relative = 1e-12);
            assert_relative_eq!(row.lambda.xy_pm, 1.0 / th.sin(), max_relative = 1e-12);
            assert_relative_eq!(row.lambda.xy_mm, cot(th), max_relative = 1e-12);
            assert_relative_eq!(row.lambda.xy_pp, cot(th), max_relative = 1e-12);
            assert!(row.defect_delta < LN_2);
            let g = gromov_delta(&row.rho);
            assert_relative_eq!(g.delta_min, row.defect_delta, epsilon = 1e-12);
            let w = g.witness.unwrap();
            assert_eq!((w.indices, w.pairing), ([0, 1, 2, 3], 0));
        }
    }

    #[test]
    fn config_invariants_enforced() {
        let grid = vec![0.1];
        // too close to q
        let w = Point(vec![1.5, 0.0]);
        assert!(SharpnessConfig::new(plane(), 1.0, grid.clone(), vec![w], 1.0).is_err());
        // closer to p than q is
        let w = Point(vec![-1.0, 1.5]);
        assert!(SharpnessConfig::new(plane(), 1.0, grid.clone(), vec![w], 1.0).is_err());
        assert!(SharpnessConfig::bare(plane(), 1.0, vec![0.1, 0.2]).is_err());
        assert!(SharpnessConfig::bare(plane(), 1.0, vec![]).is_err());
        assert!(SharpnessConfig::bare(plane(), -1.0, grid).is_err());
    }

    #[test]
    fn maximizer_vacuous_without_extra() {
        let cfg = SharpnessConfig::bare(plane(), 1.0, vec![0.1]).unwrap();
        let c = build_configuration(&plane(), 1.0, 0.1).unwrap();
        let rep = verify_maximizer_claim(&cfg, &c);
        assert!(rep.ok);
        assert!(rep.worst.is_none() && rep.margin_five_sixths.is_none());
    }

    #[test]
    fn maximizer_with_far_extra_point() {
        // w at distance R = 10 beyond q
        let w = Point(vec![11.0, 0.0]);
        let cfg = SharpnessConfig::new(plane(), 1.0, vec![0.05], vec![w], 10.0).unwrap();
        let c = build_configuration(&plane(), 1.0, 0.05).unwrap();
        let rep = verify_maximizer_claim(&cfg, &c);
        assert!(rep.ok && rep.eta_ok);
        assert!(rep.margin_five_sixths.unwrap() > 0.0);
        assert!(rep.margin_one_ninth.unwrap() > 0.0);
    }

    #[test]
    fn geometric_grid_halves() {
        let g = geometric_grid(0.5f64, 4);
        assert_eq!(g, vec![0.5, 0.25, 0.125, 0.0625]);
    }

    #[test]
    fn loglog_slope_recovers_power() {
        let pts: Vec<(f64, f64)> = (1..10).map(|k| {
            let x = 0.5f64.powi(k);
            (x, 3.0 * x * x)
        }).collect();
        assert_relative_eq!(loglog_slope(&pts).unwrap(), 2.0, epsilon = 1e-12);
        assert!(loglog_slope(&pts[..1]).is_none());
    }

    #[test]
    fn sweep_csv_has_documented_columns() {
        let cfg = SharpnessConfig::bare(plane(), 1.0, vec![0.2, 0.1]).unwrap();
        let rows = sweep(&cfg).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_COLUMNS.join(","));
        assert_eq!(lines.count(), 2);
    }
}

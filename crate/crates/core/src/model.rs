//! Constant-curvature model spaces with closed-form geodesic primitives.
//!
//! * `Euclidean { dim }`: points are `dim` reals.
//! * `Hyperbolic2 { kappa }`: the hyperbolic plane of curvature `-kappa`, as
//!   the upper sheet `-x0² + x1² + x2² = -1/kappa`, `x0 > 0`.
//! * `Sphere2`: unit vectors in R³ (not Ptolemaic; used as a control).

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative residual above which a point or direction is rejected.
pub const CONSTRAINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Point<T>(pub Vec<T>);

impl<T> Deref for Point<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> From<Vec<T>> for Point<T> {
    fn from(v: Vec<T>) -> Self {
        Point(v)
    }
}

impl<T: Scalar> Point<T> {
    fn combine(a: &[T], wa: T, b: &[T], wb: T) -> Self {
        Point(a.iter().zip(b).map(|(&x, &y)| wa * x + wb * y).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpace<T> {
    Euclidean { dim: usize },
    /// `kappa > 0` denotes sectional curvature `-kappa`.
    Hyperbolic2 { kappa: T },
    Sphere2,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn minkowski<T: Scalar>(a: &[T], b: &[T]) -> T {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Scalar>(a: &[T], b: &[T]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl<T: Scalar> ModelSpace<T> {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("Euclidean dimension must be at least 1".into()));
        }
        Ok(ModelSpace::Euclidean { dim })
    }

    pub fn hyperbolic(kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(Error::InvalidSpace(format!("curvature parameter must be positive, got {kappa}")));
        }
        Ok(ModelSpace::Hyperbolic2 { kappa })
    }

    /// Number of coordinates per point.
    pub fn coord_dim(&self) -> usize {
        match self {
            ModelSpace::Euclidean { dim } => *dim,
            _ => 3,
        }
    }

    /// Euclidean and hyperbolic spaces are Ptolemaic; the sphere is not.
    pub fn is_ptolemaic(&self) -> bool {
        !matches!(self, ModelSpace::Sphere2)
    }

    /// Riemannian inner product of tangent vectors (ambient form).
    pub fn inner(&self, a: &[T], b: &[T]) -> T {
        match self {
            ModelSpace::Hyperbolic2 { .. } => minkowski(a, b),
            _ => dot(a, b),
        }
    }

    /// Origin, `(1/√κ, 0, 0)`, or the north pole `(0, 0, 1)`.
    pub fn basepoint(&self) -> Point<T> {
        match *self {
            ModelSpace::Euclidean { dim } => Point(vec![T::zero(); dim]),
            ModelSpace::Hyperbolic2 { kappa } => Point(vec![T::one() / kappa.sqrt(), T::zero(), T::zero()]),
            ModelSpace::Sphere2 => Point(vec![T::zero(), T::zero(), T::one()]),
        }
    }

    fn check_dim(&self, p: &[T]) -> Result<()> {
        if p.len() != self.coord_dim() {
            return Err(Error::DimensionMismatch { expected: self.coord_dim(), got: p.len() });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::ConstraintViolation { residual: f64::INFINITY });
        }
        Ok(())
    }

    /// Relative residual of the model constraint at `p`.
    pub fn constraint_residual(&self, p: &[T]) -> Result<T> {
        self.check_dim(p)?;
        Ok(match *self {
            ModelSpace::Euclidean { .. } => T::zero(),
            ModelSpace::Hyperbolic2 { kappa } => {
                if !(p[0] > T::zero()) {
                    return Ok(T::infinity());
                }
                let scale = (kappa * dot(p, p)).max(T::one());
                (kappa * minkowski(p, p) + T::one()).abs() / scale
            }
            ModelSpace::Sphere2 => (dot(p, p) - T::one()).abs(),
        })
    }

    pub fn check_point(&self, p: &[T]) -> Result<()> {
        let residual = self.constraint_residual(p)?;
        if residual > T::lit(CONSTRAINT_TOL) {
            return Err(Error::ConstraintViolation { residual: residual.to_f64_lossy() });
        }
        Ok(())
    }

    /// Geodesic distance after checking both points against the model.
    pub fn distance(&self, a: &[T], b: &[T]) -> Result<T> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    /// Geodesic distance of points already known to satisfy the model.
    pub fn distance_unchecked(&self, a: &[T], b: &[T]) -> T {
        match *self {
            ModelSpace::Euclidean { .. } => {
                a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + (x - y) * (x - y)).sqrt()
            }
            ModelSpace::Hyperbolic2 { kappa } => {
                let sk = kappa.sqrt();
                let c = -kappa * minkowski(a, b);
                if c > T::lit(2.0) {
                    c.acosh() / sk
                } else {
                    // chord form: |a-b|_L = (2/√κ) sinh(√κ d / 2), accurate for short distances
                    let w: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
                    let chord = minkowski(&w, &w).max(T::zero()).sqrt();
                    T::lit(2.0) * (sk * chord / T::lit(2.0)).asinh() / sk
                }
            }
            ModelSpace::Sphere2 => {
                let c = cross(a, b);
                dot(&c, &c).sqrt().atan2(dot(a, b))
            }
        }
    }

    fn check_direction(&self, p: &[T], v: &[T]) -> Result<()> {
        self.check_point(p)?;
        self.check_dim(v)?;
        let tol = T::lit(1e-10);
        let norm = self.inner(v, v);
        let along = match self {
            ModelSpace::Euclidean { .. } => T::zero(),
            ModelSpace::Hyperbolic2 { kappa } => *kappa * minkowski(p, v),
            ModelSpace::Sphere2 => dot(p, v),
        };
        let scale = dot(p, p).sqrt().max(T::one());
        if along.abs() > tol * scale {
            return Err(Error::NonUnitDirection { residual: along.to_f64_lossy() });
        }
        if (norm - T::one()).abs() > tol {
            return Err(Error::NonUnitDirection { residual: (norm - T::one()).to_f64_lossy() });
        }
        Ok(())
    }

    /// Point at signed arclength `s` along the geodesic from `p` with unit
    /// initial direction `v`.
    pub fn exp_map(&self, p: &[T], v: &[T], s: T) -> Result<Point<T>> {
        self.check_direction(p, v)?;
        Ok(self.exp_unchecked(p, v, s))
    }

    fn exp_unchecked(&self, p: &[T], v: &[T], s: T) -> Point<T> {
        match *self {
            ModelSpace::Euclidean { .. } => Point::combine(p, T::one(), v, s),
            ModelSpace::Hyperbolic2 { kappa } => {
                let sk = kappa.sqrt();
                Point::combine(p, (sk * s).cosh(), v, (sk * s).sinh() / sk)
            }
            ModelSpace::Sphere2 => Point::combine(p, s.cos(), v, s.sin()),
        }
    }

    /// Velocity at arclength `s` of the geodesic `exp(p, v, ·)`.
    fn exp_velocity(&self, p: &[T], v: &[T], s: T) -> Point<T> {
        match *self {
            ModelSpace::Euclidean { .. } => Point(v.to_vec()),
            ModelSpace::Hyperbolic2 { kappa } => {
                let sk = kappa.sqrt();
                Point::combine(p, sk * (sk * s).sinh(), v, (sk * s).cosh())
            }
            ModelSpace::Sphere2 => Point::combine(p, -s.sin(), v, s.cos()),
        }
    }

    fn normalize(&self, v: Point<T>) -> Point<T> {
        let n = self.inner(&v, &v).sqrt();
        Point(v.iter().map(|&x| x / n).collect())
    }

    /// Unit normal to the geodesic through `c` with unit direction `v`,
    /// oriented counterclockwise from `v`.
    fn unit_normal(&self, c: &[T], v: &[T]) -> Result<Point<T>> {
        match *self {
            ModelSpace::Euclidean { dim } => {
                if dim < 2 {
                    return Err(Error::InvalidSpace("a normal direction needs dimension at least 2".into()));
                }
                if dim == 2 {
                    return Ok(Point(vec![-v[1], v[0]]));
                }
                // Gram-Schmidt on the standard basis vector least aligned with v
                let k = (0..dim)
                    .min_by(|&i, &j| v[i].abs().partial_cmp(&v[j].abs()).expect("finite"))
                    .expect("dim >= 2");
                let mut e = vec![T::zero(); dim];
                e[k] = T::one();
                let proj = v[k];
                let w = Point::combine(&e, T::one(), v, -proj);
                Ok(self.normalize(w))
            }
            ModelSpace::Hyperbolic2 { .. } => {
                // Lorentz cross product: J(c × v) is Minkowski-orthogonal to c and v
                let w = cross(c, v);
                Ok(self.normalize(Point(vec![-w[0], w[1], w[2]])))
            }
            ModelSpace::Sphere2 => Ok(self.normalize(Point(cross(c, v).to_vec()))),
        }
    }
}

impl<T: Scalar> fmt::Display for ModelSpace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpace::Euclidean { dim } => write!(f, "euclidean:{dim}"),
            ModelSpace::Hyperbolic2 { kappa } => write!(f, "hyperbolic:{kappa}"),
            ModelSpace::Sphere2 => write!(f, "sphere"),
        }
    }
}

/// Parses `euclidean:N`, `hyperbolic:KAPPA`, or `sphere`.
impl<T: Scalar> FromStr for ModelSpace<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let bad = || Error::InvalidSpace(format!("cannot parse `{s}`"));
        match (kind.to_ascii_lowercase().as_str(), arg) {
            ("euclidean", Some(a)) => ModelSpace::euclidean(a.parse().map_err(|_| bad())?),
            ("euclidean", None) => ModelSpace::euclidean(2),
            ("hyperbolic", Some(a)) => ModelSpace::hyperbolic(a.parse().map_err(|_| bad())?),
            ("hyperbolic", None) => ModelSpace::hyperbolic(T::one()),
            ("sphere", None) => Ok(ModelSpace::Sphere2),
            _ => Err(bad()),
        }
    }
}

/// Unit-speed geodesic `γ` on `[-r, r]` with a parallel unit normal field.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicFrame<T> {
    pub space: ModelSpace<T>,
    /// `γ(0)`
    pub center: Point<T>,
    /// `γ'(0)`
    pub tangent: Point<T>,
    /// Normal at `γ(0)`.
    pub normal: Point<T>,
    pub r: T,
}

impl<T: Scalar> GeodesicFrame<T> {
    /// Geodesic through the basepoint along the first spatial axis, with the
    /// normal along the second. Euclidean: the x-axis centered at the origin.
    pub fn canonical(space: ModelSpace<T>, r: T) -> Result<Self> {
        let center = space.basepoint();
        let d = space.coord_dim();
        let axis = |k: usize| {
            let mut v = vec![T::zero(); d];
            v[k] = T::one();
            Point(v)
        };
        let (tangent, normal) = match space {
            ModelSpace::Euclidean { dim } if dim < 2 => {
                return Err(Error::InvalidSpace("a normal direction needs dimension at least 2".into()))
            }
            ModelSpace::Euclidean { .. } => (axis(0), axis(1)),
            ModelSpace::Hyperbolic2 { .. } => (axis(1), axis(2)),
            ModelSpace::Sphere2 => (axis(0), axis(1)),
        };
        Ok(Self { space, center, tangent, normal, r })
    }

    pub fn point_at(&self, t: T) -> Point<T> {
        self.space.exp_unchecked(&self.center, &self.tangent, t)
    }

    pub fn velocity_at(&self, t: T) -> Point<T> {
        self.space.exp_velocity(&self.center, &self.tangent, t)
    }

    pub fn start(&self) -> Point<T> {
        self.point_at(-self.r)
    }

    pub fn end(&self) -> Point<T> {
        self.point_at(self.r)
    }
}

/// Minimal geodesic with `γ(-r) = p`, `γ(r) = q`.
pub fn geodesic_between<T: Scalar>(space: &ModelSpace<T>, p: &[T], q: &[T]) -> Result<GeodesicFrame<T>> {
    let d = space.distance(p, q)?;
    if !(d > T::zero()) {
        return Err(Error::CoincidentPoints);
    }
    let half = T::lit(0.5);
    let (center, tangent) = match *space {
        ModelSpace::Euclidean { .. } => {
            let c = Point::combine(p, half, q, half);
            let v = Point::combine(q, T::one() / d, p, -T::one() / d);
            (c, v)
        }
        ModelSpace::Hyperbolic2 { kappa } => {
            let s = Point::combine(p, T::one(), q, T::one());
            let norm = (-kappa * minkowski(&s, &s)).sqrt();
            let c = Point(s.iter().map(|&x| x / norm).collect());
            let u = Point::combine(q, T::one(), &c, kappa * minkowski(&c, q));
            (c, space.normalize(u))
        }
        ModelSpace::Sphere2 => {
            let s = Point::combine(p, T::one(), q, T::one());
            let norm = dot(&s, &s).sqrt();
            if norm < T::lit(1e-12) {
                return Err(Error::AntipodalPoints);
            }
            let c = Point(s.iter().map(|&x| x / norm).collect());
            let u = Point::combine(q, T::one(), &c, -dot(&c, q));
            (c, space.normalize(u))
        }
    };
    let normal = space.unit_normal(&center, &tangent)?;
    Ok(GeodesicFrame { space: *space, center, tangent, normal, r: half * d })
}

/// Parallel transport of the frame's normal to `γ(t)`. In these models the
/// normal to the plane of the geodesic is constant in ambient coordinates.
pub fn parallel_normal<T: Scalar>(frame: &GeodesicFrame<T>, t: T) -> Result<Point<T>> {
    let slack = frame.r * T::lit(1e-12);
    if !(t.abs() <= frame.r + slack) {
        return Err(Error::ParameterOutOfRange { t: t.to_f64_lossy(), r: frame.r.to_f64_lossy() });
    }
    Ok(frame.normal.clone())
}

/// `exp_map` for points already on the model (no re-validation).
pub(crate) fn exp_trusted<T: Scalar>(space: &ModelSpace<T>, p: &[T], v: &[T], s: T) -> Point<T> {
    space.exp_unchecked(p, v, s)
}

//! The rearrangement inequality
//! `min{α+β, γ+δ}·min{α+γ, β+δ} <= αδ + βγ + 2√(αβγδ)` for nonnegative
//! inputs, and its three equality conditions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which equality conditions a tuple satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EqualityFlags {
    /// `αδ = 0` and `max{α,δ} >= |β-γ|`
    pub i: bool,
    /// `βγ = 0` and `max{β,γ} >= |α-δ|`
    pub ii: bool,
    /// `α = δ` and `β = γ`
    pub iii: bool,
}

impl EqualityFlags {
    pub fn any(self) -> bool {
        self.i || self.ii || self.iii
    }

    pub fn names(self) -> Vec<&'static str> {
        [(self.i, "i"), (self.ii, "ii"), (self.iii, "iii")]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect()
    }
}

fn check<T: Scalar>(v: [T; 4]) -> Result<()> {
    if v.iter().all(|x| *x >= T::zero() && x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NegativeInput)
    }
}

/// `(lhs, rhs)` of the inequality.
pub fn rearrangement_sides<T: Scalar>(alpha: T, beta: T, gamma: T, delta: T) -> Result<(T, T)> {
    check([alpha, beta, gamma, delta])?;
    let lhs = (alpha + beta).min(gamma + delta) * (alpha + gamma).min(beta + delta);
    // √(αδ)·√(βγ) avoids overflow in the four-way product
    let root = (alpha * delta).sqrt() * (beta * gamma).sqrt();
    let rhs = alpha * delta + beta * gamma + (root + root);
    Ok((lhs, rhs))
}

/// Equality conditions evaluated with tolerance `tol` relative to the
/// largest input `s`. A product counts as zero when its square root is at
/// most `tol·s`, since the right side depends on `√(αδ)` and `√(βγ)`.
pub fn equality_case<T: Scalar>(alpha: T, beta: T, gamma: T, delta: T, tol: T) -> Result<EqualityFlags> {
    check([alpha, beta, gamma, delta])?;
    let s = alpha.max(beta).max(gamma).max(delta);
    let lin = tol * s;
    let quad = lin * lin;
    Ok(EqualityFlags {
        i: alpha * delta <= quad && alpha.max(delta) >= (beta - gamma).abs() - lin,
        ii: beta * gamma <= quad && beta.max(gamma) >= (alpha - delta).abs() - lin,
        iii: (alpha - delta).abs() <= lin && (beta - gamma).abs() <= lin,
    })
}

/// `|lhs - rhs| <= tol·rhs`. Every term of the right side is nonnegative,
/// so rounding error on either side is bounded relative to `rhs`.
pub fn sides_equal<T: Scalar>(alpha: T, beta: T, gamma: T, delta: T, tol: T) -> Result<bool> {
    let (lhs, rhs) = rearrangement_sides(alpha, beta, gamma, delta)?;
    Ok((lhs - rhs).abs() <= tol * rhs)
}

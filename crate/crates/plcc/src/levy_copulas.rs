//! Bivariate Clayton Lévy copula on `[0, inf]^2`.
//!
//! The family couples marginal tail integrals to the joint one; its
//! conditional distribution in either argument is closed form and invertible,
//! which drives both conditional sampling and likelihood evaluation. All
//! value and density computations run in log space so that dependence
//! strengths up to `theta = 50` and rates up to `1e6` stay inside `f64`
//! range. Infinity is a legal rate value and takes the margin limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Dependence parameter of the Clayton Lévy copula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct ClaytonLevyParams<R> {
    /// Strictly positive; larger values couple the jumps more tightly.
    pub theta: R,
}

impl<R: Real> ClaytonLevyParams<R> {
    pub fn new(theta: R) -> Result<Self> {
        if !(theta > R::zero()) || !theta.is_finite() {
            return Err(Error::domain(
                "ClaytonLevyParams::new",
                format!("theta must be positive and finite, got {theta}"),
            ));
        }
        Ok(Self { theta })
    }
}

/// Lévy copula family used on tree-1 edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub enum LevyCopulaFamily<R> {
    Clayton(ClaytonLevyParams<R>),
}

impl<R: Real> LevyCopulaFamily<R> {
    pub fn clayton(theta: R) -> Result<Self> {
        Ok(LevyCopulaFamily::Clayton(ClaytonLevyParams::new(theta)?))
    }

    pub fn param(&self) -> R {
        match self {
            LevyCopulaFamily::Clayton(p) => p.theta,
        }
    }

    pub fn with_param(&self, value: R) -> Result<Self> {
        match self {
            LevyCopulaFamily::Clayton(_) => Self::clayton(value),
        }
    }

    /// Copula value `(u^-theta + v^-theta)^(-1/theta)` extended to `[0, inf]`.
    pub fn value(&self, u: R, v: R) -> Result<R> {
        check_rate("lc_value", u)?;
        check_rate("lc_value", v)?;
        let LevyCopulaFamily::Clayton(p) = self;
        if u == R::zero() || v == R::zero() {
            return Ok(R::zero());
        }
        if u == R::infinity() {
            return Ok(v);
        }
        if v == R::infinity() {
            return Ok(u);
        }
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        // lo * (1 + (lo/hi)^theta)^(-1/theta), evaluated via ln_1p.
        let ratio_pow = (p.theta * (lo.ln() - hi.ln())).exp();
        Ok(lo * (-ratio_pow.ln_1p() / p.theta).exp())
    }

    /// Conditional distribution of the other coordinate given a jump at rate
    /// `u` in this coordinate, evaluated at `v`:
    /// `F(v | u) = (1 + (u/v)^theta)^(-(theta+1)/theta)`.
    pub fn conditional(&self, u: R, v: R) -> Result<R> {
        if !(u > R::zero()) || !u.is_finite() {
            return Err(Error::domain(
                "lc_conditional",
                format!("conditioning rate must be positive and finite, got {u}"),
            ));
        }
        check_rate("lc_conditional", v)?;
        let LevyCopulaFamily::Clayton(p) = self;
        if v == R::zero() {
            return Ok(R::zero());
        }
        if v == R::infinity() {
            return Ok(R::one());
        }
        let t = p.theta * (u.ln() - v.ln());
        Ok((-(p.theta + R::one()) / p.theta * t.softplus()).exp())
    }

    /// Inverse of [`Self::conditional`] in `v`:
    /// `v = u * (w^(-theta/(theta+1)) - 1)^(-1/theta)`.
    pub fn conditional_inv(&self, u: R, w: R) -> Result<R> {
        if !(u > R::zero()) || !u.is_finite() {
            return Err(Error::domain(
                "lc_conditional_inv",
                format!("conditioning rate must be positive and finite, got {u}"),
            ));
        }
        if !(w > R::zero() && w < R::one()) {
            return Err(Error::domain(
                "lc_conditional_inv",
                format!("probability must lie in (0, 1), got {w}"),
            ));
        }
        let LevyCopulaFamily::Clayton(p) = self;
        let s = -p.theta / (p.theta + R::one()) * w.ln();
        // ln(e^s - 1), stable for s both near 0 and past the overflow range.
        let log_expm1 = if s > R::half() {
            s + (-(-s).exp()).ln_1p()
        } else {
            s.exp_m1().ln()
        };
        Ok(u * (-log_expm1 / p.theta).exp())
    }

    /// Density of the copula measure at `(u, v)`, both finite and positive.
    pub fn density(&self, u: R, v: R) -> Result<R> {
        Ok(self.log_density(u, v)?.exp())
    }

    /// Log density `ln[(1+theta) (uv)^(-theta-1) (u^-theta + v^-theta)^(-1/theta-2)]`.
    pub fn log_density(&self, u: R, v: R) -> Result<R> {
        for &x in &[u, v] {
            if !(x > R::zero()) || !x.is_finite() {
                return Err(Error::domain(
                    "lc_density",
                    format!("rates must be positive and finite, got {x}"),
                ));
            }
        }
        let LevyCopulaFamily::Clayton(p) = self;
        let theta = p.theta;
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        let ratio_pow = (theta * (lo.ln() - hi.ln())).exp();
        let two_theta_one = R::two() * theta + R::one();
        Ok(
            (R::one() + theta).ln() - (theta + R::one()) * (u.ln() + v.ln())
                + two_theta_one * lo.ln()
                - two_theta_one / theta * ratio_pow.ln_1p(),
        )
    }

    /// Copula mass of the box `[a1, b1] x [a2, b2]` by inclusion-exclusion.
    pub fn volume(&self, a: (R, R), b: (R, R)) -> Result<R> {
        if !(a.0 <= b.0 && a.1 <= b.1) {
            return Err(Error::domain(
                "lc_volume",
                format!(
                    "box corners must be ordered, got a=({}, {}), b=({}, {})",
                    a.0, a.1, b.0, b.1
                ),
            ));
        }
        Ok(
            self.value(b.0, b.1)? - self.value(a.0, b.1)? - self.value(b.0, a.1)?
                + self.value(a.0, a.1)?,
        )
    }
}

fn check_rate<R: Real>(op: &'static str, x: R) -> Result<()> {
    if x.is_nan() || x < R::zero() {
        return Err(Error::domain(op, format!("rates must be >= 0, got {x}")));
    }
    Ok(())
}

//! One-dimensional stable subordinator margins.
//!
//! The marginal jump measure has density `alpha * beta * x^(-alpha - 1)` on
//! `(0, inf)`, so the tail integral `U(x) = beta * x^(-alpha)` and its inverse
//! are closed form. Thresholded at `eps`, the margin is a compound Poisson
//! process with rate `beta * eps^(-alpha)` and Pareto jump sizes, which gives
//! the closed-form maximum likelihood estimator implemented in
//! [`fit_marginal`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Parameters of a stable subordinator margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct StableParams<R> {
    /// Shape, strictly in (0, 1).
    pub alpha: R,
    /// Intensity scale, strictly positive.
    pub beta: R,
}

impl<R: Real> StableParams<R> {
    pub fn new(alpha: R, beta: R) -> Result<Self> {
        if !(alpha > R::zero() && alpha < R::one()) {
            return Err(Error::domain(
                "StableParams::new",
                format!("alpha must lie in (0, 1), got {alpha}"),
            ));
        }
        if !(beta > R::zero()) || !beta.is_finite() {
            return Err(Error::domain(
                "StableParams::new",
                format!("beta must be positive and finite, got {beta}"),
            ));
        }
        Ok(Self { alpha, beta })
    }
}

/// Jump rate density `alpha * beta * x^(-alpha - 1)` for `x > 0`.
pub fn levy_density<R: Real>(p: &StableParams<R>, x: R) -> Result<R> {
    if !(x > R::zero()) {
        return Err(Error::domain(
            "levy_density",
            format!("x must be > 0, got {x}"),
        ));
    }
    Ok(p.alpha * p.beta * x.powf(-p.alpha - R::one()))
}

/// Log of [`levy_density`], evaluated without forming the power.
pub fn log_levy_density<R: Real>(p: &StableParams<R>, x: R) -> Result<R> {
    if !(x > R::zero()) {
        return Err(Error::domain(
            "log_levy_density",
            format!("x must be > 0, got {x}"),
        ));
    }
    Ok((p.alpha * p.beta).ln() - (p.alpha + R::one()) * x.ln())
}

/// Expected rate of jumps of size at least `x`: `U(x) = beta * x^(-alpha)`.
pub fn tail_integral<R: Real>(p: &StableParams<R>, x: R) -> Result<R> {
    if !(x > R::zero()) {
        return Err(Error::domain(
            "tail_integral",
            format!("x must be > 0, got {x}"),
        ));
    }
    Ok(p.beta * x.powf(-p.alpha))
}

/// Inverse of [`tail_integral`]: `U^{-1}(u) = (u / beta)^(-1 / alpha)`.
pub fn inv_tail_integral<R: Real>(p: &StableParams<R>, u: R) -> Result<R> {
    if !(u > R::zero()) {
        return Err(Error::domain(
            "inv_tail_integral",
            format!("u must be > 0, got {u}"),
        ));
    }
    Ok((u / p.beta).powf(-p.alpha.recip()))
}

/// Outcome of the marginal threshold MLE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedMarginal<R> {
    pub params: StableParams<R>,
    /// Set when the closed-form alpha left (0, 1) and was clamped back.
    pub clamped: bool,
    /// Maximized log-likelihood.
    pub loglik: R,
}

/// Width of the clamp band keeping fitted alpha inside (0, 1).
const ALPHA_CLAMP: f64 = 1e-6;

/// Closed-form MLE from jumps observed above `eps` over horizon `t`.
///
/// Maximizes `-t*beta*eps^(-alpha) + n*ln(alpha*beta) - (alpha+1)*sum(ln x_i)`,
/// giving `alpha = n / sum(ln(x_i/eps))` and `beta = n * eps^alpha / t`.
pub fn fit_marginal<R: Real>(jump_sizes: &[R], horizon: R, eps: R) -> Result<FittedMarginal<R>> {
    if !(eps > R::zero()) || !(horizon > R::zero()) {
        return Err(Error::domain(
            "fit_marginal",
            format!("need eps > 0 and horizon > 0, got eps={eps}, horizon={horizon}"),
        ));
    }
    let n = jump_sizes.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "marginal fit needs at least 2 jumps above the threshold, got {n}"
        )));
    }
    let mut log_ratio_sum = R::zero();
    for &x in jump_sizes {
        if !(x > eps) {
            return Err(Error::domain(
                "fit_marginal",
                format!("all jump sizes must exceed eps={eps}, got {x}"),
            ));
        }
        log_ratio_sum = log_ratio_sum + (x / eps).ln();
    }
    if !(log_ratio_sum > R::zero()) {
        return Err(Error::DegenerateData(
            "sum of log(x_i/eps) is zero; sizes are indistinguishable from the threshold".into(),
        ));
    }

    let n_r = R::from_usize(n).expect("count fits the scalar type");
    let alpha_raw = n_r / log_ratio_sum;
    let lo = R::of(ALPHA_CLAMP);
    let hi = R::one() - lo;
    let (alpha, clamped) = if alpha_raw < lo {
        (lo, true)
    } else if alpha_raw > hi {
        (hi, true)
    } else {
        (alpha_raw, false)
    };
    let beta = n_r * eps.powf(alpha) / horizon;
    let params = StableParams { alpha, beta };
    let loglik = marginal_loglik(&params, jump_sizes, horizon, eps)?;
    Ok(FittedMarginal {
        params,
        clamped,
        loglik,
    })
}

/// Compound Poisson log-likelihood of threshold observations.
pub fn marginal_loglik<R: Real>(
    p: &StableParams<R>,
    jump_sizes: &[R],
    horizon: R,
    eps: R,
) -> Result<R> {
    let rate = tail_integral(p, eps)?;
    let mut ll = -horizon * rate;
    for &x in jump_sizes {
        ll = ll + log_levy_density(p, x)?;
    }
    Ok(ll)
}

//! Bivariate distributional copulas for the higher vine trees.
//!
//! Ships the Gaussian family plus the independence copula. The conditional
//! distribution (`h` function) and its inverse are closed form for both,
//! which is what the simulation chain and the sequential estimator rely on.

pub mod normal;

use serde::{Deserialize, Serialize};

pub use normal::{bivar_norm_cdf, norm_cdf, norm_pdf, norm_quantile};

use crate::error::{Error, Result};
use crate::real::Real;

/// Correlation parameter of the bivariate Gaussian copula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct GaussianCopulaParams<R> {
    pub rho: R,
}

impl<R: Real> GaussianCopulaParams<R> {
    pub fn new(rho: R) -> Result<Self> {
        if !(rho > -R::one() && rho < R::one()) {
            return Err(Error::domain(
                "GaussianCopulaParams::new",
                format!("rho must lie in (-1, 1), got {rho}"),
            ));
        }
        Ok(Self { rho })
    }
}

/// Distributional copula family used on tree-2 and higher edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub enum DistCopulaFamily<R> {
    Gaussian(GaussianCopulaParams<R>),
    Independence,
}

impl<R: Real> DistCopulaFamily<R> {
    pub fn gaussian(rho: R) -> Result<Self> {
        Ok(DistCopulaFamily::Gaussian(GaussianCopulaParams::new(rho)?))
    }

    /// Scalar parameter of the family, if it has one.
    pub fn param(&self) -> Option<R> {
        match self {
            DistCopulaFamily::Gaussian(p) => Some(p.rho),
            DistCopulaFamily::Independence => None,
        }
    }

    /// Same family with the scalar parameter replaced.
    pub fn with_param(&self, value: R) -> Result<Self> {
        match self {
            DistCopulaFamily::Gaussian(_) => Self::gaussian(value),
            DistCopulaFamily::Independence => Ok(DistCopulaFamily::Independence),
        }
    }

    /// Copula CDF `C(u, v)` on the closed unit square.
    pub fn cdf(&self, u: R, v: R) -> Result<R> {
        check_unit_closed("copula_cdf", u)?;
        check_unit_closed("copula_cdf", v)?;
        match self {
            DistCopulaFamily::Independence => Ok(u * v),
            DistCopulaFamily::Gaussian(p) => {
                if u == R::zero() || v == R::zero() {
                    return Ok(R::zero());
                }
                if u == R::one() {
                    return Ok(v);
                }
                if v == R::one() {
                    return Ok(u);
                }
                let x = norm_quantile(u)?;
                let y = norm_quantile(v)?;
                bivar_norm_cdf(x, y, p.rho)
            }
        }
    }

    /// Copula density `c(u, v)` for interior arguments.
    pub fn density(&self, u: R, v: R) -> Result<R> {
        Ok(self.log_density(u, v)?.exp())
    }

    /// Log copula density for interior arguments.
    pub fn log_density(&self, u: R, v: R) -> Result<R> {
        check_unit_open("copula_density", u)?;
        check_unit_open("copula_density", v)?;
        match self {
            DistCopulaFamily::Independence => Ok(R::zero()),
            DistCopulaFamily::Gaussian(p) => {
                let rho = p.rho;
                let x = norm_quantile(u)?;
                let y = norm_quantile(v)?;
                let det = R::one() - rho * rho;
                Ok(-det.ln() * R::half()
                    - (rho * rho * (x * x + y * y) - R::two() * rho * x * y) / (R::two() * det))
            }
        }
    }

    /// Conditional distribution `h(u | v) = dC(u, v) / dv`.
    pub fn h_func(&self, u: R, v: R) -> Result<R> {
        check_unit_closed("h_func", u)?;
        check_unit_open("h_func", v)?;
        match self {
            DistCopulaFamily::Independence => Ok(u),
            DistCopulaFamily::Gaussian(p) => {
                if u == R::zero() {
                    return Ok(R::zero());
                }
                if u == R::one() {
                    return Ok(R::one());
                }
                let x = norm_quantile(u)?;
                let y = norm_quantile(v)?;
                let denom = (R::one() - p.rho * p.rho).sqrt();
                Ok(norm_cdf((x - p.rho * y) / denom))
            }
        }
    }

    /// Inverse of [`Self::h_func`] in its first argument.
    pub fn h_inv(&self, w: R, v: R) -> Result<R> {
        check_unit_open("h_inv", w)?;
        check_unit_open("h_inv", v)?;
        match self {
            DistCopulaFamily::Independence => Ok(w),
            DistCopulaFamily::Gaussian(p) => {
                let z = norm_quantile(w)?;
                let y = norm_quantile(v)?;
                let scale = (R::one() - p.rho * p.rho).sqrt();
                Ok(norm_cdf(z * scale + p.rho * y))
            }
        }
    }
}

fn check_unit_closed<R: Real>(op: &'static str, x: R) -> Result<()> {
    if x.is_nan() || x < R::zero() || x > R::one() {
        return Err(Error::domain(
            op,
            format!("argument must lie in [0, 1], got {x}"),
        ));
    }
    Ok(())
}

fn check_unit_open<R: Real>(op: &'static str, x: R) -> Result<()> {
    if !(x > R::zero() && x < R::one()) {
        return Err(Error::domain(
            op,
            format!("argument must lie in (0, 1), got {x}"),
        ));
    }
    Ok(())
}

//! Scalar abstraction for the numeric core.
//!
//! Everything downstream is generic over [`Real`], which is `f32` or `f64` in
//! practice. The complementary error function is the one primitive that
//! `num_traits::Float` does not provide, so it is part of the trait and backed
//! by `libm` per type.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Complementary error function `erfc(x)`.
    fn erfc(self) -> Self;

    /// Converts an `f64` constant, panicking only on NaN (never produced by
    /// the literals used in this crate).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }

    /// `ln(1 + e^t)` without overflow for large `|t|`.
    #[inline]
    fn softplus(self) -> Self {
        if self > Self::zero() {
            self + (-self).exp().ln_1p()
        } else {
            self.exp().ln_1p()
        }
    }
}

/// Clamps a probability to the largest representable interval strictly
/// inside (0, 1). Values keep full relative precision near 0; only hard
/// saturation at the endpoints is pulled back.
#[inline]
pub(crate) fn clamp_open_unit<R: Real>(x: R) -> R {
    let lo = R::min_positive_value();
    let hi = R::one() - R::epsilon() * R::half();
    x.max(lo).min(hi)
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

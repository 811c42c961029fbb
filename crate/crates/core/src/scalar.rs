//! Scalar abstractions.
//!
//! Floating-point numerics run over [`Real`], which covers `f32` and `f64`
//! through nalgebra's `RealField`. The asymptotic moment sum is additionally
//! defined over [`MomentScalar`], which includes exact rationals.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

/// Real floating-point scalar used by the numerical parts of the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::lit(x as f64)
    }

    /// Error function.
    fn erf(self) -> Self;

    fn machine_epsilon() -> Self;
}

impl Real for f64 {
    fn erf(self) -> Self {
        libm::erf(self)
    }

    fn machine_epsilon() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn erf(self) -> Self {
        libm::erff(self)
    }

    fn machine_epsilon() -> Self {
        f32::EPSILON
    }
}

/// Scalar over which the partition-sum moment formula is evaluated.
///
/// Floats give fast evaluation; [`BigRational`] gives exact values such as
/// `M_4 = 44/3` for uniform phases at unit aspect ratio.
pub trait MomentScalar: Clone + Zero + One + PartialOrd + Debug {
    fn from_rational(r: &BigRational) -> Self;

    fn approx_f64(&self) -> f64;

    fn pow_u(&self, e: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl MomentScalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn approx_f64(&self) -> f64 {
        *self
    }

    fn pow_u(&self, e: usize) -> Self {
        self.powi(e as i32)
    }
}

impl MomentScalar for f32 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn approx_f64(&self) -> f64 {
        *self as f64
    }

    fn pow_u(&self, e: usize) -> Self {
        self.powi(e as i32)
    }
}

impl MomentScalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// `r e^{iθ}`.
#[inline]
pub fn polar<T: Real>(r: T, theta: T) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(r * c, r * s)
}

/// `|z|`.
#[inline]
pub fn modulus<T: Real>(z: &Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// Builds the rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

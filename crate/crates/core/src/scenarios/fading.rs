//! Rayleigh-fading delivery: a sensor at distance `r` from the sink at the
//! center gets through with probability `exp(-a r²)`.

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{invalid, Result};
use crate::rng::centered_uniform;
use crate::scalar::Real;
use crate::spectral::distribution::{DensityOfDensity, GxLaw, SamplingDistribution};
use crate::spectral::eta::mse_asymptotic;

/// `f_x(z) = b exp(-a (z_1² + z_2²))` on the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingScenario<T> {
    /// SNR threshold over unit-distance SNR, linear.
    pub a: T,
    pub b: T,
}

/// `(π/a) erf²(√(a/4))`, the mass of `exp(-a r²)` over the square.
fn gaussian_mass<T: Real>(a: T) -> T {
    let e = (a / T::lit(4.0)).sqrt().erf();
    T::pi() / a * e * e
}

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

impl<T: Real> FadingScenario<T> {
    pub fn new(a: T) -> Result<Self> {
        if !(a > T::zero() && a.is_finite()) {
            return Err(invalid(format!("loss parameter must be positive, got {a}")));
        }
        Ok(Self { a, b: T::one() / gaussian_mass(a) })
    }

    pub fn from_db(a_db: T) -> Result<Self> {
        Self::new(db_to_linear(a_db))
    }

    pub fn gx_law(&self) -> FadingGx<T> {
        FadingGx { a: self.a, b: self.b }
    }
}

pub fn fading_distribution<T: Real>(a_db: T) -> Result<FadingScenario<T>> {
    FadingScenario::from_db(a_db)
}

impl<T: Real> SamplingDistribution<T> for FadingScenario<T> {
    fn dim(&self) -> usize {
        2
    }

    fn density(&self, z: &[T]) -> T {
        self.b * (-self.a * (z[0] * z[0] + z[1] * z[1])).exp()
    }

    fn support_measure(&self) -> T {
        T::one()
    }

    /// Rejection from uniform placement; the acceptance test is the delivery event.
    fn sample_point(&self, rng: &mut dyn RngCore, out: &mut [T]) {
        loop {
            let x: T = centered_uniform(rng);
            let y: T = centered_uniform(rng);
            let keep = (-self.a * (x * x + y * y)).exp();
            if T::lit(rng.random::<f64>()) < keep {
                out[0] = x;
                out[1] = y;
                return;
            }
        }
    }

    fn gx(&self) -> DensityOfDensity<T> {
        DensityOfDensity::ClosedForm(Arc::new(self.gx_law()))
    }

    fn id(&self) -> String {
        format!("fading(a={})", self.a)
    }

    /// `I_k = b^k (π/(ka)) erf²(√(ka/4))`.
    fn power_integrals(&self, max_k: usize) -> Option<Vec<T>> {
        Some(
            (1..=max_k)
                .map(|k| {
                    let ka = T::from_usize_lossy(k) * self.a;
                    self.b.powi(k as i32) * gaussian_mass(ka)
                })
                .collect(),
        )
    }
}

/// Law of `f_x(z)` for `z` uniform on the square. Support `[b e^{-a/2}, b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingGx<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> FadingGx<T> {
    /// Radius `r_y` of the level set `f_x = y`.
    pub fn level_radius(&self, y: T) -> T {
        ((self.b / y).ln() / self.a).max(T::zero()).sqrt()
    }

    fn knee(&self) -> T {
        self.b * (-self.a / T::lit(4.0)).exp()
    }

    fn floor(&self) -> T {
        self.b * (-self.a / T::lit(2.0)).exp()
    }
}

impl<T: Real> GxLaw<T> for FadingGx<T> {
    fn pdf(&self, y: T) -> T {
        if y < self.floor() || y >= self.b {
            return T::zero();
        }
        let ay = self.a * y;
        if y >= self.knee() {
            T::pi() / ay
        } else {
            let r = self.level_radius(y);
            (T::pi() - T::lit(4.0) * (T::one() / (T::lit(2.0) * r)).min(T::one()).acos()) / ay
        }
    }

    /// One minus the area of the unit square inside the circle of radius `r_y`.
    fn cdf(&self, y: T) -> T {
        if y < self.floor() {
            return T::zero();
        }
        if y >= self.b {
            return T::one();
        }
        let r = self.level_radius(y);
        let r2 = r * r;
        if y >= self.knee() {
            T::one() - T::pi() * r2
        } else {
            let c = (T::one() / (T::lit(2.0) * r)).min(T::one()).acos();
            let inside = (T::lit(4.0) * r2 - T::one()).max(T::zero()).sqrt() + r2 * (T::pi() - T::lit(4.0) * c);
            (T::one() - inside).max(T::zero())
        }
    }

    fn support(&self) -> (T, T) {
        (self.floor(), self.b)
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![self.knee()]
    }
}

/// Asymptotic MSE for fading at aspect ratio `β` and SNR `γ`.
pub fn fading_mse<T: Real>(
    scenario: &FadingScenario<T>,
    beta: T,
    snr: T,
    eta_u: &dyn Fn(T, T) -> Result<T>,
) -> Result<T> {
    mse_asymptotic(&scenario.gx(), T::one(), beta, snr, eta_u)
}

use rand::RngCore;

use crate::error::{invalid, Result};
use crate::rng::centered_uniform;
use crate::scalar::Real;
use crate::spectral::distribution::{DensityOfDensity, SamplingDistribution};

/// Uniform phases restricted to the centered cube of measure `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoleScenario<T> {
    pub c: T,
    pub d: usize,
}

impl<T: Real> HoleScenario<T> {
    pub fn new(c: T, d: usize) -> Result<Self> {
        if !(c > T::zero() && c <= T::one()) {
            return Err(invalid(format!("covered fraction must lie in (0, 1], got {c}")));
        }
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Self { c, d })
    }

    /// Side of the covered cube, `c^{1/d}`.
    pub fn side(&self) -> T {
        self.c.powf(T::one() / T::from_usize_lossy(self.d))
    }
}

pub fn hole_distribution<T: Real>(c: T, d: usize) -> Result<HoleScenario<T>> {
    HoleScenario::new(c, d)
}

impl<T: Real> SamplingDistribution<T> for HoleScenario<T> {
    fn dim(&self) -> usize {
        self.d
    }

    fn density(&self, z: &[T]) -> T {
        let h = self.side() * T::lit(0.5);
        if z.iter().all(|&x| x >= -h && x <= h) {
            T::one() / self.c
        } else {
            T::zero()
        }
    }

    fn support_measure(&self) -> T {
        self.c
    }

    fn sample_point(&self, rng: &mut dyn RngCore, out: &mut [T]) {
        let s = self.side();
        for v in out.iter_mut() {
            *v = centered_uniform::<T, _>(rng) * s;
        }
    }

    fn gx(&self) -> DensityOfDensity<T> {
        DensityOfDensity::DiscreteAtoms(vec![(T::one() / self.c, T::one())])
    }

    fn id(&self) -> String {
        format!("hole(c={},d={})", self.c, self.d)
    }

    fn power_integrals(&self, max_k: usize) -> Option<Vec<T>> {
        Some((1..=max_k as i32).map(|k| self.c.powi(1 - k)).collect())
    }

    fn breakpoints(&self, _axis: usize) -> Vec<T> {
        let h = self.side() * T::lit(0.5);
        vec![-h, h]
    }
}

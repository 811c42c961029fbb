use crate::scalar::Real;
use crate::spectral::distribution::{DensityOfDensity, SamplingDistribution};

/// The `β → 0` limit: spectrum `(1 - |A|) δ(z) + |A| g_x(z)` and MSE floor `1 - |A|`.
#[derive(Clone, Debug)]
pub struct DenseLimit<T: Real> {
    pub atom_zero_mass: T,
    /// Law of the positive part.
    pub gx: DensityOfDensity<T>,
    pub mse_floor: T,
}

pub fn dense_limit<T: Real>(dist: &dyn SamplingDistribution<T>) -> DenseLimit<T> {
    let floor = T::one() - dist.support_measure();
    DenseLimit { atom_zero_mass: floor, gx: dist.gx(), mse_floor: floor }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::holes::hole_distribution;
    use crate::spectral::distribution::UniformPhases;

    #[test]
    fn uniform_and_hole_limits() {
        let u = dense_limit::<f64>(&UniformPhases::new(1).unwrap());
        assert_eq!(u.mse_floor, 0.0);
        assert_eq!(u.gx.cdf(1.0), 1.0);
        let h = dense_limit::<f64>(&hole_distribution(0.5, 1).unwrap());
        assert_eq!(h.mse_floor, 0.5);
        assert_eq!(h.gx.cdf(1.9), 0.0);
        assert_eq!(h.gx.cdf(2.0), 1.0);
    }
}

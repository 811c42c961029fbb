//! Asymptotic moments of `V V^H` for a generic phase density.

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::partitions::{coefficient_power_sums, P_MAX};
use crate::quadrature::{integrate, integrate_2d};
use crate::rng::{centered_uniform, rng_for, stream};
use crate::scalar::{MomentScalar, Real};
use crate::spectral::distribution::SamplingDistribution;

/// Antithetic pairs drawn per Monte Carlo estimate of `I_k`.
pub const MC_PAIRS: usize = 1 << 17;
const MC_SEED: u64 = 0x1_4b;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegralMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// `I_k = ∫_H f_x(z)^k dz` for `k = 1..=P`.
#[derive(Clone, Debug)]
pub struct DensityPowerIntegrals<T> {
    pub values: Vec<T>,
    pub method: IntegralMethod,
    /// Standard errors, for Monte Carlo estimates.
    pub std_errors: Option<Vec<T>>,
}

pub fn density_power_integrals<T: Real>(
    dist: &dyn SamplingDistribution<T>,
    max_p: usize,
) -> Result<DensityPowerIntegrals<T>> {
    if max_p == 0 {
        return Err(invalid("need at least one density power"));
    }
    if let Some(values) = dist.power_integrals(max_p) {
        return Ok(DensityPowerIntegrals { values, method: IntegralMethod::ClosedForm, std_errors: None });
    }
    let d = dist.dim();
    let half = T::lit(0.5);
    let rel = T::lit(1e-8);
    let abs = T::lit(1e-12);
    match d {
        1 => {
            let breaks = dist.breakpoints(0);
            let values = (1..=max_p as i32)
                .map(|k| {
                    let q = integrate(|z| dist.density(&[z]).powi(k), -half, half, &breaks, rel, abs)?;
                    check_integral(k, q.value)
                })
                .collect::<Result<_>>()?;
            Ok(DensityPowerIntegrals { values, method: IntegralMethod::Quadrature, std_errors: None })
        }
        2 => {
            let (bx, by) = (dist.breakpoints(0), dist.breakpoints(1));
            let values = (1..=max_p as i32)
                .map(|k| {
                    let q = integrate_2d(
                        |x, y| dist.density(&[x, y]).powi(k),
                        (-half, half),
                        (-half, half),
                        &bx,
                        &by,
                        rel,
                        abs,
                    )?;
                    check_integral(k, q.value)
                })
                .collect::<Result<_>>()?;
            Ok(DensityPowerIntegrals { values, method: IntegralMethod::Quadrature, std_errors: None })
        }
        _ => monte_carlo_integrals(dist, max_p),
    }
}

fn check_integral<T: Real>(k: i32, v: T) -> Result<T> {
    if v.is_finite() && v > T::zero() {
        Ok(v)
    } else {
        Err(Error::NonIntegrable(format!("∫ f^{k} evaluated to {v}")))
    }
}

fn monte_carlo_integrals<T: Real>(dist: &dyn SamplingDistribution<T>, max_p: usize) -> Result<DensityPowerIntegrals<T>> {
    let d = dist.dim();
    let mut rng = rng_for(MC_SEED, stream::POINTS, d as u64);
    let mut z = vec![T::zero(); d];
    let mut neg = vec![T::zero(); d];
    let mut sum = vec![0.0f64; max_p];
    let mut sum2 = vec![0.0f64; max_p];
    for _ in 0..MC_PAIRS {
        for (a, b) in z.iter_mut().zip(neg.iter_mut()) {
            *a = centered_uniform(&mut rng);
            *b = -*a;
        }
        let (f1, f2) = (dist.density(&z).to_f64_lossy(), dist.density(&neg).to_f64_lossy());
        for k in 0..max_p {
            let e = k as i32 + 1;
            let v = 0.5 * (f1.powi(e) + f2.powi(e));
            sum[k] += v;
            sum2[k] += v * v;
        }
    }
    let n = MC_PAIRS as f64;
    let mut values = Vec::with_capacity(max_p);
    let mut errors = Vec::with_capacity(max_p);
    for k in 0..max_p {
        let mean = sum[k] / n;
        let var = (sum2[k] / n - mean * mean).max(0.0) * n / (n - 1.0);
        if !mean.is_finite() {
            return Err(Error::NonIntegrable(format!("Monte Carlo estimate of I_{} is {mean}", k + 1)));
        }
        values.push(T::lit(mean));
        errors.push(T::lit((var / n).sqrt()));
    }
    Ok(DensityPowerIntegrals { values, method: IntegralMethod::MonteCarlo, std_errors: Some(errors) })
}

/// `M_p = Σ_k β^{p-k} I_k Σ_{ω ∈ Ω_{p,k}} v(ω)^d`.
pub fn asymptotic_moment<S: MomentScalar>(p: usize, d: usize, beta: &S, integrals: &[S]) -> Result<S> {
    if p == 0 || p > P_MAX {
        return Err(invalid(format!("moment order must lie in 1..={P_MAX}, got {p}")));
    }
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if integrals.len() < p {
        return Err(invalid(format!("moment {p} needs I_1..I_{p}, got {} values", integrals.len())));
    }
    if !(*beta > S::zero()) {
        return Err(invalid("aspect ratio must be positive"));
    }
    let sums: Vec<BigRational> = coefficient_power_sums(p, d)?;
    let mut acc = S::zero();
    for k in 1..=p {
        let term = beta.pow_u(p - k) * integrals[k - 1].clone() * S::from_rational(&sums[k - 1]);
        acc = acc + term;
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct MomentTable<T> {
    pub d: usize,
    pub beta: T,
    /// `M_1..M_P`.
    pub moments: Vec<T>,
    pub distribution_id: String,
    pub method: IntegralMethod,
}

impl<T: Real> MomentTable<T> {
    /// Smallest eigenvalue of the Hankel matrix `[M_{i+j}]`, `M_0 = 1`,
    /// relative to its largest.
    pub fn hankel_min_eigenvalue(&self) -> T {
        let h = self.moments.len() / 2;
        let at = |i: usize| if i == 0 { T::one() } else { self.moments[i - 1] };
        let mat = DMatrix::from_fn(h + 1, h + 1, |i, j| at(i + j));
        let eig = mat.symmetric_eigenvalues();
        let max = eig.iter().fold(T::zero(), |s, v| s.max(v.abs()));
        eig.iter().fold(T::max_value().expect("bounded"), |s, v| s.min(*v)) / max
    }

    pub fn is_valid_moment_sequence(&self) -> bool {
        self.moments.iter().all(|m| *m >= T::zero()) && self.hankel_min_eigenvalue() >= -T::lit(1e3) * T::machine_epsilon()
    }
}

/// `M_1..M_P` for `dist` at aspect ratio `β`.
pub fn moment_table<T: Real + MomentScalar>(
    dist: &dyn SamplingDistribution<T>,
    d: usize,
    beta: T,
    max_p: usize,
) -> Result<MomentTable<T>> {
    if dist.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: dist.dim() });
    }
    let integrals = density_power_integrals(dist, max_p)?;
    let moments = (1..=max_p)
        .map(|p| asymptotic_moment(p, d, &beta, &integrals.values))
        .collect::<Result<_>>()?;
    Ok(MomentTable { d, beta, moments, distribution_id: dist.id(), method: integrals.method })
}

//! Phase distributions on the hypercube `H = [-1/2, 1/2)^d` and their
//! density-of-density laws.

use std::fmt::Debug;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{invalid, Result};
use crate::rng::centered_uniform;
use crate::scalar::Real;

/// A continuous law for `g_x`, the distribution of `f_x(z)` for `z` uniform on
/// the support `A`.
pub trait GxLaw<T: Real>: Send + Sync + Debug {
    fn pdf(&self, y: T) -> T;
    fn cdf(&self, y: T) -> T;
    /// Closed interval outside which the density vanishes.
    fn support(&self) -> (T, T);
    /// Interior points where the density is not smooth.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

/// Piecewise-constant density on `edges`; the total mass may be below one.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram<T> {
    pub edges: Vec<T>,
    pub densities: Vec<T>,
}

impl<T: Real> Histogram<T> {
    /// Bins `sorted` (ascending) into `bins` equal cells carrying `mass` in total.
    pub fn from_sorted(sorted: &[T], bins: usize, mass: T) -> Result<Self> {
        if sorted.is_empty() || bins == 0 {
            return Err(invalid("histogram needs values and at least one bin"));
        }
        let lo = sorted[0];
        let hi = sorted[sorted.len() - 1];
        let (lo, hi) = if hi - lo <= hi.abs().max(T::one()) * T::lit(1e-12) {
            let pad = hi.abs().max(T::one()) * T::lit(1e-6);
            (lo - pad, hi + pad)
        } else {
            (lo, hi)
        };
        let width = (hi - lo) / T::from_usize_lossy(bins);
        let mut counts = vec![0usize; bins];
        for v in sorted {
            let i = (((*v - lo) / width).to_f64_lossy().floor().max(0.0) as usize).min(bins - 1);
            counts[i] += 1;
        }
        let n = T::from_usize_lossy(sorted.len());
        let mut edges: Vec<T> = (0..=bins).map(|i| lo + width * T::from_usize_lossy(i)).collect();
        edges[bins] = hi;
        let densities = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, w)| mass * T::from_usize_lossy(c) / n / (w[1] - w[0]))
            .collect();
        Ok(Self { edges, densities })
    }

    /// Density at `y`; zero outside the edges.
    pub fn density(&self, y: T) -> T {
        let last = self.edges.len() - 1;
        if y < self.edges[0] || y > self.edges[last] {
            return T::zero();
        }
        let i = self.edges.partition_point(|e| *e <= y).clamp(1, last) - 1;
        self.densities[i]
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn total_mass(&self) -> T {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .fold(T::zero(), |s, (h, w)| s + *h * (w[1] - w[0]))
    }

    /// `∫ |h - dG|` for a law with CDF `cdf`, each normalized to unit mass.
    ///
    /// Per bin the law contributes its exact mass, so the value is the L1
    /// distance between the histogram and the bin-averaged law, plus the law's
    /// mass outside the histogram range.
    pub fn l1_to_law(&self, cdf: impl Fn(T) -> T) -> T {
        let total = self.total_mass();
        let lo = self.edges[0];
        let hi = self.edges[self.edges.len() - 1];
        let mut acc = cdf(lo) + (T::one() - cdf(hi));
        for (h, w) in self.densities.iter().zip(self.edges.windows(2)) {
            let mine = *h * (w[1] - w[0]) / total;
            acc += (mine - (cdf(w[1]) - cdf(w[0]))).abs();
        }
        acc
    }

    pub fn cdf(&self, y: T) -> T {
        let mut acc = T::zero();
        for (i, w) in self.edges.windows(2).enumerate() {
            if y >= w[1] {
                acc += self.densities[i] * (w[1] - w[0]);
            } else if y > w[0] {
                acc += self.densities[i] * (y - w[0]);
            }
        }
        acc
    }
}

/// The law `g_x` in one of its three representations.
#[derive(Clone, Debug)]
pub enum DensityOfDensity<T: Real> {
    ClosedForm(Arc<dyn GxLaw<T>>),
    /// `(y_i, w_i)` with `Σ w_i = 1`: `g_x = Σ w_i δ(y - y_i)`.
    DiscreteAtoms(Vec<(T, T)>),
    Empirical(Histogram<T>),
}

impl<T: Real> DensityOfDensity<T> {
    /// `G_x(y)`, right-continuous.
    pub fn cdf(&self, y: T) -> T {
        match self {
            Self::ClosedForm(law) => law.cdf(y),
            Self::DiscreteAtoms(atoms) => atoms.iter().filter(|(v, _)| *v <= y).fold(T::zero(), |s, (_, w)| s + *w),
            Self::Empirical(h) => h.cdf(y),
        }
    }

    /// Smallest interval carrying all the mass.
    pub fn support(&self) -> (T, T) {
        match self {
            Self::ClosedForm(law) => law.support(),
            Self::DiscreteAtoms(atoms) => atoms.iter().fold((T::max_value().unwrap(), T::zero()), |(lo, hi), (y, _)| {
                (lo.min(*y), hi.max(*y))
            }),
            Self::Empirical(h) => (h.edges[0], h.edges[h.edges.len() - 1]),
        }
    }

    /// `∫ y^k g_x(y) dy`.
    pub fn moment(&self, k: i32) -> Result<T> {
        match self {
            Self::DiscreteAtoms(atoms) => Ok(atoms.iter().fold(T::zero(), |s, (y, w)| s + *w * y.powi(k))),
            Self::ClosedForm(law) => {
                let (lo, hi) = law.support();
                let q = crate::quadrature::integrate(
                    |y| law.pdf(y) * y.powi(k),
                    lo,
                    hi,
                    &law.breakpoints(),
                    T::lit(1e-10),
                    T::lit(1e-13),
                )?;
                Ok(q.value)
            }
            Self::Empirical(h) => {
                let mut acc = T::zero();
                for (i, w) in h.edges.windows(2).enumerate() {
                    let kk = k + 1;
                    acc += h.densities[i] * (w[1].powi(kk) - w[0].powi(kk)) / T::lit(kk as f64);
                }
                Ok(acc)
            }
        }
    }

    /// Mass in `(lo, hi]`.
    pub fn mass_between(&self, lo: T, hi: T) -> T {
        self.cdf(hi) - self.cdf(lo)
    }
}

/// A law for sensor positions `x_q` on `H`.
pub trait SamplingDistribution<T: Real>: Send + Sync + Debug {
    fn dim(&self) -> usize;

    /// `f_x(z)` for `z ∈ H` (length `dim()`).
    fn density(&self, z: &[T]) -> T;

    /// `|A|`, the measure of `{z : f_x(z) > 0}`.
    fn support_measure(&self) -> T;

    /// Draws one point into `out` (length `dim()`).
    fn sample_point(&self, rng: &mut dyn RngCore, out: &mut [T]);

    fn gx(&self) -> DensityOfDensity<T>;

    fn id(&self) -> String;

    /// Closed-form `I_1..I_max_k`, when known.
    fn power_integrals(&self, _max_k: usize) -> Option<Vec<T>> {
        None
    }

    /// Coordinates (per axis) where the density jumps; used by quadrature.
    fn breakpoints(&self, _axis: usize) -> Vec<T> {
        Vec::new()
    }

    /// `m` i.i.d. points, flattened with stride `dim()`.
    fn sample(&self, rng: &mut dyn RngCore, m: usize) -> Vec<T> {
        let d = self.dim();
        let mut pts = vec![T::zero(); m * d];
        for q in 0..m {
            self.sample_point(rng, &mut pts[q * d..(q + 1) * d]);
        }
        pts
    }
}

/// Uniform phases on `H`.
#[derive(Clone, Copy, Debug)]
pub struct UniformPhases {
    pub d: usize,
}

impl UniformPhases {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Self { d })
    }
}

impl<T: Real> SamplingDistribution<T> for UniformPhases {
    fn dim(&self) -> usize {
        self.d
    }

    fn density(&self, _z: &[T]) -> T {
        T::one()
    }

    fn support_measure(&self) -> T {
        T::one()
    }

    fn sample_point(&self, rng: &mut dyn RngCore, out: &mut [T]) {
        for v in out.iter_mut() {
            *v = centered_uniform(rng);
        }
    }

    fn gx(&self) -> DensityOfDensity<T> {
        DensityOfDensity::DiscreteAtoms(vec![(T::one(), T::one())])
    }

    fn id(&self) -> String {
        format!("uniform(d={})", self.d)
    }

    fn power_integrals(&self, max_k: usize) -> Option<Vec<T>> {
        Some(vec![T::one(); max_k])
    }
}

/// Measures `g_x` as a histogram of `f_x` over a uniform midpoint grid with
/// `per_axis^d` cells, restricted to cells where `f_x > 0`.
pub fn empirical_gx<T: Real>(dist: &dyn SamplingDistribution<T>, per_axis: usize, bins: usize) -> Result<Histogram<T>> {
    let d = dist.dim();
    if per_axis == 0 || bins == 0 {
        return Err(invalid("grid and bin counts must be positive"));
    }
    let total = per_axis
        .checked_pow(d as u32)
        .ok_or_else(|| invalid("grid too large"))?;
    let mut values = Vec::with_capacity(total);
    let mut z = vec![T::zero(); d];
    let h = T::one() / T::from_usize_lossy(per_axis);
    for cell in 0..total {
        let mut c = cell;
        for zj in z.iter_mut() {
            let i = c % per_axis;
            c /= per_axis;
            *zj = (T::from_usize_lossy(i) + T::lit(0.5)) * h - T::lit(0.5);
        }
        let f = dist.density(&z);
        if f > T::zero() {
            values.push(f);
        }
    }
    if values.is_empty() {
        return Err(invalid("density vanishes on the whole grid"));
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite density"));
    Histogram::from_sorted(&values, bins, T::one())
}

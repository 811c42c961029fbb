use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{derive_seed, stream};
use crate::scalar::Real;
use crate::spectral::distribution::{Histogram, SamplingDistribution};
use crate::spectral::vandermonde::{build_vandermonde, gram_eigenvalues};

/// Relative threshold below which an eigenvalue counts toward the atom at zero.
pub const ATOM_REL_TOL: f64 = 1e-9;

/// Cap on Freedman–Diaconis bin counts.
pub const MAX_BINS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binning {
    /// Freedman–Diaconis width on the pooled positive eigenvalues.
    Auto,
    Count(usize),
}

/// Pooled eigenvalues of `V V^H` over independent trials.
#[derive(Clone, Debug)]
pub struct SpectrumSummary<T: Real> {
    /// Eigenvalues above the atom threshold, ascending.
    pub positive: Vec<T>,
    /// Weight of the positive part, `1 - atom_zero_mass`.
    pub positive_mass: T,
    pub atom_zero_mass: T,
    /// Eigenvalue count per trial times trials, before any transform.
    pub samples: usize,
    pub trials: usize,
    /// Positive part, integrating to `positive_mass`.
    pub histogram: Histogram<T>,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// Aspect ratio the spectrum describes.
    pub beta: T,
    pub distribution_id: String,
    pub master_seed: u64,
}

/// Atom threshold for one trial with largest eigenvalue `lmax`.
pub fn atom_tol<T: Real>(lmax: T) -> T {
    T::lit(ATOM_REL_TOL).max(T::lit(100.0) * T::machine_epsilon()) * lmax
}

/// `n^d / β` rounded, at least one column.
pub fn columns_for(n: usize, d: usize, beta: f64) -> Result<usize> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("aspect ratio must be positive, got {beta}")));
    }
    let rows = crate::spectral::vandermonde::row_count(n, d)?;
    Ok(((rows as f64 / beta).round() as usize).max(1))
}

/// Eigenvalues of `trials` independent Gram matrices, in trial order.
pub fn trial_eigenvalues<T: Real>(
    dist: &dyn SamplingDistribution<T>,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let d = dist.dim();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let v = build_vandermonde(dist, n, d, m, derive_seed(seed, stream::TRIAL, t as u64))?;
            gram_eigenvalues(&v)
        })
        .collect()
}

/// Average empirical spectral distribution of `V V^H`.
pub fn aesd<T: Real>(
    dist: &dyn SamplingDistribution<T>,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
    binning: Binning,
) -> Result<SpectrumSummary<T>> {
    let per_trial = trial_eigenvalues(dist, n, m, trials, seed)?;
    let d = dist.dim();
    let rows = n.pow(d as u32);
    let mut positive = Vec::with_capacity(rows * trials);
    let mut atoms = 0usize;
    for eigs in &per_trial {
        let lmax = eigs.last().copied().unwrap_or_else(T::zero);
        let tol = atom_tol(lmax);
        for &l in eigs {
            if l < tol {
                atoms += 1;
            } else {
                positive.push(l);
            }
        }
    }
    positive.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let samples = rows * trials;
    let atom = T::from_usize_lossy(atoms) / T::from_usize_lossy(samples);
    let positive_mass = T::one() - atom;
    let histogram = bin_positive(&positive, positive_mass, binning)?;
    Ok(SpectrumSummary {
        positive,
        positive_mass,
        atom_zero_mass: atom,
        samples,
        trials,
        histogram,
        n,
        d,
        m,
        beta: T::from_usize_lossy(rows) / T::from_usize_lossy(m),
        distribution_id: dist.id(),
        master_seed: seed,
    })
}

fn bin_positive<T: Real>(positive: &[T], mass: T, binning: Binning) -> Result<Histogram<T>> {
    if positive.is_empty() {
        return Ok(Histogram { edges: vec![T::zero(), T::zero()], densities: vec![T::zero()] });
    }
    let bins = match binning {
        Binning::Count(b) => b,
        Binning::Auto => freedman_diaconis(positive),
    };
    Histogram::from_sorted(positive, bins, mass)
}

/// Bin count from the Freedman–Diaconis rule on ascending `sorted`.
pub fn freedman_diaconis<T: Real>(sorted: &[T]) -> usize {
    let n = sorted.len();
    if n < 4 {
        return 1;
    }
    let iqr = sorted[(3 * n) / 4] - sorted[n / 4];
    let range = sorted[n - 1] - sorted[0];
    let h = T::lit(2.0) * iqr / T::from_usize_lossy(n).cbrt();
    if h <= T::zero() || range <= T::zero() {
        return 1;
    }
    ((range / h).to_f64_lossy().ceil() as usize).clamp(1, MAX_BINS)
}

impl<T: Real> SpectrumSummary<T> {
    /// `∫ λ^p dF`, the atom contributing nothing for `p ≥ 1`.
    pub fn moment(&self, p: i32) -> T {
        if p == 0 {
            return T::one();
        }
        if self.positive.is_empty() {
            return T::zero();
        }
        let mean = self.positive.iter().fold(T::zero(), |s, l| s + l.powi(p)) / T::from_usize_lossy(self.positive.len());
        self.positive_mass * mean
    }

    /// Rebins the positive part.
    pub fn rebin(&mut self, binning: Binning) -> Result<()> {
        self.histogram = bin_positive(&self.positive, self.positive_mass, binning)?;
        Ok(())
    }
}

/// `E[(γλ + 1)^{-1}]` under the summary's distribution.
pub fn empirical_eta<T: Real>(summary: &SpectrumSummary<T>, gamma: T) -> Result<T> {
    if !(gamma >= T::zero()) {
        return Err(invalid(format!("gamma must be nonnegative, got {gamma}")));
    }
    let pos = if summary.positive.is_empty() { T::zero() } else { eta_from_eigenvalues(&summary.positive, gamma) };
    Ok(summary.atom_zero_mass + summary.positive_mass * pos)
}

/// Mean of `1/(γλ + 1)` over `eigs`.
pub fn eta_from_eigenvalues<T: Real>(eigs: &[T], gamma: T) -> T {
    let s = eigs.iter().fold(T::zero(), |s, &l| s + T::one() / (gamma * l + T::one()));
    s / T::from_usize_lossy(eigs.len())
}

/// Maps the spectrum of uniform phases at aspect ratio `cβ` to the spectrum
/// for uniform phases on a sub-region of measure `c` at aspect ratio `β`:
/// `f(z) = (1 - c) δ(z) + c² f_base(cz)`.
pub fn transform_scaled_lsd<T: Real>(
    base: &SpectrumSummary<T>,
    c: T,
    beta: T,
    binning: Binning,
) -> Result<SpectrumSummary<T>> {
    if !(c > T::zero() && c <= T::one()) {
        return Err(invalid(format!("covered fraction must lie in (0, 1], got {c}")));
    }
    let expect = c * beta;
    // realized aspect ratios are rounded through m
    if (base.beta - expect).abs() > expect * T::lit(0.05) {
        return Err(invalid(format!("base spectrum has aspect ratio {}, expected c·β = {expect}", base.beta)));
    }
    let positive: Vec<T> = base.positive.iter().map(|&l| l / c).collect();
    let positive_mass = c * base.positive_mass;
    let atom = T::one() - positive_mass;
    let histogram = bin_positive(&positive, positive_mass, binning)?;
    Ok(SpectrumSummary {
        positive,
        positive_mass,
        atom_zero_mass: atom,
        histogram,
        beta,
        distribution_id: format!("scaled({},c={c})", base.distribution_id),
        ..base.clone()
    })
}

/// Two-sample Kolmogorov–Smirnov statistic between ascending samples.
pub fn ks_distance<T: Real>(a: &[T], b: &[T]) -> T {
    if a.is_empty() || b.is_empty() {
        return T::one();
    }
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut best = 0.0f64;
    while i < na && j < nb {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    T::lit(best)
}

/// `(1/N) tr(G^p)` for `p = 1..=max_p`, from products of powers up to `⌈max_p/2⌉`.
pub fn normalized_power_traces<T: Real>(gram: &DMatrix<Complex<T>>, max_p: usize) -> Vec<T> {
    let rows = T::from_usize_lossy(gram.nrows());
    let half = max_p.div_ceil(2).max(1);
    let mut powers = vec![gram.clone()];
    for _ in 1..half {
        let next = powers.last().expect("non-empty") * gram;
        powers.push(next);
    }
    (1..=max_p)
        .map(|p| {
            let b = p / 2;
            let a = p - b;
            let tr = if b == 0 {
                powers[0].diagonal().iter().fold(T::zero(), |s, z| s + z.re)
            } else {
                // G^b is Hermitian, so tr(G^a G^b) = Σ_ij (G^a)_ij conj((G^b)_ij)
                powers[a - 1]
                    .iter()
                    .zip(powers[b - 1].iter())
                    .fold(T::zero(), |s, (x, y)| s + x.re * y.re + x.im * y.im)
            };
            tr / rows
        })
        .collect()
}

/// Sample mean and standard error of `(1/N) tr((V V^H)^p)` for `p = 1..=max_p`.
pub fn empirical_moments<T: Real>(
    dist: &dyn SamplingDistribution<T>,
    n: usize,
    m: usize,
    max_p: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<(T, T)>> {
    if trials == 0 || max_p == 0 {
        return Err(invalid("trials and moment order must be at least 1"));
    }
    let d = dist.dim();
    let per_trial: Vec<Vec<T>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let v = build_vandermonde(dist, n, d, m, derive_seed(seed, stream::TRIAL, t as u64))?;
            Ok(normalized_power_traces(&v.gram(), max_p))
        })
        .collect::<Result<_>>()?;
    Ok((0..max_p)
        .map(|k| {
            let vals: Vec<T> = per_trial.iter().map(|r| r[k]).collect();
            crate::reconstruct::mean_and_stderr(&vals)
        })
        .collect())
}

//! Bandlimited fields, noisy sensor observations, and LMMSE reconstruction.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng::{complex_normal, derive_seed, rng_for, stream};
use crate::scalar::{polar, Real};
use crate::spectral::distribution::SamplingDistribution;
use crate::spectral::vandermonde::{build_vandermonde, multi_index, row_count, DFoldVandermonde};

/// Condition estimate above which an LMMSE solve is flagged.
pub const COND_TOL: f64 = 1e12;

/// Fourier coefficients `a` of a field with `E[a a^H] = σ_a² I`.
#[derive(Clone, Debug)]
pub struct FieldSpectrum<T: Real> {
    pub a: DVector<Complex<T>>,
    pub sigma_a2: T,
    pub n: usize,
    pub d: usize,
}

#[derive(Clone, Debug)]
pub struct Observation<T: Real> {
    /// Received samples.
    pub p: DVector<Complex<T>>,
    /// Noiseless samples.
    pub s: DVector<Complex<T>>,
    pub sigma_a2: T,
    pub sigma_n2: T,
    /// `σ_a² / σ_n²`.
    pub gamma: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveForm {
    /// `m × m` system, used when `m < n^d`.
    Dual,
    /// `n^d × n^d` system.
    Primal,
}

#[derive(Clone, Debug)]
pub struct LmmseResult<T: Real> {
    pub a_hat: DVector<Complex<T>>,
    /// `‖a - â‖² / (n^d σ_a²)`.
    pub normalized_error: T,
    /// `(1/n^d) tr((γ/β V V^H + I)^{-1})` for the realized `V`.
    pub trace_mse: T,
    pub form: SolveForm,
    pub condition_estimate: T,
    /// Set when `condition_estimate` exceeds [`COND_TOL`].
    pub ill_conditioned: bool,
}

pub fn generate_spectrum<T: Real>(n: usize, d: usize, sigma_a2: T, seed: u64) -> Result<FieldSpectrum<T>> {
    if !(sigma_a2 > T::zero() && sigma_a2.is_finite()) {
        return Err(invalid(format!("spectrum power must be positive, got {sigma_a2}")));
    }
    let rows = row_count(n, d)?;
    let mut rng = rng_for(seed, stream::SPECTRUM, 0);
    let a = DVector::from_fn(rows, |_, _| complex_normal(&mut rng, sigma_a2));
    Ok(FieldSpectrum { a, sigma_a2, n, d })
}

/// `n^{-d/2} Σ_ℓ a_{ν(ℓ)} exp(2πi ℓ·x)`.
pub fn synthesize_field<T: Real>(spec: &FieldSpectrum<T>, x: &[T]) -> Result<Complex<T>> {
    if x.len() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, got: x.len() });
    }
    let two_pi = T::two_pi();
    let mut acc = Complex::new(T::zero(), T::zero());
    for (nu, a) in spec.a.iter().enumerate() {
        let ell = multi_index(spec.n, spec.d, nu);
        let phase = ell.iter().zip(x).fold(T::zero(), |s, (&l, &xj)| s + T::from_usize_lossy(l) * xj);
        acc += *a * polar(T::one(), two_pi * phase);
    }
    let norm = T::from_usize_lossy(spec.a.len()).sqrt();
    Ok(acc.unscale(norm))
}

fn check_shape<T: Real>(v: &DFoldVandermonde<T>, spec: &FieldSpectrum<T>) -> Result<()> {
    if v.n != spec.n || v.d != spec.d {
        return Err(Error::DimensionMismatch { expected: v.rows(), got: spec.a.len() });
    }
    Ok(())
}

/// `p = β^{-1/2} V^H a + noise`.
pub fn observe<T: Real>(
    v: &DFoldVandermonde<T>,
    spec: &FieldSpectrum<T>,
    sigma_n2: T,
    seed: u64,
) -> Result<Observation<T>> {
    check_shape(v, spec)?;
    if !(sigma_n2 >= T::zero()) {
        return Err(invalid(format!("noise power must be nonnegative, got {sigma_n2}")));
    }
    let s = v.entries.ad_mul(&spec.a).unscale(v.beta_nm().sqrt());
    let mut p = s.clone();
    if sigma_n2 > T::zero() {
        let mut rng = rng_for(seed, stream::NOISE, 0);
        for z in p.iter_mut() {
            *z += complex_normal(&mut rng, sigma_n2);
        }
    }
    let gamma = if sigma_n2 > T::zero() { spec.sigma_a2 / sigma_n2 } else { T::max_value().expect("bounded") };
    Ok(Observation { p, s, sigma_a2: spec.sigma_a2, sigma_n2, gamma })
}

fn cholesky<T: Real>(mat: DMatrix<Complex<T>>) -> Result<(Cholesky<Complex<T>, Dyn>, T)> {
    let rows = mat.nrows();
    let chol = Cholesky::new(mat).ok_or_else(|| Error::EigenFailure {
        rows,
        detail: "system matrix is not numerically positive definite".into(),
    })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((T::max_value().expect("bounded"), T::zero()), |(lo, hi), z| {
        (lo.min(z.re), hi.max(z.re))
    });
    Ok((chol, (hi / lo) * (hi / lo)))
}

/// `(1/n^d) tr((γ/β V V^H + I)^{-1})`, via a Cholesky factorization.
pub fn trace_mse<T: Real>(v: &DFoldVandermonde<T>, gamma: T) -> Result<T> {
    let rows = v.rows();
    let k = gamma / v.beta_nm();
    let mut mat = v.gram().scale(k);
    for i in 0..rows {
        mat[(i, i)] += Complex::new(T::one(), T::zero());
    }
    let (chol, _) = cholesky(mat)?;
    let inv = chol.inverse();
    let tr = (0..rows).fold(T::zero(), |s, i| s + inv[(i, i)].re);
    Ok(tr / T::from_usize_lossy(rows))
}

/// LMMSE estimate in the smaller of the two equivalent forms.
pub fn lmmse<T: Real>(v: &DFoldVandermonde<T>, obs: &Observation<T>, truth: &FieldSpectrum<T>) -> Result<LmmseResult<T>> {
    let form = if v.m < v.rows() { SolveForm::Dual } else { SolveForm::Primal };
    lmmse_with_form(v, obs, truth, form)
}

pub fn lmmse_with_form<T: Real>(
    v: &DFoldVandermonde<T>,
    obs: &Observation<T>,
    truth: &FieldSpectrum<T>,
    form: SolveForm,
) -> Result<LmmseResult<T>> {
    check_shape(v, truth)?;
    if obs.p.len() != v.m {
        return Err(Error::DimensionMismatch { expected: v.m, got: obs.p.len() });
    }
    if !(obs.sigma_n2 > T::zero()) {
        return Err(invalid("LMMSE needs positive noise power"));
    }
    let beta = v.beta_nm();
    let one = Complex::new(T::one(), T::zero());
    let (a_hat, cond) = match form {
        SolveForm::Dual => {
            let mut k = v.entries.ad_mul(&v.entries).scale(obs.sigma_a2 / beta);
            for i in 0..v.m {
                k[(i, i)] += one.scale(obs.sigma_n2);
            }
            let (chol, cond) = cholesky(k)?;
            let w = chol.solve(&obs.p);
            ((&v.entries * w).scale(obs.sigma_a2 / beta.sqrt()), cond)
        }
        SolveForm::Primal => {
            let mut k = v.gram().unscale(beta);
            for i in 0..v.rows() {
                k[(i, i)] += one.scale(obs.sigma_n2 / obs.sigma_a2);
            }
            let (chol, cond) = cholesky(k)?;
            let rhs = (&v.entries * &obs.p).unscale(beta.sqrt());
            (chol.solve(&rhs), cond)
        }
    };
    let rows = T::from_usize_lossy(v.rows());
    let normalized_error = (&truth.a - &a_hat).norm_squared() / (rows * truth.sigma_a2);
    let trace_mse = trace_mse(v, obs.gamma)?;
    Ok(LmmseResult {
        a_hat,
        normalized_error,
        trace_mse,
        form,
        condition_estimate: cond,
        ill_conditioned: cond > T::lit(COND_TOL),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct MseEstimate<T> {
    pub mean_trace_mse: T,
    pub mean_normalized_error: T,
    pub stderr_trace_mse: T,
    pub stderr_normalized_error: T,
    pub trials: usize,
    /// Trials whose solve was flagged ill-conditioned.
    pub ill_conditioned: usize,
}

/// Monte Carlo MSE with unit spectrum power and SNR `γ`.
pub fn mse_monte_carlo<T: Real>(
    dist: &dyn SamplingDistribution<T>,
    n: usize,
    d: usize,
    m: usize,
    gamma: T,
    trials: usize,
    seed: u64,
) -> Result<MseEstimate<T>> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if !(gamma >= T::zero() && gamma.is_finite()) {
        return Err(invalid(format!("SNR must be finite and nonnegative, got {gamma}")));
    }
    let per_trial: Vec<(T, T, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ts = derive_seed(seed, stream::TRIAL, t as u64);
            let v = build_vandermonde(dist, n, d, m, ts)?;
            let spec = generate_spectrum(n, d, T::one(), ts)?;
            if gamma == T::zero() {
                let err = spec.a.norm_squared() / T::from_usize_lossy(v.rows());
                return Ok((T::one(), err, false));
            }
            let obs = observe(&v, &spec, T::one() / gamma, ts)?;
            let r = lmmse(&v, &obs, &spec)?;
            Ok((r.trace_mse, r.normalized_error, r.ill_conditioned))
        })
        .collect::<Result<_>>()?;
    let (tr, er): (Vec<T>, Vec<T>) = per_trial.iter().map(|&(a, b, _)| (a, b)).unzip();
    let (mt, st) = mean_and_stderr(&tr);
    let (me, se) = mean_and_stderr(&er);
    Ok(MseEstimate {
        mean_trace_mse: mt,
        mean_normalized_error: me,
        stderr_trace_mse: st,
        stderr_normalized_error: se,
        trials,
        ill_conditioned: per_trial.iter().filter(|x| x.2).count(),
    })
}

pub fn mean_and_stderr<T: Real>(xs: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().fold(T::zero(), |s, x| s + *x) / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let var = xs.iter().fold(T::zero(), |s, x| s + (*x - mean) * (*x - mean)) / (n - T::one());
    (mean, (var / n).sqrt())
}

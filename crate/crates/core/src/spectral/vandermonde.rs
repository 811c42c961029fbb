use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::rng::{rng_for, stream};
use crate::scalar::{modulus, polar, Real};
use crate::spectral::distribution::SamplingDistribution;

/// Cap on the row count `n^d`.
pub const MAX_ROWS: usize = 1024;

/// `n^d × m` matrix with `(V)_{ν(ℓ), q} = m^{-1/2} exp(-2πi ℓ·x_q)`.
#[derive(Clone, Debug)]
pub struct DFoldVandermonde<T: Real> {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// Generating points, flattened with stride `d`.
    pub points: Vec<T>,
    pub entries: DMatrix<Complex<T>>,
}

/// `n^d`, or an error when it exceeds [`MAX_ROWS`].
pub fn row_count(n: usize, d: usize) -> Result<usize> {
    if n == 0 || d == 0 {
        return Err(invalid("n and d must be positive"));
    }
    match n.checked_pow(d as u32) {
        Some(r) if r <= MAX_ROWS => Ok(r),
        _ => Err(invalid(format!("n^d = {n}^{d} exceeds the {MAX_ROWS}-row cap"))),
    }
}

/// `ν(ℓ) = Σ_j n^(j-1) ℓ_j`, first coordinate fastest.
pub fn row_index(n: usize, ell: &[usize]) -> usize {
    ell.iter().rev().fold(0, |acc, &l| acc * n + l)
}

/// Inverse of [`row_index`].
pub fn multi_index(n: usize, d: usize, mut nu: usize) -> Vec<usize> {
    (0..d)
        .map(|_| {
            let l = nu % n;
            nu /= n;
            l
        })
        .collect()
}

impl<T: Real> DFoldVandermonde<T> {
    pub fn from_points(n: usize, d: usize, points: Vec<T>) -> Result<Self> {
        let rows = row_count(n, d)?;
        if points.is_empty() || !points.len().is_multiple_of(d) {
            return Err(invalid("point list must hold m >= 1 points of dimension d"));
        }
        let m = points.len() / d;
        let scale = T::one() / T::from_usize_lossy(m).sqrt();
        let mut entries = DMatrix::zeros(rows, m);
        let mut axis = vec![Complex::new(T::zero(), T::zero()); d * n];
        for (q, mut col) in entries.column_iter_mut().enumerate() {
            let x = &points[q * d..(q + 1) * d];
            for (j, &xj) in x.iter().enumerate() {
                phasors(xj, &mut axis[j * n..(j + 1) * n]);
            }
            // tensor product over axes, first axis fastest
            for (k, v) in col.iter_mut().take(n).enumerate() {
                *v = axis[k].scale(scale);
            }
            let mut len = n;
            for j in 1..d {
                for k in (0..n).rev() {
                    let w = axis[j * n + k];
                    for i in 0..len {
                        col[k * len + i] = col[i] * w;
                    }
                }
                len *= n;
            }
        }
        Ok(Self { n, d, m, points, entries })
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// `β_{n,m} = n^d / m`.
    pub fn beta_nm(&self) -> T {
        T::from_usize_lossy(self.rows()) / T::from_usize_lossy(self.m)
    }

    /// `V V^H` from its block-Toeplitz structure.
    pub fn gram(&self) -> DMatrix<Complex<T>> {
        gram_from_points(self.n, self.d, &self.points)
    }

    /// `V V^H` by explicit multiplication.
    pub fn gram_dense(&self) -> DMatrix<Complex<T>> {
        &self.entries * self.entries.adjoint()
    }
}

/// Draws `m` points from `dist` and builds the matrix.
pub fn build_vandermonde<T: Real>(
    dist: &dyn SamplingDistribution<T>,
    n: usize,
    d: usize,
    m: usize,
    seed: u64,
) -> Result<DFoldVandermonde<T>> {
    if dist.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: dist.dim() });
    }
    if m == 0 {
        return Err(invalid("m must be positive"));
    }
    row_count(n, d)?;
    let mut rng = rng_for(seed, stream::POINTS, 0);
    let points = dist.sample(&mut rng, m);
    DFoldVandermonde::from_points(n, d, points)
}

/// `(V V^H)_{ν(ℓ),ν(ℓ')} = r(ℓ - ℓ')` with `r(k) = m^{-1} Σ_q exp(-2πi k·x_q)`.
///
/// Only the `(2n-1)^d` lag values are accumulated, in `O(m (2n-1)^d)`.
pub fn gram_from_points<T: Real>(n: usize, d: usize, points: &[T]) -> DMatrix<Complex<T>> {
    let m = points.len() / d;
    let span = 2 * n - 1;
    let lags = span.pow(d as u32);
    let mut r = vec![Complex::new(T::zero(), T::zero()); lags];
    // per-axis phasors exp(-2πi k x) for k = -(n-1)..=(n-1)
    let mut axis = vec![Complex::new(T::zero(), T::zero()); d * span];
    let mut term = vec![Complex::new(T::zero(), T::zero()); lags];
    for q in 0..m {
        let x = &points[q * d..(q + 1) * d];
        for (j, &xj) in x.iter().enumerate() {
            let row = &mut axis[j * span..(j + 1) * span];
            phasors(xj, &mut row[n - 1..]);
            for k in 1..n {
                row[n - 1 - k] = row[n - 1 + k].conj();
            }
        }
        // tensor product over axes, first axis fastest
        term[..span].copy_from_slice(&axis[..span]);
        let mut len = span;
        for j in 1..d {
            let row = &axis[j * span..(j + 1) * span];
            for k in (0..span).rev() {
                for i in 0..len {
                    term[k * len + i] = term[i] * row[k];
                }
            }
            len *= span;
        }
        for (acc, t) in r.iter_mut().zip(&term) {
            *acc += *t;
        }
    }
    let inv_m = T::one() / T::from_usize_lossy(m);
    for v in r.iter_mut() {
        *v = v.scale(inv_m);
    }

    let rows = n.pow(d as u32);
    let mut gram = DMatrix::zeros(rows, rows);
    let mut li = vec![0usize; d];
    let mut lj = vec![0usize; d];
    for a in 0..rows {
        decompose(n, a, &mut li);
        for b in 0..rows {
            decompose(n, b, &mut lj);
            let mut lag = 0;
            for j in (0..d).rev() {
                lag = lag * span + (li[j] + n - 1 - lj[j]);
            }
            gram[(a, b)] = r[lag];
        }
    }
    gram
}

/// `out[k] = exp(-2πi k x)`. Powers come from a recurrence re-anchored on an
/// exact phasor every 32 steps, which bounds the drift to a few ulps.
fn phasors<T: Real>(x: T, out: &mut [Complex<T>]) {
    let step = polar(T::one(), -T::two_pi() * x);
    for (k, v) in out.iter_mut().enumerate() {
        *v = if k % 32 == 0 { polar(T::one(), -T::two_pi() * T::from_usize_lossy(k) * x) } else { step };
    }
    for k in 1..out.len() {
        if k % 32 != 0 {
            out[k] = out[k - 1] * out[k];
        }
    }
}

fn decompose(n: usize, mut nu: usize, out: &mut [usize]) {
    for v in out.iter_mut() {
        *v = nu % n;
        nu /= n;
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The matrix is symmetrized first. Negative eigenvalues within round-off
/// are clamped to zero; larger ones are an error since the callers only pass
/// positive semidefinite products.
pub fn hermitian_eigenvalues<T: Real>(mat: &DMatrix<Complex<T>>) -> Result<Vec<T>> {
    let n = mat.nrows();
    if n != mat.ncols() {
        return Err(invalid("eigenvalues need a square matrix"));
    }
    let sym = (mat + mat.adjoint()).scale(T::lit(0.5));
    let scale = sym.iter().fold(T::zero(), |s, z| s.max(modulus(z)));
    if !scale.is_finite() {
        return Err(Error::EigenFailure { rows: n, detail: "non-finite entries".into() });
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(sym, T::default_epsilon(), 10_000).ok_or_else(|| {
        Error::EigenFailure { rows: n, detail: format!("no convergence (max |a_ij| = {scale})") }
    })?;
    let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let tol = T::from_usize_lossy(100 * n.max(1)) * T::machine_epsilon() * scale.max(T::one());
    for v in vals.iter_mut() {
        if *v < T::zero() {
            if -*v > tol {
                return Err(Error::EigenFailure {
                    rows: n,
                    detail: format!("eigenvalue {v} below -{tol} for a PSD product"),
                });
            }
            *v = T::zero();
        }
    }
    Ok(vals)
}

/// Eigenvalues of `V V^H`, ascending.
pub fn gram_eigenvalues<T: Real>(v: &DFoldVandermonde<T>) -> Result<Vec<T>> {
    hermitian_eigenvalues(&v.gram())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::distribution::UniformPhases;

    fn close(a: Complex<f64>, b: Complex<f64>) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn zero_phase_column() {
        let v = DFoldVandermonde::<f64>::from_points(2, 1, vec![0.0]).unwrap();
        assert!(close(v.entries[(0, 0)], Complex::new(1.0, 0.0)));
        assert!(close(v.entries[(1, 0)], Complex::new(1.0, 0.0)));
    }

    #[test]
    fn quarter_phase_column() {
        let v = DFoldVandermonde::<f64>::from_points(2, 1, vec![0.25]).unwrap();
        assert!(close(v.entries[(0, 0)], Complex::new(1.0, 0.0)));
        assert!(close(v.entries[(1, 0)], Complex::new(0.0, -1.0)));
    }

    #[test]
    fn two_fold_row_order() {
        let u = UniformPhases::new(2).unwrap();
        let v = build_vandermonde::<f64>(&u, 2, 2, 3, 7).unwrap();
        assert_eq!(v.entries.shape(), (4, 3));
        assert_eq!(row_index(2, &[0, 0]), 0);
        assert_eq!(row_index(2, &[1, 0]), 1);
        assert_eq!(row_index(2, &[0, 1]), 2);
        assert_eq!(row_index(2, &[1, 1]), 3);
        for q in 0..3 {
            let x = &v.points[2 * q..2 * q + 2];
            let s = 1.0 / 3f64.sqrt();
            let expect = |l1: f64, l2: f64| Complex::from_polar(s, -2.0 * std::f64::consts::PI * (l1 * x[0] + l2 * x[1]));
            assert!(close(v.entries[(1, q)], expect(1.0, 0.0)));
            assert!(close(v.entries[(2, q)], expect(0.0, 1.0)));
            assert!(close(v.entries[(3, q)], expect(1.0, 1.0)));
        }
    }

    #[test]
    fn entries_on_circle() {
        let u = UniformPhases::new(1).unwrap();
        let v = build_vandermonde::<f64>(&u, 8, 1, 5, 1).unwrap();
        let r = 1.0 / 5f64.sqrt();
        assert!(v.entries.iter().all(|z| (z.norm() - r).abs() < 1e-14));
        assert!((v.beta_nm() - 1.6).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_and_caps() {
        let u = UniformPhases::new(1).unwrap();
        assert!(matches!(build_vandermonde::<f64>(&u, 4, 2, 3, 0), Err(Error::DimensionMismatch { .. })));
        assert!(row_count(33, 2).is_err());
        assert!(row_count(1024, 1).is_ok());
    }

    #[test]
    fn toeplitz_gram_matches_dense_product() {
        for (n, d, m) in [(5, 1, 7), (3, 2, 11), (2, 3, 4), (4, 2, 3)] {
            let u = UniformPhases::new(d).unwrap();
            let v = build_vandermonde::<f64>(&u, n, d, m, 11).unwrap();
            let diff = (v.gram() - v.gram_dense()).iter().fold(0.0f64, |s, z| s.max(z.norm()));
            assert!(diff < 1e-13, "n={n} d={d}: {diff}");
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let u = UniformPhases::new(1).unwrap();
        let v = build_vandermonde::<f64>(&u, 1, 1, 9, 3).unwrap();
        let e = gram_eigenvalues(&v).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0] - 1.0).abs() < 1e-14);

        let v = build_vandermonde::<f64>(&u, 2, 1, 1, 3).unwrap();
        let e = gram_eigenvalues(&v).unwrap();
        assert!(e[0].abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);

        let v = DFoldVandermonde::<f64>::from_points(2, 1, vec![0.0, 0.25]).unwrap();
        let e = gram_eigenvalues(&v).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e[0] - (1.0 - h)).abs() < 1e-14 && (e[1] - (1.0 + h)).abs() < 1e-14);
    }

    #[test]
    fn single_precision_path() {
        let v = DFoldVandermonde::<f32>::from_points(2, 1, vec![0.0, 0.25]).unwrap();
        let e = gram_eigenvalues(&v).unwrap();
        assert!((e[1] - (1.0 + std::f32::consts::FRAC_1_SQRT_2)).abs() < 1e-5);
    }

    #[test]
    fn rejects_indefinite_input() {
        let mut m = DMatrix::<Complex<f64>>::identity(2, 2);
        m[(1, 1)] = Complex::new(-1.0, 0.0);
        assert!(hermitian_eigenvalues(&m).is_err());
    }
}

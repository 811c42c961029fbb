use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::integrate;
use crate::rng::{derive_seed, stream};
use crate::scalar::Real;
use crate::spectral::distribution::{DensityOfDensity, UniformPhases};
use crate::spectral::summary::{columns_for, eta_from_eigenvalues, trial_eigenvalues};

/// Relative tolerance of the mixture quadrature.
pub const MIXTURE_REL_TOL: f64 = 1e-4;

/// Finite-size `η_u(β, γ)` for uniform phases, tabulated on realized aspect
/// ratios. `ln η` is interpolated monotonically in `ln β` and `ln(1 + γ)`,
/// where it is close to linear at high SNR.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EtaTable {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Realized `n^d / m`, ascending.
    pub betas: Vec<f64>,
    pub columns: Vec<usize>,
    /// Ascending, starting at zero.
    pub gammas: Vec<f64>,
    /// `values[i][j] = η_u(betas[i], gammas[j])`.
    pub values: Vec<Vec<f64>>,
    #[serde(skip)]
    rows: Vec<MonotoneCubic<f64>>,
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && count >= 1) {
        return Err(invalid(format!("bad log grid [{lo}, {hi}] x {count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect())
}

/// Zero followed by eight points per decade over `[1e-3, 1e8]`.
pub fn default_gamma_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(log_grid(1e-3, 1e8, 89).expect("valid grid"));
    g
}

/// Aspect-ratio nodes covering `β / y` for every `β` in `betas` and every
/// `y ∈ [y_min, y_max]`, with a 5% margin on both ends.
pub fn beta_grid_for(betas: &[f64], y_min: f64, y_max: f64, count: usize) -> Result<Vec<f64>> {
    if betas.is_empty() || !(y_min > 0.0 && y_max >= y_min) {
        return Err(invalid("beta grid needs aspect ratios and a positive y range"));
    }
    let lo = betas.iter().copied().fold(f64::INFINITY, f64::min) / y_max;
    let hi = betas.iter().copied().fold(0.0, f64::max) / y_min;
    log_grid(lo / 1.05, hi * 1.05, count)
}

/// Simulates the table. Each aspect-ratio node uses its own derived seed.
pub fn eta_u_table<T: Real>(
    d: usize,
    beta_grid: &[f64],
    gamma_grid: &[f64],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<EtaTable> {
    if gamma_grid.first() != Some(&0.0) {
        return Err(invalid("gamma grid must start at 0"));
    }
    if gamma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("gamma grid must be strictly increasing"));
    }
    let rows = crate::spectral::vandermonde::row_count(n, d)?;
    let mut cols: Vec<usize> = beta_grid.iter().map(|&b| columns_for(n, d, b)).collect::<Result<_>>()?;
    // ascending β is descending m
    cols.sort_unstable_by(|a, b| b.cmp(a));
    cols.dedup();
    if cols.len() < 2 {
        return Err(invalid("beta grid collapses to fewer than two distinct column counts"));
    }
    let uniform = UniformPhases::new(d)?;
    let mut values = Vec::with_capacity(cols.len());
    for &m in &cols {
        let node_seed = derive_seed(seed, stream::TABLE, m as u64);
        let eigs: Vec<T> = trial_eigenvalues::<T>(&uniform, n, m, trials, node_seed)?.concat();
        values.push(gamma_grid.iter().map(|&g| eta_from_eigenvalues(&eigs, T::lit(g)).to_f64_lossy()).collect());
    }
    let betas = cols.iter().map(|&m| rows as f64 / m as f64).collect();
    let mut table = EtaTable { d, n, trials, seed, betas, columns: cols, gammas: gamma_grid.to_vec(), values, rows: Vec::new() };
    table.prepare()?;
    Ok(table)
}

impl EtaTable {
    fn prepare(&mut self) -> Result<()> {
        if self.betas.len() != self.values.len() || self.values.iter().any(|r| r.len() != self.gammas.len()) {
            return Err(invalid("table shape does not match its grids"));
        }
        let u: Vec<f64> = self.gammas.iter().map(|g| g.ln_1p()).collect();
        if self.values.iter().flatten().any(|v| !(*v > 0.0 && *v <= 1.0)) {
            return Err(invalid("tabulated values must lie in (0, 1]"));
        }
        self.rows = self
            .values
            .iter()
            .map(|r| MonotoneCubic::new(u.clone(), r.iter().map(|v| v.ln()).collect()))
            .collect::<Result<_>>()?;
        Ok(())
    }

    pub fn beta_range(&self) -> (f64, f64) {
        (self.betas[0], self.betas[self.betas.len() - 1])
    }

    pub fn gamma_max(&self) -> f64 {
        self.gammas[self.gammas.len() - 1]
    }

    /// Interpolated `η_u(β, γ)`.
    pub fn eval<T: Real>(&self, beta: T, gamma: T) -> Result<T> {
        let (b, g) = (beta.to_f64_lossy(), gamma.to_f64_lossy());
        let (lo, hi) = self.beta_range();
        if !(b >= lo && b <= hi) {
            return Err(Error::TableRange(format!("aspect ratio {b} outside tabulated [{lo}, {hi}]")));
        }
        if !(g >= 0.0 && g <= self.gamma_max()) {
            return Err(Error::TableRange(format!("gamma {g} outside tabulated [0, {}]", self.gamma_max())));
        }
        if g == 0.0 {
            return Ok(T::one());
        }
        let u = g.ln_1p();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.eval(u).expect("inside gamma range")).collect();
        let xs: Vec<f64> = self.betas.iter().map(|b| b.ln()).collect();
        let v = MonotoneCubic::new(xs, ys)?.eval(b.ln()).expect("inside beta range");
        Ok(T::lit(v.exp().min(1.0)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut t: Self = serde_json::from_str(s)?;
        t.prepare()?;
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `η_x(β, γ) = 1 - |A| + |A| ∫ g_x(y) η_u(β/y, γy) dy`.
pub fn eta_mixture<T: Real>(
    gx: &DensityOfDensity<T>,
    support_measure: T,
    beta: T,
    gamma: T,
    eta_u: &dyn Fn(T, T) -> Result<T>,
) -> Result<T> {
    if !(support_measure > T::zero() && support_measure <= T::one()) {
        return Err(invalid(format!("support measure must lie in (0, 1], got {support_measure}")));
    }
    if !(beta > T::zero()) || !(gamma >= T::zero()) {
        return Err(invalid("need beta > 0 and gamma >= 0"));
    }
    if gamma == T::zero() {
        return Ok(T::one());
    }
    let mix = match gx {
        DensityOfDensity::DiscreteAtoms(atoms) => {
            let mut acc = T::zero();
            for &(y, w) in atoms {
                acc += w * eta_u(beta / y, gamma * y)?;
            }
            acc
        }
        DensityOfDensity::ClosedForm(law) => {
            let (lo, hi) = law.support();
            guarded_integral(|y| Ok(law.pdf(y) * eta_u(beta / y, gamma * y)?), lo, hi, &law.breakpoints())?
        }
        DensityOfDensity::Empirical(h) => {
            let lo = h.edges[0];
            let hi = h.edges[h.edges.len() - 1];
            let total = h.total_mass();
            let inner = &h.edges[1..h.edges.len() - 1];
            guarded_integral(|y| Ok(h.density(y) / total * eta_u(beta / y, gamma * y)?), lo, hi, inner)?
        }
    };
    Ok(T::one() - support_measure + support_measure * mix)
}

fn guarded_integral<T: Real>(f: impl Fn(T) -> Result<T>, lo: T, hi: T, breaks: &[T]) -> Result<T> {
    let mut failure = None;
    let q = integrate(
        |y| {
            if failure.is_some() {
                return T::zero();
            }
            f(y).unwrap_or_else(|e| {
                failure = Some(e);
                T::zero()
            })
        },
        lo,
        hi,
        breaks,
        T::lit(MIXTURE_REL_TOL),
        T::lit(1e-12),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}

/// Asymptotic MSE at aspect ratio `β` and SNR `γ`: `η_x(β, γ/β)`.
pub fn mse_asymptotic<T: Real>(
    gx: &DensityOfDensity<T>,
    support_measure: T,
    beta: T,
    snr: T,
    eta_u: &dyn Fn(T, T) -> Result<T>,
) -> Result<T> {
    eta_mixture(gx, support_measure, beta, snr / beta, eta_u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_table() -> EtaTable {
        let betas = log_grid(0.1, 2.0, 6).unwrap();
        let gammas = default_gamma_grid();
        eta_u_table::<f64>(1, &betas, &gammas, 16, 8, 5).unwrap()
    }

    #[test]
    fn grids() {
        let g = log_grid(1.0, 100.0, 3).unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        let d = default_gamma_grid();
        assert_eq!(d[0], 0.0);
        assert!(d.windows(2).all(|w| w[1] > w[0]));
        let b = beta_grid_for(&[0.2, 0.8], 0.5, 2.0, 10).unwrap();
        assert!(b[0] < 0.1 && *b.last().unwrap() > 1.6);
    }

    #[test]
    fn table_nodes_and_bounds() {
        let t = small_table();
        assert_eq!(t.eval(t.betas[2], 0.0).unwrap(), 1.0);
        let v = t.eval(t.betas[2], t.gammas[40]).unwrap();
        assert!((v - t.values[2][40]).abs() < 1e-12);
        assert!(matches!(t.eval(5.0, 1.0), Err(Error::TableRange(_))));
        assert!(matches!(t.eval(0.5, 1e9), Err(Error::TableRange(_))));
        let a = t.eval(0.5, 1.0).unwrap();
        let b = t.eval(0.5, 2.0).unwrap();
        assert!(b < a && a < 1.0);
    }

    #[test]
    fn json_round_trip() {
        let t = small_table();
        let back = EtaTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back.values, t.values);
        assert_eq!(back.eval(0.7, 3.0).unwrap(), t.eval(0.7, 3.0).unwrap());
    }

    #[test]
    fn mixture_reduces_to_eta_u() {
        let t = small_table();
        let f = |b: f64, g: f64| t.eval(b, g);
        let gx = DensityOfDensity::DiscreteAtoms(vec![(1.0, 1.0)]);
        assert_eq!(eta_mixture(&gx, 1.0, 0.5, 3.0, &f).unwrap(), t.eval(0.5, 3.0).unwrap());
        assert_eq!(eta_mixture(&gx, 1.0, 0.5, 0.0, &f).unwrap(), 1.0);
        let hole = DensityOfDensity::DiscreteAtoms(vec![(2.0, 1.0)]);
        let v = eta_mixture(&hole, 0.5, 0.5, 3.0, &f).unwrap();
        assert!((v - (0.5 + 0.5 * t.eval(0.25, 6.0).unwrap())).abs() < 1e-15);
        assert!(v > 0.5);
    }

    #[test]
    fn range_errors_propagate() {
        let t = small_table();
        let f = |b: f64, g: f64| t.eval(b, g);
        let gx = DensityOfDensity::DiscreteAtoms(vec![(0.01, 1.0)]);
        assert!(matches!(eta_mixture(&gx, 1.0, 0.5, 1.0, &f), Err(Error::TableRange(_))));
    }
}

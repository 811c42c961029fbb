//! Experiment configurations. Everything that affects a table's content lives
//! here; thread counts and output paths do not.

use serde::{Deserialize, Serialize};
use vanspec_core::partitions::P_MAX;
use vanspec_core::scenarios::csma::HierarchyConfig;
use vanspec_core::scenarios::DistributionSpec;
use vanspec_core::spectral::summary::Binning;
use vanspec_core::spectral::vandermonde::MAX_ROWS;

use crate::error::{usage, CliResult};
use crate::grid::increasing;

/// Aspect-ratio range always covered by η tables, so one cached table serves
/// every experiment at the same `(d, n)`.
pub const TABLE_BETA_RANGE: (f64, f64) = (0.05, 5.0);
pub const TABLE_NODES: usize = 32;
pub const TABLE_TRIALS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    /// Reproduced figure, if any.
    pub figure: Option<String>,
    pub seed: u64,
    pub run: ExperimentConfig,
}

/// Simulation parameters of the uniform-phase `η_u` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TablePlan {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub nodes: usize,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl TablePlan {
    /// Covers `β / y` for every `β` in `betas` and `y` in `[y_lo, y_hi]`.
    pub fn covering(d: usize, n: usize, trials: usize, betas: &[f64], y_lo: f64, y_hi: f64) -> Self {
        let lo = betas.iter().copied().fold(f64::INFINITY, f64::min) / y_hi / 1.05;
        let hi = betas.iter().copied().fold(0.0, f64::max) / y_lo * 1.05;
        Self {
            d,
            n,
            trials,
            nodes: TABLE_NODES,
            beta_lo: lo.min(TABLE_BETA_RANGE.0),
            beta_hi: hi.max(TABLE_BETA_RANGE.1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Partitions {
        p: usize,
        k: Option<usize>,
    },
    Moments {
        dist: DistributionSpec,
        beta: f64,
        max_p: usize,
        n: usize,
        trials: usize,
    },
    Spectrum {
        dist: DistributionSpec,
        n: usize,
        beta: f64,
        trials: usize,
        bins: Binning,
    },
    Mse {
        dist: DistributionSpec,
        n: usize,
        betas: Vec<f64>,
        gamma_db: Vec<f64>,
        trials: usize,
        table: TablePlan,
    },
    Fading {
        a_db: f64,
        n: usize,
        betas: Vec<f64>,
        gamma_db: Vec<f64>,
        trials: usize,
        table: TablePlan,
    },
    Csma {
        hierarchy: HierarchyConfig,
        n: usize,
        betas: Vec<f64>,
        gamma_db: Vec<f64>,
        trials: usize,
        table: TablePlan,
    },
    Holes {
        c: f64,
        d: usize,
        n: usize,
        beta: f64,
        trials: usize,
        bins: Binning,
    },
    Dense {
        a_db: f64,
        n: usize,
        betas: Vec<f64>,
        trials: usize,
        bins: Binning,
    },
    GxCurves {
        a_db: Vec<f64>,
        points: usize,
    },
}

impl Experiment {
    /// Compact JSON with a fixed key order.
    pub fn canonical_json(&self) -> CliResult<String> {
        // `Value` maps are ordered by key
        Ok(serde_json::to_string(&serde_json::to_value(self)?)?)
    }

    pub fn from_json(s: &str) -> CliResult<Self> {
        let exp: Self = serde_json::from_str(s).map_err(|e| usage(format!("bad config: {e}")))?;
        exp.validate()?;
        Ok(exp)
    }

    /// Range checks; every failure is a usage error.
    pub fn validate(&self) -> CliResult<()> {
        use ExperimentConfig::*;
        match &self.run {
            Partitions { p, k } => {
                if !(1..=P_MAX).contains(p) {
                    return Err(usage(format!("--p must lie in 1..={P_MAX}")));
                }
                if let Some(k) = k {
                    if !(1..=*p).contains(k) {
                        return Err(usage("--k must lie in 1..=p"));
                    }
                }
            }
            Moments { dist, beta, max_p, n, trials } => {
                distribution(dist)?;
                positive(*beta, "--beta")?;
                if !(1..=P_MAX).contains(max_p) {
                    return Err(usage(format!("--max-p must lie in 1..={P_MAX}")));
                }
                if *trials > 0 {
                    size(*n, dist.dim())?;
                }
            }
            Spectrum { dist, n, beta, trials, bins } => {
                distribution(dist)?;
                size(*n, dist.dim())?;
                positive(*beta, "--beta")?;
                at_least_one(*trials, "--trials")?;
                binning(*bins)?;
            }
            Mse { dist, n, betas, gamma_db, trials, table } => {
                distribution(dist)?;
                sweep(*n, dist.dim(), betas, gamma_db, *trials, table)?;
            }
            Fading { a_db, n, betas, gamma_db, trials, table } => {
                fading(*a_db)?;
                sweep(*n, 2, betas, gamma_db, *trials, table)?;
            }
            Csma { hierarchy, n, betas, gamma_db, trials, table } => {
                hierarchy.build().map_err(|e| usage(format!("bad hierarchy: {e}")))?;
                sweep(*n, 2, betas, gamma_db, *trials, table)?;
            }
            Holes { c, d, n, beta, trials, bins } => {
                if !(*c > 0.0 && *c <= 1.0) {
                    return Err(usage("--c must lie in (0, 1]"));
                }
                size(*n, *d)?;
                positive(*beta, "--beta")?;
                at_least_one(*trials, "--trials")?;
                binning(*bins)?;
            }
            Dense { a_db, n, betas, trials, bins } => {
                fading(*a_db)?;
                size(*n, 2)?;
                betas.iter().try_for_each(|b| positive(*b, "--beta"))?;
                at_least_one(*trials, "--trials")?;
                binning(*bins)?;
            }
            GxCurves { a_db, points } => {
                a_db.iter().try_for_each(|a| fading(*a))?;
                if *points < 2 {
                    return Err(usage("need at least two points per curve"));
                }
            }
        }
        Ok(())
    }
}

fn distribution(dist: &DistributionSpec) -> CliResult<()> {
    dist.build::<f64>().map(|_| ()).map_err(|e| usage(format!("bad distribution: {e}")))
}

fn fading(a_db: f64) -> CliResult<()> {
    if !a_db.is_finite() || a_db > 30.0 {
        return Err(usage("--a-db must be finite and at most 30"));
    }
    Ok(())
}

fn positive(v: f64, what: &str) -> CliResult<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(usage(format!("{what} must be positive, got {v}")));
    }
    Ok(())
}

fn at_least_one(v: usize, what: &str) -> CliResult<()> {
    if v == 0 {
        return Err(usage(format!("{what} must be at least 1")));
    }
    Ok(())
}

fn binning(b: Binning) -> CliResult<()> {
    if b == Binning::Count(0) {
        return Err(usage("--bins must be 'auto' or a positive count"));
    }
    Ok(())
}

fn size(n: usize, d: usize) -> CliResult<()> {
    let rows = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if n == 0 || rows > MAX_ROWS as u128 {
        return Err(usage(format!("--n must satisfy 1 <= n^d <= {MAX_ROWS}, got n={n}, d={d}")));
    }
    Ok(())
}

fn sweep(n: usize, d: usize, betas: &[f64], gamma_db: &[f64], trials: usize, table: &TablePlan) -> CliResult<()> {
    size(n, d)?;
    size(table.n, table.d)?;
    if table.d != d {
        return Err(usage("eta table dimension differs from the distribution's"));
    }
    if betas.is_empty() || gamma_db.is_empty() {
        return Err(usage("need at least one aspect ratio and one SNR"));
    }
    betas.iter().try_for_each(|b| positive(*b, "--beta"))?;
    increasing(gamma_db, "gamma grid")?;
    if gamma_db.iter().any(|g| !g.is_finite() || *g > 60.0) {
        return Err(usage("SNR must be finite and at most 60 dB"));
    }
    at_least_one(trials, "--trials")?;
    at_least_one(table.trials, "table trials")?;
    if table.nodes < 2 || !(table.beta_lo > 0.0 && table.beta_hi > table.beta_lo) {
        return Err(usage("eta table needs two or more nodes on a positive range"));
    }
    Ok(())
}

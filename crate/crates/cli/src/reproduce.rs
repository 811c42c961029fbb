//! Canned desk-scale configurations for each figure.

use std::sync::Arc;

use vanspec_core::scenarios::csma::{csma_success_profile, HierarchyConfig};
use vanspec_core::scenarios::fading::fading_distribution;
use vanspec_core::spectral::summary::Binning;
use vanspec_core::PhaseLaw;

use crate::config::{ExperimentConfig, TablePlan, TABLE_TRIALS};
use crate::error::{usage, CliResult};
use crate::grid::parse_db_grid;

pub const FIGURES: [&str; 7] = ["fig1a", "fig1b", "fig2", "fig3", "fig5", "fig6", "fig7"];

const SWEEP_TRIALS: usize = 100;
const SPECTRUM_TRIALS: usize = 50;

/// Configuration of figure `id`; `trials` overrides every trial count,
/// including the η table's.
pub fn figure(id: &str, trials: Option<usize>) -> CliResult<ExperimentConfig> {
    let t = |default: usize| trials.unwrap_or(default);
    let fig3_betas = vec![0.2, 0.4, 0.6, 0.8];
    let csma_betas = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    Ok(match id {
        "fig1a" => ExperimentConfig::Holes { c: 0.8, d: 1, n: 100, beta: 0.8, trials: t(SPECTRUM_TRIALS), bins: Binning::Auto },
        "fig1b" => ExperimentConfig::Holes { c: 0.5, d: 1, n: 100, beta: 0.2, trials: t(SPECTRUM_TRIALS), bins: Binning::Auto },
        "fig2" => ExperimentConfig::GxCurves { a_db: vec![0.0, 5.0, 10.0], points: 200 },
        "fig3" => {
            let law: PhaseLaw = Arc::new(fading_distribution(5.0)?);
            ExperimentConfig::Fading {
                a_db: 5.0,
                n: 10,
                table: plan_for(&law, 10, t(TABLE_TRIALS), &fig3_betas),
                betas: fig3_betas,
                gamma_db: parse_db_grid("-10:2:30")?,
                trials: t(SWEEP_TRIALS),
            }
        }
        "fig5" => ExperimentConfig::Dense {
            a_db: 5.0,
            n: 10,
            betas: vec![0.5, 0.1, 0.01],
            trials: t(SPECTRUM_TRIALS),
            bins: Binning::Auto,
        },
        "fig6" | "fig7" => {
            let hierarchy = if id == "fig6" { HierarchyConfig::fig6() } else { HierarchyConfig::fig7() };
            let law: PhaseLaw = Arc::new(csma_success_profile(&hierarchy.build()?)?.density);
            ExperimentConfig::Csma {
                hierarchy,
                n: 10,
                table: plan_for(&law, 10, t(TABLE_TRIALS), &csma_betas),
                betas: csma_betas,
                gamma_db: vec![0.0, 10.0, 20.0],
                trials: t(SWEEP_TRIALS),
            }
        }
        other => return Err(usage(format!("unknown figure '{other}', expected one of {}", FIGURES.join(", ")))),
    })
}

/// Table plan covering the mixture over `law`'s density values.
pub fn plan_for(law: &PhaseLaw, n: usize, trials: usize, betas: &[f64]) -> TablePlan {
    let (lo, hi) = law.gx().support();
    TablePlan::covering(law.dim(), n, trials, betas, lo, hi)
}

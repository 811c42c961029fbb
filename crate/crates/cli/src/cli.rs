//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use vanspec_core::scenarios::csma::{csma_success_profile, HierarchyConfig};
use vanspec_core::scenarios::fading::fading_distribution;
use vanspec_core::scenarios::DistributionSpec;
use vanspec_core::spectral::summary::Binning;
use vanspec_core::PhaseLaw;

use crate::config::{Experiment, ExperimentConfig, TABLE_TRIALS};
use crate::error::{usage, CliResult};
use crate::experiments::{run, Context};
use crate::grid::{parse_db_grid, parse_list};
use crate::reproduce::{figure, plan_for};
use crate::table::config_line;

#[derive(Debug, Parser)]
#[command(name = "vanspec", version, about = "Random Vandermonde spectra and sensor-network field reconstruction")]
pub struct Cli {
    /// Master seed; every trial derives its own stream from it.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// η table cache: reused when it matches the run, written otherwise.
    #[arg(long, global = true)]
    pub eta_table: Option<PathBuf>,
    /// Progress messages on standard error.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// CSV destination (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG plot destination.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Sweep {
    /// Comma-separated aspect ratios n^d/m.
    #[arg(long = "beta", default_value = "0.2,0.4,0.6,0.8")]
    pub betas: String,
    /// SNR in dB as start:step:stop (inclusive) or a comma list; γ = 10^(dB/10).
    #[arg(long, default_value = "-10:2:30", allow_hyphen_values = true)]
    pub gamma_db: String,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Harmonics per axis of the η table (default: --n).
    #[arg(long)]
    pub table_n: Option<usize>,
    #[arg(long, default_value_t = TABLE_TRIALS)]
    pub table_trials: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Set partitions of {1..p} and their Vandermonde coefficients.
    Partitions {
        #[arg(long)]
        p: usize,
        /// Keep only partitions with k blocks.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Asymptotic moments against Monte Carlo traces.
    Moments {
        /// Distribution: uniform[:d], hole:c[:d], fading:a_db, inline JSON, or a JSON file.
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 4)]
        max_p: usize,
        /// Harmonics per axis for Monte Carlo (default: about 256 rows).
        #[arg(long)]
        n: Option<usize>,
        /// Monte Carlo trials; 0 skips the simulation.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Average empirical eigenvalue distribution of V V^H.
    Spectrum {
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// "auto" (Freedman–Diaconis) or a bin count.
        #[arg(long, default_value = "auto")]
        bins: String,
        #[command(flatten)]
        output: Output,
    },
    /// LMMSE reconstruction error: simulation, trace formula, asymptotics.
    Mse {
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        sweep: Sweep,
        #[command(flatten)]
        output: Output,
    },
    /// Network loss scenarios.
    #[command(subcommand)]
    Scenario(Scenario),
    /// Runs the canned configuration of a figure and writes <dir>/<id>.csv and <dir>/<id>.svg.
    Reproduce {
        /// fig1a, fig1b, fig2, fig3, fig5, fig6 or fig7.
        id: String,
        /// Overrides every trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Re-runs the configuration recorded in a CSV header.
    Rerun {
        csv: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Subcommand)]
pub enum Scenario {
    /// Rayleigh fading around a central sink.
    Fading {
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        a_db: f64,
        #[command(flatten)]
        sweep: Sweep,
        #[command(flatten)]
        output: Output,
    },
    /// Hierarchical CSMA collisions; the hierarchy file holds {L, H, areas, m, lambda1, collision}.
    Csma {
        /// Hierarchy JSON file (default: the light-load four-area network).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "beta", default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        betas: String,
        #[arg(long, default_value = "0,10,20", allow_hyphen_values = true)]
        gamma_db: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        table_n: Option<usize>,
        #[arg(long, default_value_t = TABLE_TRIALS)]
        table_trials: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Coverage hole: direct spectrum against the scaled uniform spectrum.
    Holes {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value = "auto")]
        bins: String,
        #[command(flatten)]
        output: Output,
    },
    /// Spectrum in the dense regime against the density of the density.
    Dense {
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        a_db: f64,
        /// Comma-separated aspect ratios.
        #[arg(long = "beta", default_value = "0.01")]
        betas: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value = "auto")]
        bins: String,
        #[command(flatten)]
        output: Output,
    },
}

pub fn execute(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
    }
    let ctx = Context { eta_table: cli.eta_table.clone(), verbose: cli.verbose };
    let seed = cli.seed;
    let plain = |run| Experiment { figure: None, seed, run };
    match cli.command {
        Command::Partitions { p, k, output } => finish(&plain(ExperimentConfig::Partitions { p, k }), &ctx, &output),
        Command::Moments { dist, d, beta, max_p, n, trials, output } => {
            let dist = distribution(&dist, d)?;
            let n = n.unwrap_or_else(|| default_moment_n(dist.dim()));
            finish(&plain(ExperimentConfig::Moments { dist, beta, max_p, n, trials }), &ctx, &output)
        }
        Command::Spectrum { dist, d, n, beta, trials, bins, output } => {
            let dist = distribution(&dist, d)?;
            let bins = binning(&bins)?;
            finish(&plain(ExperimentConfig::Spectrum { dist, n, beta, trials, bins }), &ctx, &output)
        }
        Command::Mse { dist, d, sweep, output } => {
            let dist = distribution(&dist, d)?;
            let law: PhaseLaw = dist.build().map_err(|e| usage(e.to_string()))?;
            let (betas, gamma_db) = (parse_list(&sweep.betas)?, parse_db_grid(&sweep.gamma_db)?);
            let table = plan_for(&law, sweep.table_n.unwrap_or(sweep.n), sweep.table_trials, &betas);
            let run = ExperimentConfig::Mse { dist, n: sweep.n, betas, gamma_db, trials: sweep.trials, table };
            finish(&plain(run), &ctx, &output)
        }
        Command::Scenario(Scenario::Fading { a_db, sweep, output }) => {
            let law: PhaseLaw = Arc::new(fading_distribution(a_db).map_err(|e| usage(e.to_string()))?);
            let (betas, gamma_db) = (parse_list(&sweep.betas)?, parse_db_grid(&sweep.gamma_db)?);
            let table = plan_for(&law, sweep.table_n.unwrap_or(sweep.n), sweep.table_trials, &betas);
            let run = ExperimentConfig::Fading { a_db, n: sweep.n, betas, gamma_db, trials: sweep.trials, table };
            finish(&plain(run), &ctx, &output)
        }
        Command::Scenario(Scenario::Csma { config, betas, gamma_db, n, trials, table_n, table_trials, output }) => {
            let hierarchy = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    serde_json::from_str::<HierarchyConfig>(&text)
                        .map_err(|e| usage(format!("{}: {e}", path.display())))?
                }
                None => HierarchyConfig::fig6(),
            };
            let profile = hierarchy.build().and_then(|h| csma_success_profile(&h)).map_err(|e| usage(e.to_string()))?;
            let law: PhaseLaw = Arc::new(profile.density);
            let (betas, gamma_db) = (parse_list(&betas)?, parse_db_grid(&gamma_db)?);
            let table = plan_for(&law, table_n.unwrap_or(n), table_trials, &betas);
            finish(&plain(ExperimentConfig::Csma { hierarchy, n, betas, gamma_db, trials, table }), &ctx, &output)
        }
        Command::Scenario(Scenario::Holes { c, d, beta, n, trials, bins, output }) => {
            let bins = binning(&bins)?;
            finish(&plain(ExperimentConfig::Holes { c, d, n, beta, trials, bins }), &ctx, &output)
        }
        Command::Scenario(Scenario::Dense { a_db, betas, n, trials, bins, output }) => {
            let run = ExperimentConfig::Dense { a_db, n, betas: parse_list(&betas)?, trials, bins: binning(&bins)? };
            finish(&plain(run), &ctx, &output)
        }
        Command::Reproduce { id, trials, out_dir } => {
            let exp = Experiment { figure: Some(id.clone()), seed, run: figure(&id, trials)? };
            std::fs::create_dir_all(&out_dir)?;
            let output = Output { out: Some(out_dir.join(format!("{id}.csv"))), svg: Some(out_dir.join(format!("{id}.svg"))) };
            finish(&exp, &ctx, &output)
        }
        Command::Rerun { csv, output } => {
            let text = std::fs::read_to_string(&csv)?;
            let line = config_line(&text).ok_or_else(|| usage(format!("{} has no '# config:' line", csv.display())))?;
            finish(&Experiment::from_json(line)?, &ctx, &output)
        }
    }
}

fn finish(exp: &Experiment, ctx: &Context, output: &Output) -> CliResult<()> {
    exp.validate()?;
    let start = Instant::now();
    let table = run(exp, ctx)?;
    match &output.out {
        Some(path) => table.write(exp, path, output.svg.as_deref())?,
        None => {
            std::io::stdout().write_all(table.to_csv(exp)?.as_bytes())?;
            if let (Some(path), Some(plot)) = (&output.svg, &table.plot) {
                std::fs::write(path, plot.render())?;
            }
        }
    }
    // wall time stays out of the files so reruns are byte-identical
    let target = output.out.as_deref().map(Path::display);
    match target {
        Some(p) => eprintln!("wrote {p}: {} rows in {:.2} s", table.rows.len(), start.elapsed().as_secs_f64()),
        None => eprintln!("{} rows in {:.2} s", table.rows.len(), start.elapsed().as_secs_f64()),
    }
    Ok(())
}

/// Parses `--dist`, reading it from a file when the argument names one, and
/// applies `--d` to distributions with a free dimension.
pub fn distribution(arg: &str, d: Option<usize>) -> CliResult<DistributionSpec> {
    let text = if Path::new(arg).is_file() { std::fs::read_to_string(arg)? } else { arg.to_string() };
    let mut spec = DistributionSpec::parse(&text).map_err(|e| usage(e.to_string()))?;
    if let Some(want) = d {
        match &mut spec {
            DistributionSpec::Uniform { d } | DistributionSpec::Hole { d, .. } | DistributionSpec::Piecewise { d, .. } => *d = want,
            other if other.dim() != want => {
                return Err(usage(format!("distribution is {}-dimensional, --d {want} given", other.dim())));
            }
            _ => {}
        }
    }
    Ok(spec)
}

fn binning(s: &str) -> CliResult<Binning> {
    if s == "auto" {
        return Ok(Binning::Auto);
    }
    match s.parse::<usize>() {
        Ok(k) if k > 0 => Ok(Binning::Count(k)),
        _ => Err(usage(format!("--bins must be 'auto' or a positive count, got '{s}'"))),
    }
}

/// About 256 rows: 256, 16, 6, 4, ...
fn default_moment_n(d: usize) -> usize {
    (256f64.powf(1.0 / d.max(1) as f64).round() as usize).max(2)
}

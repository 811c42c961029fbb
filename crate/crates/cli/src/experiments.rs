//! Dispatch from configurations to the core library.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use vanspec_core::moments::moment_table;
use vanspec_core::partitions::{enumerate_partitions, is_noncrossing, vandermonde_coefficient, CoefficientMethod};
use vanspec_core::rng::{derive_seed, stream};
use vanspec_core::reconstruct::mse_monte_carlo;
use vanspec_core::scenarios::csma::{csma_success_profile, HierarchyConfig};
use vanspec_core::scenarios::fading::fading_distribution;
use vanspec_core::scenarios::holes::hole_distribution;
use vanspec_core::scenarios::DistributionSpec;
use vanspec_core::spectral::distribution::{GxLaw, UniformPhases};
use vanspec_core::spectral::eta::{default_gamma_grid, eta_u_table, log_grid, mse_asymptotic, EtaTable};
use vanspec_core::spectral::summary::{
    aesd, columns_for, empirical_moments, freedman_diaconis, ks_distance, transform_scaled_lsd, Binning,
    SpectrumSummary,
};
use vanspec_core::spectral::vandermonde::row_count;
use vanspec_core::PhaseLaw;

use crate::config::{Experiment, ExperimentConfig, TablePlan};
use crate::error::{usage, CliResult};
use crate::grid::db_to_linear;
use crate::svg::Plot;
use crate::table::{Cell, ResultTable};

/// Run-time settings that do not affect results.
#[derive(Clone, Debug, Default)]
pub struct Context {
    /// Cache file for η tables: loaded when present, written otherwise.
    pub eta_table: Option<PathBuf>,
    /// Progress messages on standard error.
    pub verbose: bool,
}

pub fn run(exp: &Experiment, ctx: &Context) -> CliResult<ResultTable> {
    exp.validate()?;
    let seed = exp.seed;
    use ExperimentConfig::*;
    let mut table = match &exp.run {
        Partitions { p, k } => partitions(*p, *k)?,
        Moments { dist, beta, max_p, n, trials } => moments(dist, *beta, *max_p, *n, *trials, seed)?,
        Spectrum { dist, n, beta, trials, bins } => spectrum(dist, *n, *beta, *trials, *bins, seed)?,
        Mse { dist, n, betas, gamma_db, trials, table } => {
            let law: PhaseLaw = dist.build()?;
            let eta = eta_table(table, seed, ctx)?;
            let mut t = mse_sweep(&law, *n, betas, gamma_db, *trials, seed, &eta)?;
            t.plot = Some(plot_vs_gamma(&t, "MSE", &["mse_asymptotic", "mse_mc"]));
            t
        }
        Fading { a_db, n, betas, gamma_db, trials, table } => {
            let law: PhaseLaw = Arc::new(fading_distribution(*a_db)?);
            let eta = eta_table(table, seed, ctx)?;
            let mut t = mse_sweep(&law, *n, betas, gamma_db, *trials, seed, &eta)?;
            t.plot = Some(plot_vs_gamma(&t, &format!("Fading a = {a_db} dB"), &["mse_lossless", "mse_asymptotic"]));
            t
        }
        Csma { hierarchy, n, betas, gamma_db, trials, table } => csma(hierarchy, *n, betas, gamma_db, *trials, seed, table, ctx)?,
        Holes { c, d, n, beta, trials, bins } => holes(*c, *d, *n, *beta, *trials, *bins, seed)?,
        Dense { a_db, n, betas, trials, bins } => dense(*a_db, *n, betas, *trials, *bins, seed)?,
        GxCurves { a_db, points } => gx_curves(a_db, *points)?,
    };
    if let (Some(fig), Some(plot)) = (&exp.figure, table.plot.as_mut()) {
        plot.title = format!("{fig}: {}", plot.title);
    }
    Ok(table)
}

fn partitions(p: usize, k: Option<usize>) -> CliResult<ResultTable> {
    let mut t = ResultTable::new(&["partition", "k", "noncrossing", "v_exact", "v"]);
    for w in enumerate_partitions(p, k)? {
        let c = vandermonde_coefficient(&w, CoefficientMethod::ExtrapolatedCount)?;
        let label: String = w
            .blocks()
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        t.push(vec![label.into(), w.k().into(), is_noncrossing(&w).into(), c.value.to_string().into(), c.value_f64().into()]);
    }
    Ok(t)
}

fn moments(dist: &DistributionSpec, beta: f64, max_p: usize, n: usize, trials: usize, seed: u64) -> CliResult<ResultTable> {
    let law: PhaseLaw = dist.build()?;
    let d = law.dim();
    let analytic = moment_table(law.as_ref(), d, beta, max_p)?;
    let mut t = ResultTable::new(&["p", "M_analytic", "M_montecarlo", "rel_err"]);
    t.note("integrals", format!("{:?}", analytic.method));
    let mc = if trials > 0 {
        let m = columns_for(n, d, beta)?;
        t.note("n", n);
        t.note("m", m);
        t.note("realized_beta", row_count(n, d)? as f64 / m as f64);
        Some(empirical_moments(law.as_ref(), n, m, max_p, trials, seed)?)
    } else {
        None
    };
    for (i, exact) in analytic.moments.iter().enumerate() {
        let (mc_val, rel) = match &mc {
            Some(v) => (Cell::Num(v[i].0), Cell::Num((v[i].0 - exact).abs() / exact)),
            None => (Cell::Text(String::new()), Cell::Text(String::new())),
        };
        t.push(vec![(i + 1).into(), (*exact).into(), mc_val, rel]);
    }
    Ok(t)
}

fn spectrum(dist: &DistributionSpec, n: usize, beta: f64, trials: usize, bins: Binning, seed: u64) -> CliResult<ResultTable> {
    let law: PhaseLaw = dist.build()?;
    let m = columns_for(n, law.dim(), beta)?;
    let s = aesd(law.as_ref(), n, m, trials, seed, bins)?;
    let mut t = ResultTable::new(&["bin_left", "bin_right", "density"]);
    t.note("atom_zero_mass", s.atom_zero_mass);
    t.note("positive_mass", s.positive_mass);
    t.note("m", m);
    t.note("realized_beta", s.beta);
    let mut plot = Plot::new(format!("AESD, {}", law.id()), "eigenvalue", "density");
    let mut pts = Vec::new();
    for (w, h) in s.histogram.edges.windows(2).zip(&s.histogram.densities) {
        t.push(vec![w[0].into(), w[1].into(), (*h).into()]);
        pts.push((0.5 * (w[0] + w[1]), *h));
    }
    plot.line("AESD", pts, false);
    t.plot = Some(plot);
    Ok(t)
}

/// Loads the cached table when it matches `plan`, otherwise simulates it and
/// writes the cache.
pub fn eta_table(plan: &TablePlan, seed: u64, ctx: &Context) -> CliResult<EtaTable> {
    let betas = log_grid(plan.beta_lo, plan.beta_hi, plan.nodes)?;
    if let Some(path) = &ctx.eta_table {
        if path.exists() {
            let cached = EtaTable::load(path)?;
            let expected: Vec<usize> = {
                let mut c: Vec<usize> = betas.iter().map(|&b| columns_for(plan.n, plan.d, b)).collect::<Result<_, _>>()?;
                c.sort_unstable_by(|a, b| b.cmp(a));
                c.dedup();
                c
            };
            let same = cached.d == plan.d
                && cached.n == plan.n
                && cached.trials == plan.trials
                && cached.seed == seed
                && cached.columns == expected
                && cached.gammas == default_gamma_grid();
            if !same {
                return Err(usage(format!(
                    "eta table {} was built with other parameters (d={}, n={}, trials={}, seed={})",
                    path.display(),
                    cached.d,
                    cached.n,
                    cached.trials,
                    cached.seed
                )));
            }
            return Ok(cached);
        }
    }
    if ctx.verbose {
        eprintln!("building eta table: d={}, n={}, {} nodes x {} trials", plan.d, plan.n, plan.nodes, plan.trials);
    }
    let table = eta_u_table::<f64>(plan.d, &betas, &default_gamma_grid(), plan.n, plan.trials, seed)?;
    if let Some(path) = &ctx.eta_table {
        table.save(path)?;
    }
    Ok(table)
}

/// MSE over an aspect-ratio by SNR grid: Monte Carlo LMMSE, the trace formula,
/// and the asymptotic prediction for `law` and for uniform phases.
pub fn mse_sweep(
    law: &PhaseLaw,
    n: usize,
    betas: &[f64],
    gamma_db: &[f64],
    trials: usize,
    seed: u64,
    eta: &EtaTable,
) -> CliResult<ResultTable> {
    let d = law.dim();
    let rows = row_count(n, d)?;
    let gx = law.gx();
    let measure = law.support_measure();
    let eta_u = |b: f64, g: f64| eta.eval(b, g);
    let grid: Vec<(usize, usize)> = (0..betas.len()).flat_map(|i| (0..gamma_db.len()).map(move |j| (i, j))).collect();
    let cells: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&(i, j)| -> CliResult<Vec<Cell>> {
            let m = columns_for(n, d, betas[i])?;
            let realized = rows as f64 / m as f64;
            let g = db_to_linear(gamma_db[j]);
            let mc = mse_monte_carlo(law.as_ref(), n, d, m, g, trials, seed)?;
            let predicted = mse_asymptotic(&gx, measure, realized, g, &eta_u)?;
            let lossless = eta.eval(realized, g / realized)?;
            Ok(vec![
                betas[i].into(),
                gamma_db[j].into(),
                mc.mean_normalized_error.into(),
                mc.mean_trace_mse.into(),
                predicted.into(),
                lossless.into(),
                mc.stderr_normalized_error.into(),
                m.into(),
                mc.ill_conditioned.into(),
            ])
        })
        .collect::<CliResult<_>>()?;
    let mut t = ResultTable::new(&[
        "beta",
        "gamma_db",
        "mse_mc",
        "mse_trace",
        "mse_asymptotic",
        "mse_lossless",
        "stderr",
        "m",
        "ill_conditioned",
    ]);
    t.note("distribution", law.id());
    t.note("n", n);
    t.note("eta_table", format!("d={} n={} trials={} nodes={}", eta.d, eta.n, eta.trials, eta.betas.len()));
    for row in cells {
        t.push(row);
    }
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn csma(
    hierarchy: &HierarchyConfig,
    n: usize,
    betas: &[f64],
    gamma_db: &[f64],
    trials: usize,
    seed: u64,
    plan: &TablePlan,
    ctx: &Context,
) -> CliResult<ResultTable> {
    let profile = csma_success_profile(&hierarchy.build()?)?;
    let law: PhaseLaw = Arc::new(profile.density.clone());
    let eta = eta_table(plan, seed, ctx)?;
    let mut t = mse_sweep(&law, n, betas, gamma_db, trials, seed, &eta)?;
    let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
    t.note("success", list(&profile.success));
    t.note("normalized_success", list(&profile.normalized));
    t.plot = Some(plot_vs_beta(&t, "CSMA"));
    Ok(t)
}

/// Direct AESD on a covered fraction `c` against the uniform AESD at `cβ`
/// mapped through the scaling law.
pub fn holes(c: f64, d: usize, n: usize, beta: f64, trials: usize, bins: Binning, seed: u64) -> CliResult<ResultTable> {
    let hole = hole_distribution(c, d)?;
    let m = columns_for(n, d, beta)?;
    let direct = aesd(&hole, n, m, trials, seed, bins)?;
    let uniform = UniformPhases::new(d)?;
    let m_base = columns_for(n, d, c * beta)?;
    let base = aesd(&uniform, n, m_base, trials, derive_seed(seed, stream::POINTS, 1), bins)?;
    let mapped = transform_scaled_lsd(&base, c, direct.beta, bins)?;
    let ks = ks_distance(&direct.positive, &mapped.positive);

    let edges = common_edges(&direct, &mapped, bins);
    let a = bin_on(&edges, &direct);
    let b = bin_on(&edges, &mapped);
    let mut t = ResultTable::new(&["bin_left", "bin_right", "density_direct", "density_transformed"]);
    t.note("ks", ks);
    t.note("atom_direct", direct.atom_zero_mass);
    t.note("atom_transformed", mapped.atom_zero_mass);
    t.note("atom_expected", 1.0 - c);
    t.note("m_direct", m);
    t.note("m_base", m_base);
    let mut plot = Plot::new(format!("Hole c = {c}, beta = {beta}"), "eigenvalue", "density");
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    for (i, w) in edges.windows(2).enumerate() {
        t.push(vec![w[0].into(), w[1].into(), a[i].into(), b[i].into()]);
        let mid = 0.5 * (w[0] + w[1]);
        pa.push((mid, a[i]));
        pb.push((mid, b[i]));
    }
    plot.line("direct", pa, false);
    plot.line("transformed", pb, true);
    t.plot = Some(plot);
    Ok(t)
}

fn common_edges(a: &SpectrumSummary<f64>, b: &SpectrumSummary<f64>, bins: Binning) -> Vec<f64> {
    let lo = a.positive.first().copied().unwrap_or(0.0).min(b.positive.first().copied().unwrap_or(0.0));
    let hi = a.positive.last().copied().unwrap_or(1.0).max(b.positive.last().copied().unwrap_or(1.0));
    let count = match bins {
        Binning::Count(k) => k,
        Binning::Auto => freedman_diaconis(&a.positive),
    }
    .max(1);
    let mut e: Vec<f64> = (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect();
    e[count] = hi;
    e
}

/// Density of the positive part on `edges`, integrating to its mass.
fn bin_on(edges: &[f64], s: &SpectrumSummary<f64>) -> Vec<f64> {
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    let span = edges[bins] - edges[0];
    for &l in &s.positive {
        let i = if span > 0.0 { (((l - edges[0]) / span) * bins as f64) as usize } else { 0 };
        counts[i.min(bins - 1)] += 1;
    }
    let total = s.positive.len().max(1) as f64;
    counts
        .iter()
        .zip(edges.windows(2))
        .map(|(c, w)| if w[1] > w[0] { *c as f64 / total * s.positive_mass / (w[1] - w[0]) } else { 0.0 })
        .collect()
}

/// AESD positive part against `g_x` for fading, one block of rows per `β`.
pub fn dense(a_db: f64, n: usize, betas: &[f64], trials: usize, bins: Binning, seed: u64) -> CliResult<ResultTable> {
    let fading = fading_distribution(a_db)?;
    let law = fading.gx_law();
    let mut t = ResultTable::new(&["beta", "bin_left", "bin_right", "aesd_density", "gx_density"]);
    let mut plot = Plot::new(format!("Dense limit, a = {a_db} dB"), "eigenvalue", "density");
    let (lo, hi) = law.support();
    let ys: Vec<f64> = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
    for &beta in betas {
        let m = columns_for(n, 2, beta)?;
        let s = aesd(&fading, n, m, trials, seed, bins)?;
        let h = &s.histogram;
        let l1 = h.l1_to_law(|y| law.cdf(y));
        t.note(format!("l1[beta={beta}]"), l1);
        t.note(format!("atom[beta={beta}]"), s.atom_zero_mass);
        let total = h.total_mass();
        let mut pts = Vec::new();
        for (w, dens) in h.edges.windows(2).zip(&h.densities) {
            let g = (law.cdf(w[1]) - law.cdf(w[0])) / (w[1] - w[0]);
            t.push(vec![beta.into(), w[0].into(), w[1].into(), (dens / total).into(), g.into()]);
            pts.push((0.5 * (w[0] + w[1]), dens / total));
        }
        plot.line(format!("AESD beta = {beta}"), pts, false);
    }
    plot.line("g_x", ys.iter().map(|&y| (y, law.pdf(y))).collect(), true);
    t.plot = Some(plot);
    Ok(t)
}

fn gx_curves(a_db: &[f64], points: usize) -> CliResult<ResultTable> {
    let mut t = ResultTable::new(&["a_db", "y", "gx", "Gx"]);
    let mut plot = Plot::new("Density of the density, fading", "y", "g_x(y)");
    for &a in a_db {
        let law = fading_distribution(a)?.gx_law();
        let (lo, hi) = law.support();
        t.note(format!("b[a_db={a}]"), hi);
        let mut pts = Vec::with_capacity(points);
        for i in 0..points {
            let y = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let pdf = law.pdf(y);
            t.push(vec![a.into(), y.into(), pdf.into(), law.cdf(y).into()]);
            pts.push((y, pdf));
        }
        plot.line(format!("a = {a} dB"), pts, false);
    }
    t.plot = Some(plot);
    Ok(t)
}

/// One curve per aspect ratio against SNR in dB.
fn plot_vs_gamma(t: &ResultTable, title: &str, columns: &[&str]) -> Plot {
    let beta = t.values("beta");
    let gamma = t.values("gamma_db");
    let mut plot = Plot::new(title, "SNR (dB)", "MSE");
    let mut seen: Vec<f64> = Vec::new();
    for b in &beta {
        if !seen.contains(b) {
            seen.push(*b);
        }
    }
    for (ci, col) in columns.iter().enumerate() {
        let v = t.values(col);
        for b in &seen {
            let pts = (0..beta.len()).filter(|&i| beta[i] == *b).map(|i| (gamma[i], v[i])).collect();
            plot.line(format!("{col} beta={b}"), pts, ci > 0);
        }
    }
    plot
}

/// Lossless and lossy prediction against `β`, one pair of curves per SNR.
fn plot_vs_beta(t: &ResultTable, title: &str) -> Plot {
    let beta = t.values("beta");
    let gamma = t.values("gamma_db");
    let mut plot = Plot::new(title, "beta", "MSE");
    let mut seen: Vec<f64> = Vec::new();
    for g in &gamma {
        if !seen.contains(g) {
            seen.push(*g);
        }
    }
    for (col, dashed) in [("mse_lossless", true), ("mse_asymptotic", false)] {
        let v = t.values(col);
        for g in &seen {
            let pts = (0..beta.len()).filter(|&i| gamma[i] == *g).map(|i| (beta[i], v[i])).collect();
            plot.line(format!("{col} {g} dB"), pts, dashed);
        }
    }
    plot
}


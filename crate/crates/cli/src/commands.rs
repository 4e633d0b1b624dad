use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use scflab_core::diagnostics::{
    audit_density, scan_first_violations, AuditReport, AuditSummary, FirstViolation,
    NEVER_WITHIN_HORIZON,
};
use scflab_core::dynamics::{evolve_exponential_strided, support_block, uniform_steps, EvolutionTrace};
use scflab_core::fock::{fock_density, FockDim};
use scflab_core::oracle::{
    chi_closed_form, phi, positivity_violation_regime, wigner_closed_form, KernelParams, RegimeVerdict,
};
use scflab_core::phase_space::{wigner_function, PhaseGrid, PhaseSampler};

use crate::config::{ExperimentConfig, DEFAULT_SWEEP_T_END, DEFAULT_T_END};
use crate::error::CliError;
use crate::output::{ensure_dir, header, num, write_json, write_text, CsvWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Simulate,
    Audit,
    Sweep,
    Compare,
}

#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    command: CommandKind,
    version: &'static str,
    config: &'a ExperimentConfig,
    t_end: f64,
    dt_effective: f64,
    steps: usize,
    record_stride: usize,
    /// Ω = √(2g² − γ²/4) as [re, im] for the configured ratio.
    omega: [f64; 2],
    regime: Option<RegimeVerdict>,
    files: Vec<String>,
}

/// Files written by a command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// One-screen text for the terminal.
    pub message: String,
}

struct Timing {
    t_end: f64,
    dt: f64,
    steps: usize,
    stride: usize,
}

fn timing(config: &ExperimentConfig, t_end: f64) -> Result<Timing, CliError> {
    let (steps, dt) = uniform_steps(t_end, config.dt)?;
    let stride = ((config.record_every / dt).round() as usize).max(1);
    Ok(Timing { t_end, dt, steps, stride })
}

fn params(config: &ExperimentConfig) -> Result<KernelParams, CliError> {
    Ok(KernelParams::from_ratio(config.ratio)?)
}

fn regime(config: &ExperimentConfig, p: &KernelParams) -> Option<RegimeVerdict> {
    (config.initial_fock == 1).then(|| positivity_violation_regime(p, 1).expect("n = 1 supported"))
}

fn write_meta(
    out_dir: &Path,
    command: CommandKind,
    config: &ExperimentConfig,
    timing: &Timing,
    files: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let p = params(config)?;
    let meta = RunMeta {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        t_end: timing.t_end,
        dt_effective: timing.dt,
        steps: timing.steps,
        record_stride: timing.stride,
        omega: [p.omega.re, p.omega.im],
        regime: regime(config, &p),
        files: files
            .iter()
            .filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    write_json(out_dir.join("run_meta.json"), &meta)
}

fn evolve(config: &ExperimentConfig, timing: &Timing) -> Result<EvolutionTrace, CliError> {
    let dim = FockDim::new(config.n_cut)?;
    let rho0 = fock_density(config.initial_fock, dim)?;
    let kernel = params(config)?.kernel();
    Ok(evolve_exponential_strided(&rho0, &kernel, timing.t_end, config.dt, timing.stride)?)
}

/// Record indices nearest to `slices` evenly spaced times on [0, t_end].
fn slice_indices(trace: &EvolutionTrace, slices: usize, t_end: f64) -> Vec<usize> {
    let times = trace.times();
    (0..slices)
        .map(|k| {
            let target = if slices == 1 { 0.0 } else { t_end * k as f64 / (slices - 1) as f64 };
            (0..times.len())
                .min_by(|&a, &b| (times[a] - target).abs().total_cmp(&(times[b] - target).abs()))
                .expect("trace is never empty")
        })
        .collect()
}

/// trace.csv, chi_field.csv, wigner_field.csv and run_meta.json.
pub fn simulate(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    config.validate()?;
    ensure_dir(out_dir)?;
    let timing = timing(config, config.horizon(DEFAULT_T_END))?;
    let trace = evolve(config, &timing)?;
    let dim = trace.dim();
    let b = config.trace_block;
    let mut files = Vec::new();

    let mut cols = vec!["t".to_string()];
    for m in 0..b {
        for n in 0..b {
            cols.push(format!("rho_{m}_{n}_re"));
            cols.push(format!("rho_{m}_{n}_im"));
        }
    }
    cols.push("trace".into());
    cols.push("min_eig".into());
    let mut csv = CsvWriter::create(out_dir.join("trace.csv"), &cols)?;
    for (i, state) in trace.states().enumerate() {
        let mut row = vec![num(trace.times()[i])];
        for m in 0..b {
            for n in 0..b {
                let z = state.get(m, n);
                row.push(num(z.re));
                row.push(num(z.im));
            }
        }
        row.push(num(state.as_operator().trace().re));
        row.push(num(audit_density(&state, config.thresholds.eigen).min_eigenvalue));
        csv.row(&row)?;
    }
    files.push(csv.finish()?);

    let block = support_block(fock_density(config.initial_fock, dim)?.entries());
    let slices = slice_indices(&trace, config.slices, timing.t_end);

    let chi_grid = config.chi_grid().build()?;
    let sampler = PhaseSampler::new(&chi_grid, dim, block);
    let mut csv = CsvWriter::create(out_dir.join("chi_field.csv"), &header(&["t", "xi_sq", "re", "im", "abs"]))?;
    for &i in &slices {
        let values = sampler.chi_values(trace.state(i).entries());
        for (xi, v) in chi_grid.points().iter().zip(values) {
            csv.row(&[num(trace.times()[i]), num(xi.norm_sqr()), num(v.re), num(v.im), num(v.norm())])?;
        }
    }
    files.push(csv.finish()?);

    let w_grid = PhaseGrid::cartesian(config.grids.cart_extent, config.grids.cart_spacing)?;
    let sampler = PhaseSampler::new(&w_grid, dim, block);
    let mut csv =
        CsvWriter::create(out_dir.join("wigner_field.csv"), &header(&["t", "alpha_re", "alpha_im", "w"]))?;
    for &i in &slices {
        let values = sampler.wigner_values(trace.state(i).entries());
        for (a, w) in w_grid.points().iter().zip(values) {
            csv.row(&[num(trace.times()[i]), num(a.re), num(a.im), num(w)])?;
        }
    }
    files.push(csv.finish()?);

    let meta = write_meta(out_dir, CommandKind::Simulate, config, &timing, &files)?;
    files.push(meta);
    let message = format!(
        "simulated g/gamma = {} to t = {} ({} steps); wrote {} files to {}",
        config.ratio,
        timing.t_end,
        timing.steps,
        files.len(),
        out_dir.display()
    );
    Ok(Outcome { files, message })
}

fn describe(v: &FirstViolation) -> String {
    match v {
        FirstViolation::At { time, .. } => format!("broken at t = {time:.6}/gamma"),
        FirstViolation::Never => format!("not broken ({NEVER_WITHIN_HORIZON})"),
    }
}

/// The text summary written next to audit.json.
pub fn summary_text(report: &AuditReport) -> String {
    let s = &report.summary;
    let set = &report.settings;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "audit of g/gamma = {} from |{}>, t in [0, {}], dt = {}, n_cut = {}",
        report.params.ratio(),
        set.initial_fock,
        set.t_end,
        set.dt,
        set.n_cut
    );
    let _ = writeln!(
        out,
        "density positivity   : {} (min eigenvalue {:.6})",
        describe(&s.first_time_rho_negative),
        s.min_rho_eig
    );
    let _ = writeln!(
        out,
        "chi bounds           : {} (sup |chi| = {:.12})",
        describe(&s.first_time_chi_exceeds_1),
        s.max_sup_abs_chi
    );
    let _ = writeln!(
        out,
        "wigner bound 2/pi    : {} (max |W| = {:.6})",
        describe(&s.first_time_wigner_exceeds_bound),
        s.max_abs_wigner
    );
    match (&s.first_time_choi_negative, s.min_choi_eig) {
        (Some(v), Some(e)) => {
            let _ = writeln!(out, "complete positivity  : {} (min Choi eigenvalue {:.6})", describe(v), e);
        }
        _ => {
            let _ = writeln!(out, "complete positivity  : not audited");
        }
    }
    let _ = writeln!(
        out,
        "min rho_{0}{0}          : {1:.6} at t = {2:.4}",
        set.initial_fock, s.min_initial_population, s.time_of_min_population
    );
    if let Some(r) = &s.regime {
        let _ = writeln!(
            out,
            "closed-form regime   : {} ({}; g^2/gamma^2 - 1/8 = {:.6})",
            if r.violates { "violating" } else { "physical" },
            r.implemented_condition,
            r.margin
        );
    }
    let broken: Vec<&str> = [
        ("density positivity", &s.first_time_rho_negative),
        ("chi bounds", &s.first_time_chi_exceeds_1),
        ("wigner bound", &s.first_time_wigner_exceeds_bound),
    ]
    .into_iter()
    .chain(s.first_time_choi_negative.as_ref().map(|v| ("complete positivity", v)))
    .filter(|(_, v)| v.time().is_some())
    .map(|(name, _)| name)
    .collect();
    if broken.is_empty() {
        let _ = writeln!(out, "verdict              : no violations within horizon");
    } else {
        let _ = writeln!(out, "verdict              : broken criteria: {}", broken.join(", "));
    }
    out
}

/// audit.json, summary.txt and run_meta.json.
pub fn audit(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    config.validate()?;
    ensure_dir(out_dir)?;
    let timing = timing(config, config.horizon(DEFAULT_T_END))?;
    let report = scan_first_violations(&params(config)?, &config.scan_settings(timing.t_end, true))?;
    let summary = summary_text(&report);
    let mut files = vec![
        write_json(out_dir.join("audit.json"), &report)?,
        write_text(out_dir.join("summary.txt"), &summary)?,
    ];
    let meta = write_meta(out_dir, CommandKind::Audit, config, &timing, &files)?;
    files.push(meta);
    Ok(Outcome { files, message: summary })
}

fn time_cell(v: &FirstViolation) -> String {
    match v.time() {
        Some(t) => num(t),
        None => NEVER_WITHIN_HORIZON.to_string(),
    }
}

/// Columns of sweep.csv.
pub const SWEEP_HEADER: &[&str] = &[
    "ratio",
    "min_rho_nn",
    "min_rho_eig",
    "max_sup_abs_chi",
    "max_abs_wigner",
    "first_rho_negative",
    "first_chi_exceeds_1",
    "first_wigner_exceeds_bound",
];

pub fn sweep_row(ratio: f64, s: &AuditSummary) -> Vec<String> {
    vec![
        num(ratio),
        num(s.min_initial_population),
        num(s.min_rho_eig),
        num(s.max_sup_abs_chi),
        num(s.max_abs_wigner),
        time_cell(&s.first_time_rho_negative),
        time_cell(&s.first_time_chi_exceeds_1),
        time_cell(&s.first_time_wigner_exceeds_bound),
    ]
}

/// sweep.csv and run_meta.json. Points run in parallel without the Choi
/// audit; rows are written in input order.
pub fn sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    config.validate()?;
    ensure_dir(out_dir)?;
    let timing = timing(config, config.horizon(DEFAULT_SWEEP_T_END))?;
    let settings = config.scan_settings(timing.t_end, false);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| config.error_at("workers", e.to_string()))?;
    let results: Vec<Result<AuditSummary, CliError>> = pool.install(|| {
        config
            .ratios
            .par_iter()
            .map(|&r| {
                let p = KernelParams::from_ratio(r)?;
                Ok(scan_first_violations(&p, &settings)?.summary)
            })
            .collect()
    });
    let mut csv = CsvWriter::create(out_dir.join("sweep.csv"), &header(SWEEP_HEADER))?;
    let mut onset: Option<f64> = None;
    let mut chi_onset: Option<f64> = None;
    for (&r, result) in config.ratios.iter().zip(results) {
        let s = result?;
        if onset.is_none() && s.first_time_rho_negative.time().is_some() {
            onset = Some(r);
        }
        if chi_onset.is_none() && s.first_time_chi_exceeds_1.time().is_some() {
            chi_onset = Some(r);
        }
        csv.row(&sweep_row(r, &s))?;
    }
    let mut files = vec![csv.finish()?];
    let meta = write_meta(out_dir, CommandKind::Sweep, config, &timing, &files)?;
    files.push(meta);
    let fmt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |r| r.to_string());
    let message = format!(
        "swept {} ratios to t = {}; first negative density at g/gamma = {}; first |chi| > 1 at g/gamma = {}",
        config.ratios.len(),
        timing.t_end,
        fmt(onset),
        fmt(chi_onset)
    );
    Ok(Outcome { files, message })
}

/// compare.csv and run_meta.json; a deviation above the tolerance yields
/// [`CliError::Tolerance`] after the files are written.
pub fn compare(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    config.validate()?;
    if config.initial_fock != 1 {
        return Err(config
            .error_at("initial_fock", "compare needs initial_fock = 1 (closed form only for |1>)")
            .into());
    }
    ensure_dir(out_dir)?;
    let timing = timing(config, config.horizon(DEFAULT_T_END))?;
    let p = params(config)?;
    let trace = evolve(config, &timing)?;
    let dim = trace.dim();
    let chi_grid = config.chi_grid().build()?;
    let sampler = PhaseSampler::new(&chi_grid, dim, 2);
    let origin = Complex64::new(0.0, 0.0);

    let mut csv = CsvWriter::create(
        out_dir.join("compare.csv"),
        &header(&["t", "rho11_numeric", "rho11_oracle", "rho11_dev", "chi_dev", "wigner0_dev"]),
    )?;
    let mut worst: (f64, &str, f64) = (0.0, "rho11", 0.0);
    for (i, &t) in trace.times().iter().enumerate() {
        let state = trace.state(i);
        let numeric = trace.population(i, 1);
        let oracle = phi(t, &p);
        let rho_dev = (numeric - oracle).abs();
        let chi_dev = sampler
            .chi_values(state.entries())
            .iter()
            .zip(chi_grid.points())
            .map(|(v, &xi)| (v - chi_closed_form(xi, t, &p)).norm())
            .fold(0.0, f64::max);
        let w_dev = (wigner_function(&state, origin)? - wigner_closed_form(origin, t, &p)).abs();
        for (dev, name) in [(rho_dev, "rho11"), (chi_dev, "chi"), (w_dev, "wigner0")] {
            if dev > worst.0 {
                worst = (dev, name, t);
            }
        }
        csv.row(&[num(t), num(numeric), num(oracle), num(rho_dev), num(chi_dev), num(w_dev)])?;
    }
    let mut files = vec![csv.finish()?];
    let meta = write_meta(out_dir, CommandKind::Compare, config, &timing, &files)?;
    files.push(meta);
    if worst.0 > config.tolerance {
        return Err(CliError::Tolerance {
            quantity: worst.1.to_string(),
            deviation: worst.0,
            time: worst.2,
            tolerance: config.tolerance,
        });
    }
    let message = format!(
        "max deviation {:e} ({} at t = {}) within tolerance {:e}",
        worst.0, worst.1, worst.2, config.tolerance
    );
    Ok(Outcome { files, message })
}

pub fn run(command: CommandKind, config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    match command {
        CommandKind::Simulate => simulate(config, out_dir),
        CommandKind::Audit => audit(config, out_dir),
        CommandKind::Sweep => sweep(config, out_dir),
        CommandKind::Compare => compare(config, out_dir),
    }
}

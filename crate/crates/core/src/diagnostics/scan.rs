use ndarray::Array2;
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_2_PI;

use super::audit::{audit_block, chi_extremum, clamp_eigenvalue, wigner_extremum, EIGEN_ZERO_TOL};
use super::choi::block_spectrum_extremes;
use crate::dynamics::{uniform_steps, EmbeddingStepper, HERMITIAN_DRIFT_TOL, TRACE_DRIFT_TOL};
use crate::error::{Error, Result};
use crate::fock::{fock_density, FockDim, OperatorMatrix};
use crate::linalg::hermitian_part;
use crate::oracle::{positivity_violation_regime, KernelParams, RegimeVerdict};
use crate::phase_space::{PhaseGrid, PhaseSampler, RadialSpacing};

/// Sentinel written for criteria that never fail on the scanned horizon.
pub const NEVER_WITHIN_HORIZON: &str = "never within horizon";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGridSpec {
    pub extent: f64,
    pub count: usize,
    pub spacing: RadialSpacing,
}

impl RadialGridSpec {
    pub fn build(&self) -> Result<PhaseGrid> {
        PhaseGrid::radial(self.extent, self.count, self.spacing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Density and Choi eigenvalues below −eigen count as negative.
    pub eigen: f64,
    /// sup |χ| above 1 + chi counts as a bound violation.
    pub chi: f64,
    /// max |W| above 2/π + wigner counts as a bound violation.
    pub wigner: f64,
    /// Width to which first-violation times are bisected.
    pub refine: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { eigen: EIGEN_ZERO_TOL, chi: 1e-9, wigner: 1e-8, refine: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub t_end: f64,
    pub dt: f64,
    /// Spacing of audit records; rounded to a whole number of steps.
    pub record_every: f64,
    pub initial_fock: usize,
    pub n_cut: usize,
    pub chi_grid: RadialGridSpec,
    pub wigner_grid: RadialGridSpec,
    /// Truncation used for the Choi audit; `None` skips it.
    pub choi_n_cut: Option<usize>,
    pub thresholds: Thresholds,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            t_end: 10.0,
            dt: 1e-3,
            record_every: 1e-2,
            initial_fock: 1,
            n_cut: 40,
            chi_grid: RadialGridSpec { extent: 3.0, count: 200, spacing: RadialSpacing::Modulus },
            wigner_grid: RadialGridSpec { extent: 2.0, count: 101, spacing: RadialSpacing::Modulus },
            choi_n_cut: Some(8),
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    DensityNegative,
    ChiBound,
    WignerBound,
    ChoiNegative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirstViolation {
    /// `time` is the bisected onset, `grid_time` the first record that fails.
    At { time: f64, grid_time: f64 },
    Never,
}

impl FirstViolation {
    pub fn time(&self) -> Option<f64> {
        match self {
            FirstViolation::At { time, .. } => Some(*time),
            FirstViolation::Never => None,
        }
    }
}

impl Serialize for FirstViolation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FirstViolation::Never => serializer.serialize_str(NEVER_WITHIN_HORIZON),
            FirstViolation::At { time, grid_time } => {
                let mut s = serializer.serialize_struct("FirstViolation", 2)?;
                s.serialize_field("time", time)?;
                s.serialize_field("grid_time", grid_time)?;
                s.end()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    pub t: f64,
    pub trace_dev: f64,
    pub herm_dev: f64,
    pub min_rho_eig: f64,
    pub min_choi_eig: Option<f64>,
    pub sup_abs_chi: f64,
    pub max_abs_wigner: f64,
    /// Population of the initial Fock level.
    pub initial_population: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    pub first_time_rho_negative: FirstViolation,
    pub first_time_chi_exceeds_1: FirstViolation,
    pub first_time_wigner_exceeds_bound: FirstViolation,
    pub first_time_choi_negative: Option<FirstViolation>,
    pub min_rho_eig: f64,
    pub min_initial_population: f64,
    pub time_of_min_population: f64,
    pub max_sup_abs_chi: f64,
    pub max_abs_wigner: f64,
    pub min_choi_eig: Option<f64>,
    pub thresholds_used: Thresholds,
    /// Closed-form verdict, initial |1⟩ only.
    pub regime: Option<RegimeVerdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub params: KernelParams,
    pub settings: ScanSettings,
    pub records: Vec<AuditRecord>,
    pub summary: AuditSummary,
}

/// Main state plus the basis evolutions for the Choi audit, advanced together.
#[derive(Clone)]
struct Probe {
    main: EmbeddingStepper,
    basis: Vec<EmbeddingStepper>,
    choi_dim: usize,
}

impl Probe {
    fn step(&mut self, h: f64) {
        self.main.step(h);
        self.basis.iter_mut().for_each(|s| s.step(h));
    }

    fn advance_to(&mut self, t: f64, max_step: f64) {
        self.main.advance_to(t, max_step);
        self.basis.iter_mut().for_each(|s| s.advance_to(t, max_step));
    }

    fn choi_extremes(&self) -> Option<(f64, f64)> {
        if self.basis.is_empty() {
            return None;
        }
        let n = self.choi_dim;
        let mut c = Array2::zeros((n * n, n * n));
        for i in 0..n {
            for j in 0..n {
                let image = self.basis[i * n + j].rho_block();
                for a in 0..image.nrows() {
                    for b in 0..image.ncols() {
                        c[[i * n + a, j * n + b]] = image[[a, b]];
                    }
                }
            }
        }
        Some(block_spectrum_extremes(&hermitian_part(&c)))
    }
}

struct Scanner<'a> {
    settings: &'a ScanSettings,
    n_cut: usize,
    chi: PhaseSampler,
    wigner: PhaseSampler,
}

impl Scanner<'_> {
    fn record(&self, probe: &Probe) -> AuditRecord {
        let rho = probe.main.rho_block();
        let density = audit_block(rho, self.n_cut, self.settings.thresholds.eigen);
        let chi = self.chi.chi_values(rho);
        let w = self.wigner.wigner_values(rho);
        let k = self.settings.initial_fock;
        AuditRecord {
            t: probe.main.time(),
            trace_dev: density.trace_deviation,
            herm_dev: density.hermiticity_deviation,
            min_rho_eig: density.min_eigenvalue,
            min_choi_eig: probe
                .choi_extremes()
                .map(|(lo, _)| clamp_eigenvalue(lo, self.settings.thresholds.eigen)),
            sup_abs_chi: chi_extremum(self.chi.grid().points(), &chi).0,
            max_abs_wigner: wigner_extremum(self.wigner.grid().points(), &w).0,
            initial_population: probe.main.element(k, k).re,
        }
    }

    fn violated(&self, criterion: Criterion, record: &AuditRecord) -> bool {
        let th = &self.settings.thresholds;
        match criterion {
            Criterion::DensityNegative => record.min_rho_eig < -th.eigen,
            Criterion::ChiBound => record.sup_abs_chi > 1.0 + th.chi,
            Criterion::WignerBound => record.max_abs_wigner > FRAC_2_PI + th.wigner,
            Criterion::ChoiNegative => record.min_choi_eig.is_some_and(|v| v < -th.eigen),
        }
    }

    /// Bisects (lo, hi] for the onset, restarting from the state at `lo`.
    fn refine(&self, criterion: Criterion, start: &Probe, hi: f64, h: f64) -> f64 {
        let mut lo = start.main.time();
        let mut hi = hi;
        while hi - lo > self.settings.thresholds.refine {
            let mid = 0.5 * (lo + hi);
            let mut probe = start.clone();
            probe.advance_to(mid, h);
            if self.violated(criterion, &self.record(&probe)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn validate(settings: &ScanSettings) -> Result<()> {
    let th = &settings.thresholds;
    for (name, v) in [("eigen", th.eigen), ("chi", th.chi), ("wigner", th.wigner), ("refine", th.refine)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidSettings(format!("threshold {name} must be > 0, got {v}")));
        }
    }
    if !(settings.record_every.is_finite() && settings.record_every > 0.0) {
        return Err(Error::InvalidSettings(format!(
            "record spacing must be > 0, got {}",
            settings.record_every
        )));
    }
    Ok(())
}

/// Evolves initial |n⟩, audits every record and bisects the onset of each
/// criterion. Orderings between criteria are reported, not assumed.
pub fn scan_first_violations(params: &KernelParams, settings: &ScanSettings) -> Result<AuditReport> {
    validate(settings)?;
    let kernel = crate::dynamics::ExponentialKernel::new(params.g, params.gamma)?;
    let dim = FockDim::new(settings.n_cut)?;
    let (steps, h) = uniform_steps(settings.t_end, settings.dt)?;
    let stride = ((settings.record_every / h).round() as usize).max(1);
    let rho0 = fock_density(settings.initial_fock, dim)?;

    let main = EmbeddingStepper::new(rho0.as_operator(), kernel);
    let (choi_dim, basis) = match settings.choi_n_cut {
        Some(n) => {
            let cd = FockDim::new(n)?;
            let mut basis = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    basis.push(EmbeddingStepper::new(&OperatorMatrix::basis(cd, i, j)?, kernel));
                }
            }
            (n, basis)
        }
        None => (0, Vec::new()),
    };
    let scanner = Scanner {
        settings,
        n_cut: dim.n_cut(),
        chi: PhaseSampler::new(&settings.chi_grid.build()?, dim, main.block()),
        wigner: PhaseSampler::new(&settings.wigner_grid.build()?, dim, main.block()),
    };
    let mut probe = Probe { main, basis, choi_dim };

    let mut criteria = vec![Criterion::DensityNegative, Criterion::ChiBound, Criterion::WignerBound];
    if settings.choi_n_cut.is_some() {
        criteria.push(Criterion::ChoiNegative);
    }
    let mut first: Vec<FirstViolation> = vec![FirstViolation::Never; criteria.len()];
    let mut records = Vec::with_capacity(steps / stride + 2);
    let mut previous: Option<Probe> = None;

    for k in 0..=steps {
        if k > 0 {
            probe.step(h);
        }
        if k % stride != 0 && k != steps {
            continue;
        }
        let mut record = scanner.record(&probe);
        record.t = k as f64 * h;
        if record.herm_dev > HERMITIAN_DRIFT_TOL || record.trace_dev > TRACE_DRIFT_TOL {
            return Err(Error::Drift { hermiticity: record.herm_dev, trace: record.trace_dev, time: record.t });
        }
        for (c, slot) in criteria.iter().zip(first.iter_mut()) {
            if *slot != FirstViolation::Never || !scanner.violated(*c, &record) {
                continue;
            }
            let time = match &previous {
                Some(start) => scanner.refine(*c, start, record.t, h),
                None => record.t,
            };
            *slot = FirstViolation::At { time, grid_time: record.t };
        }
        records.push(record);
        previous = Some(probe.clone());
    }

    let min_rho_eig = records.iter().map(|r| r.min_rho_eig).fold(f64::INFINITY, f64::min);
    let (min_pop, t_min_pop) = records
        .iter()
        .map(|r| (r.initial_population, r.t))
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    let max_chi = records.iter().map(|r| r.sup_abs_chi).fold(f64::NEG_INFINITY, f64::max);
    let max_w = records.iter().map(|r| r.max_abs_wigner).fold(f64::NEG_INFINITY, f64::max);
    let min_choi = records.iter().filter_map(|r| r.min_choi_eig).reduce(f64::min);
    let regime = if settings.initial_fock == 1 { Some(positivity_violation_regime(params, 1)?) } else { None };

    Ok(AuditReport {
        params: *params,
        settings: settings.clone(),
        summary: AuditSummary {
            first_time_rho_negative: first[0],
            first_time_chi_exceeds_1: first[1],
            first_time_wigner_exceeds_bound: first[2],
            first_time_choi_negative: first.get(3).copied(),
            min_rho_eig,
            min_initial_population: min_pop,
            time_of_min_population: t_min_pop,
            max_sup_abs_chi: max_chi,
            max_abs_wigner: max_w,
            min_choi_eig: min_choi,
            thresholds_used: settings.thresholds,
            regime,
        },
        records,
    })
}

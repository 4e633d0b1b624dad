//! Time integration of dρ/dt = ∫₀ᵗ K(t−t') Lρ(t') dt'.
//!
//! Two routes:
//! * exponential kernels use the local embedding ρ' = σ, σ' = −γσ + g²Lρ,
//!   σ(0) = 0, advanced by classical RK4;
//! * any kernel can use direct Volterra integration: trapezoidal quadrature
//!   of the convolution inside a Heun predictor-corrector step.
//!
//! Both work on the leading block of the Fock space that holds the support of
//! the initial operator. L only moves weight from (m+1, n+1) to (m, n), so
//! that block is invariant and the reduction is exact.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{ExponentialKernel, MemoryKernel};
use super::liouvillian::apply_banded;
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockDim, OperatorMatrix};
use crate::linalg::hermiticity_deviation;

/// Hermiticity drift tolerated in recorded states.
pub const HERMITIAN_DRIFT_TOL: f64 = 1e-9;
/// Trace drift tolerated in recorded states.
pub const TRACE_DRIFT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// RK4 on the (ρ, σ) embedding of the exponential kernel.
    EmbeddingRk4,
    /// Trapezoidal convolution with Heun predictor-corrector steps.
    VolterraHeun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub method: Method,
    pub kernel: MemoryKernel,
    pub t_end: f64,
    pub requested_dt: f64,
    /// Step actually taken: t_end split into an integer number of steps.
    pub dt: f64,
    pub steps: usize,
    pub record_stride: usize,
    /// Ω = √(2g² − (γ/2)²) as (re, im), exponential kernels only.
    pub omega: Option<(f64, f64)>,
}

/// Splits [0, t_end] into uniform steps no longer than `dt`.
pub fn uniform_steps(t_end: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidSettings(format!("time step must be positive, got {dt}")));
    }
    if !t_end.is_finite() || t_end < dt * (1.0 - 1e-12) {
        return Err(Error::InvalidSettings(format!("t_end = {t_end} must be >= dt = {dt}")));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, t_end / steps as f64))
}

/// Smallest leading block containing every nonzero entry.
pub fn support_block(entries: &Array2<Complex64>) -> usize {
    let n = entries.nrows();
    let mut block = 1;
    for m in 0..n {
        for k in 0..n {
            if entries[[m, k]] != Complex64::new(0.0, 0.0) {
                block = block.max(m.max(k) + 1);
            }
        }
    }
    block
}

fn leading_block(entries: &Array2<Complex64>, block: usize) -> Array2<Complex64> {
    entries.slice(ndarray::s![..block, ..block]).to_owned()
}

fn embed(block: &Array2<Complex64>, dim: FockDim) -> OperatorMatrix {
    let n = dim.n_cut();
    let k = block.nrows();
    let mut full = Array2::zeros((n, n));
    full.slice_mut(ndarray::s![..k, ..k]).assign(block);
    OperatorMatrix::from_parts(dim, full)
}

fn trace_deviation(block: &Array2<Complex64>, expected: Complex64) -> f64 {
    (block.diag().iter().copied().sum::<Complex64>() - expected).norm()
}

/// Ω = √(2g² − (γ/2)²) as a complex number.
pub fn effective_frequency(kernel: &ExponentialKernel) -> Complex64 {
    Complex64::new(2.0 * kernel.g * kernel.g - 0.25 * kernel.gamma * kernel.gamma, 0.0).sqrt()
}

/// Incremental RK4 integrator for the exponential-kernel embedding.
#[derive(Debug, Clone)]
pub struct EmbeddingStepper {
    kernel: ExponentialKernel,
    dim: FockDim,
    time: f64,
    rho: Array2<Complex64>,
    sigma: Array2<Complex64>,
    scratch: Array2<Complex64>,
}

impl EmbeddingStepper {
    pub fn new(rho0: &OperatorMatrix, kernel: ExponentialKernel) -> Self {
        let block = support_block(rho0.entries());
        let rho = leading_block(rho0.entries(), block);
        Self::from_blocks(rho0.dim(), kernel, 0.0, rho, Array2::zeros((block, block)))
    }

    /// Resumes from a stored (ρ, σ) pair at `time`.
    pub fn resume(
        rho: &OperatorMatrix,
        sigma: &OperatorMatrix,
        time: f64,
        kernel: ExponentialKernel,
    ) -> Result<Self> {
        rho.check_dim(sigma.dim())?;
        let block = support_block(rho.entries()).max(support_block(sigma.entries()));
        Ok(Self::from_blocks(
            rho.dim(),
            kernel,
            time,
            leading_block(rho.entries(), block),
            leading_block(sigma.entries(), block),
        ))
    }

    fn from_blocks(
        dim: FockDim,
        kernel: ExponentialKernel,
        time: f64,
        rho: Array2<Complex64>,
        sigma: Array2<Complex64>,
    ) -> Self {
        let scratch = Array2::zeros(rho.raw_dim());
        EmbeddingStepper { kernel, dim, time, rho, sigma, scratch }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn block(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho_block(&self) -> &Array2<Complex64> {
        &self.rho
    }

    pub fn sigma_block(&self) -> &Array2<Complex64> {
        &self.sigma
    }

    pub fn state(&self) -> OperatorMatrix {
        embed(&self.rho, self.dim)
    }

    pub fn aux(&self) -> OperatorMatrix {
        embed(&self.sigma, self.dim)
    }

    /// ⟨m|ρ|n⟩, zero outside the active block.
    pub fn element(&self, m: usize, n: usize) -> Complex64 {
        if m < self.block() && n < self.block() {
            self.rho[[m, n]]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn derivative(
        &mut self,
        rho: &Array2<Complex64>,
        sigma: &Array2<Complex64>,
    ) -> (Array2<Complex64>, Array2<Complex64>) {
        let g2 = self.kernel.g * self.kernel.g;
        let gamma = self.kernel.gamma;
        apply_banded(rho, &mut self.scratch);
        let dsigma = ndarray::Zip::from(sigma)
            .and(&self.scratch)
            .map_collect(|s, l| *s * -gamma + *l * g2);
        (sigma.clone(), dsigma)
    }

    /// One classical RK4 step of length `h`.
    pub fn step(&mut self, h: f64) {
        let (r0, s0) = (self.rho.clone(), self.sigma.clone());
        let (k1r, k1s) = self.derivative(&r0, &s0);
        let r = &r0 + &k1r.mapv(|z| z * (0.5 * h));
        let s = &s0 + &k1s.mapv(|z| z * (0.5 * h));
        let (k2r, k2s) = self.derivative(&r, &s);
        let r = &r0 + &k2r.mapv(|z| z * (0.5 * h));
        let s = &s0 + &k2s.mapv(|z| z * (0.5 * h));
        let (k3r, k3s) = self.derivative(&r, &s);
        let r = &r0 + &k3r.mapv(|z| z * h);
        let s = &s0 + &k3s.mapv(|z| z * h);
        let (k4r, k4s) = self.derivative(&r, &s);
        let w = h / 6.0;
        ndarray::Zip::from(&mut self.rho)
            .and(&k1r)
            .and(&k2r)
            .and(&k3r)
            .and(&k4r)
            .for_each(|y, a, b, c, d| *y += (a + b * 2.0 + c * 2.0 + d) * w);
        ndarray::Zip::from(&mut self.sigma)
            .and(&k1s)
            .and(&k2s)
            .and(&k3s)
            .and(&k4s)
            .for_each(|y, a, b, c, d| *y += (a + b * 2.0 + c * 2.0 + d) * w);
        self.time += h;
    }

    /// Advances to `target` in uniform substeps no longer than `max_step`.
    pub fn advance_to(&mut self, target: f64, max_step: f64) {
        let span = target - self.time;
        if span <= 0.0 {
            return;
        }
        let n = (span / max_step - 1e-9).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let start = self.time;
        for k in 1..=n {
            self.step(h);
            self.time = start + h * k as f64;
        }
        self.time = target;
    }
}

/// Record of an integration run. States are stored on the active block and
/// embedded into the full truncation on access.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    dim: FockDim,
    times: Vec<f64>,
    states: Vec<Array2<Complex64>>,
    aux: Option<Vec<Array2<Complex64>>>,
    settings: IntegratorSettings,
    max_hermiticity_drift: f64,
    max_trace_drift: f64,
}

impl EvolutionTrace {
    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn settings(&self) -> &IntegratorSettings {
        &self.settings
    }

    pub fn max_hermiticity_drift(&self) -> f64 {
        self.max_hermiticity_drift
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.max_trace_drift
    }

    pub fn state(&self, index: usize) -> DensityMatrix {
        let op = embed(&self.states[index], self.dim);
        DensityMatrix::with_tolerance(op, HERMITIAN_DRIFT_TOL, TRACE_DRIFT_TOL)
            .expect("states validated during integration")
    }

    pub fn states(&self) -> impl Iterator<Item = DensityMatrix> + '_ {
        (0..self.len()).map(|i| self.state(i))
    }

    /// Auxiliary convolution operator σ, embedding integrator only.
    pub fn aux(&self, index: usize) -> Option<OperatorMatrix> {
        self.aux.as_ref().map(|a| embed(&a[index], self.dim))
    }

    pub fn element(&self, index: usize, m: usize, n: usize) -> Complex64 {
        let block = &self.states[index];
        if m < block.nrows() && n < block.nrows() {
            block[[m, n]]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn population(&self, index: usize, n: usize) -> f64 {
        self.element(index, n, n).re
    }
}

struct Recorder {
    stride: usize,
    steps: usize,
    dt: f64,
    expected_trace: Complex64,
    times: Vec<f64>,
    states: Vec<Array2<Complex64>>,
    aux: Option<Vec<Array2<Complex64>>>,
    herm: f64,
    trace: f64,
}

impl Recorder {
    fn new(stride: usize, steps: usize, dt: f64, expected_trace: Complex64, keep_aux: bool) -> Self {
        Recorder {
            stride,
            steps,
            dt,
            expected_trace,
            times: Vec::new(),
            states: Vec::new(),
            aux: keep_aux.then(Vec::new),
            herm: 0.0,
            trace: 0.0,
        }
    }

    fn check(&mut self, step: usize, rho: &Array2<Complex64>) -> Result<()> {
        let herm = hermiticity_deviation(rho);
        let trace = trace_deviation(rho, self.expected_trace);
        self.herm = self.herm.max(herm);
        self.trace = self.trace.max(trace);
        if herm > HERMITIAN_DRIFT_TOL || trace > TRACE_DRIFT_TOL {
            return Err(Error::Drift { hermiticity: herm, trace, time: step as f64 * self.dt });
        }
        Ok(())
    }

    fn offer(&mut self, step: usize, rho: &Array2<Complex64>, sigma: Option<&Array2<Complex64>>) {
        if step % self.stride == 0 || step == self.steps {
            self.times.push(step as f64 * self.dt);
            self.states.push(rho.clone());
            if let (Some(aux), Some(s)) = (self.aux.as_mut(), sigma) {
                aux.push(s.clone());
            }
        }
    }

    fn finish(self, dim: FockDim, settings: IntegratorSettings) -> EvolutionTrace {
        EvolutionTrace {
            dim,
            times: self.times,
            states: self.states,
            aux: self.aux,
            settings,
            max_hermiticity_drift: self.herm,
            max_trace_drift: self.trace,
        }
    }
}

fn validate_stride(stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::InvalidSettings("record stride must be >= 1".into()));
    }
    Ok(())
}

/// Embedding integration recording every step.
pub fn evolve_exponential(
    rho0: &DensityMatrix,
    kernel: &ExponentialKernel,
    t_end: f64,
    dt: f64,
) -> Result<EvolutionTrace> {
    evolve_exponential_strided(rho0, kernel, t_end, dt, 1)
}

/// Embedding integration recording every `stride`-th step (and the last).
pub fn evolve_exponential_strided(
    rho0: &DensityMatrix,
    kernel: &ExponentialKernel,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<EvolutionTrace> {
    let kernel = ExponentialKernel::new(kernel.g, kernel.gamma)?;
    validate_stride(stride)?;
    let (steps, h) = uniform_steps(t_end, dt)?;
    let mut stepper = EmbeddingStepper::new(rho0.as_operator(), kernel);
    let mut rec = Recorder::new(stride, steps, h, Complex64::new(1.0, 0.0), true);
    rec.offer(0, &stepper.rho, Some(&stepper.sigma));
    for k in 1..=steps {
        stepper.step(h);
        rec.check(k, &stepper.rho)?;
        rec.offer(k, &stepper.rho, Some(&stepper.sigma));
    }
    let omega = effective_frequency(&kernel);
    let settings = IntegratorSettings {
        method: Method::EmbeddingRk4,
        kernel: MemoryKernel::Exponential(kernel),
        t_end,
        requested_dt: dt,
        dt: h,
        steps,
        record_stride: stride,
        omega: Some((omega.re, omega.im)),
    };
    Ok(rec.finish(rho0.dim(), settings))
}

/// Image of an arbitrary operator (Hermitian or not) under the exponential
/// kernel dynamics at time `t`.
pub fn propagate_operator(
    op: &OperatorMatrix,
    kernel: &ExponentialKernel,
    t: f64,
    dt: f64,
) -> Result<OperatorMatrix> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidSettings(format!("time step must be positive, got {dt}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidSettings(format!("time must be >= 0, got {t}")));
    }
    let mut stepper = EmbeddingStepper::new(op, *kernel);
    stepper.advance_to(t, dt);
    Ok(stepper.state())
}

/// Direct Volterra integration for any kernel; O(steps²) work.
pub fn evolve_general(
    rho0: &DensityMatrix,
    kernel: &MemoryKernel,
    t_end: f64,
    dt: f64,
) -> Result<EvolutionTrace> {
    evolve_general_strided(rho0, kernel, t_end, dt, 1)
}

pub fn evolve_general_strided(
    rho0: &DensityMatrix,
    kernel: &MemoryKernel,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<EvolutionTrace> {
    kernel.validate()?;
    validate_stride(stride)?;
    let (steps, h) = uniform_steps(t_end, dt)?;
    let block = support_block(rho0.entries());
    let mut rho = leading_block(rho0.entries(), block);
    let mut rec = Recorder::new(stride, steps, h, Complex64::new(1.0, 0.0), false);
    rec.offer(0, &rho, None);

    let mut lrho = Array2::zeros((block, block));
    let mut scratch = Array2::zeros((block, block));

    match kernel {
        MemoryKernel::MarkovLimit { rate } => {
            for k in 1..=steps {
                apply_banded(&rho, &mut lrho);
                let predicted = &rho + &lrho.mapv(|z| z * (h * rate));
                apply_banded(&predicted, &mut scratch);
                rho = &rho + &(&lrho + &scratch).mapv(|z| z * (0.5 * h * rate));
                rec.check(k, &rho)?;
                rec.offer(k, &rho, None);
            }
        }
        MemoryKernel::Exponential(_) | MemoryKernel::Tabulated(_) => {
            let samples = kernel_samples(kernel, steps, h)?;
            // history of Lρ_j
            let mut history: Vec<Array2<Complex64>> = Vec::with_capacity(steps + 1);
            apply_banded(&rho, &mut lrho);
            history.push(lrho.clone());
            let mut force: Array2<Complex64> = Array2::zeros((block, block));
            let endpoint = 0.5 * h * samples[0];
            for n in 0..steps {
                // trapezoid over [0, t_{n+1}] without the t_{n+1} endpoint
                let mut conv = history[0].mapv(|z| z * (0.5 * h * samples[n + 1]));
                for (j, hist) in history.iter().enumerate().skip(1) {
                    let w = h * samples[n + 1 - j];
                    ndarray::Zip::from(&mut conv).and(hist).for_each(|c, x| *c += x * w);
                }
                let predicted = &rho + &force.mapv(|z| z * h);
                apply_banded(&predicted, &mut scratch);
                let predicted_force = &conv + &scratch.mapv(|z| z * endpoint);
                rho = &rho + &(&force + &predicted_force).mapv(|z| z * (0.5 * h));
                apply_banded(&rho, &mut lrho);
                force = &conv + &lrho.mapv(|z| z * endpoint);
                history.push(lrho.clone());
                rec.check(n + 1, &rho)?;
                rec.offer(n + 1, &rho, None);
            }
        }
    }

    let omega = match kernel {
        MemoryKernel::Exponential(k) => {
            let w = effective_frequency(k);
            Some((w.re, w.im))
        }
        _ => None,
    };
    let settings = IntegratorSettings {
        method: Method::VolterraHeun,
        kernel: kernel.clone(),
        t_end,
        requested_dt: dt,
        dt: h,
        steps,
        record_stride: stride,
        omega,
    };
    Ok(rec.finish(rho0.dim(), settings))
}

fn kernel_samples(kernel: &MemoryKernel, steps: usize, h: f64) -> Result<Vec<f64>> {
    match kernel {
        MemoryKernel::Exponential(k) => Ok((0..=steps).map(|j| k.value(j as f64 * h)).collect()),
        MemoryKernel::Tabulated(k) => {
            let needed = steps as f64 * h;
            if k.horizon() < needed * (1.0 - 1e-12) {
                return Err(Error::GridCoverage { covered: k.horizon(), needed });
            }
            (0..=steps).map(|j| k.value((j as f64 * h).min(k.horizon()))).collect()
        }
        MemoryKernel::MarkovLimit { .. } => unreachable!("handled separately"),
    }
}

//! Residual of the phase-space form of the master equation,
//! ∂χ/∂t = ∫₀ᵗ K(t−t') [−(ξ∂_ξ + ξ*∂_ξ*) − |ξ|²] χ(ξ, t') dt'.

use num_complex::Complex64;

use super::kernel::ExponentialKernel;
use crate::phase_space::ChiField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSettings {
    /// Central-difference step for ∂χ/∂t, in units of 1/γ.
    pub time_step: f64,
    /// Trapezoid nodes on [0, t] for the memory integral.
    pub nodes: usize,
}

impl Default for ResidualSettings {
    fn default() -> Self {
        ResidualSettings { time_step: 1e-4, nodes: 20_001 }
    }
}

/// |LHS − RHS| with default settings.
pub fn chi_equation_residual(
    chi: &impl ChiField,
    kernel: &ExponentialKernel,
    xi: Complex64,
    t: f64,
) -> f64 {
    chi_equation_residual_with(chi, kernel, xi, t, ResidualSettings::default())
}

pub fn chi_equation_residual_with(
    chi: &impl ChiField,
    kernel: &ExponentialKernel,
    xi: Complex64,
    t: f64,
    settings: ResidualSettings,
) -> f64 {
    let h = (settings.time_step / kernel.gamma).min(0.5 * t);
    let lhs = (chi.value(xi, t + h) - chi.value(xi, t - h)) / (2.0 * h);

    let nodes = settings.nodes.max(2);
    let dt = t / (nodes - 1) as f64;
    let s = xi.norm_sqr();
    let mut rhs = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let tp = k as f64 * dt;
        let w = if k == 0 || k + 1 == nodes { 0.5 * dt } else { dt };
        let generator = -chi.radial_derivative(xi, tp) - chi.value(xi, tp) * s;
        rhs += generator * (kernel.value(t - tp) * w);
    }
    (lhs - rhs).norm()
}

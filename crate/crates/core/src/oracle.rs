//! Closed-form solution for the exponential kernel with initial state |1⟩,
//! used as ground truth for the numerical paths.
//!
//! With φ(t) = ρ₁₁(t), the state stays diag(1 − φ, φ) and
//! φ'' + γφ' + 2g²φ = 0, φ(0) = 1, φ'(0) = 0, so
//! φ(t) = e^{−γt/2}(cos Ωt + (γ/2Ω) sin Ωt) with Ω² = 2g² − (γ/2)².
//! For Ω² < 0 the same expression continues to cosh/sinh.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_2_PI, PI};

use crate::dynamics::ExponentialKernel;
use crate::error::{Error, Result};
use crate::phase_space::ChiField;

/// Below this |Ωt| the population uses its Taylor expansion in (Ωt)².
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Margins within this of zero count as the critical boundary.
pub const REGIME_EDGE_TOL: f64 = 1e-12;

/// Human-readable form of the published regime condition, kept for reports.
pub const STATED_REGIME_CONDITION: &str = "n g^2/gamma >= 1/8";
/// The condition actually implemented for n = 1.
pub const IMPLEMENTED_REGIME_CONDITION: &str = "g^2/gamma^2 > 1/8 (Omega real and nonzero)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    pub g: f64,
    pub gamma: f64,
    /// Ω = √(2g² − (γ/2)²), principal complex root.
    pub omega: Complex64,
}

impl KernelParams {
    pub fn new(g: f64, gamma: f64) -> Result<Self> {
        let k = ExponentialKernel::new(g, gamma)?;
        let omega = crate::dynamics::effective_frequency(&k);
        Ok(KernelParams { g, gamma, omega })
    }

    /// γ = 1, g = ratio.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(ratio, 1.0)
    }

    pub fn ratio(&self) -> f64 {
        self.g / self.gamma
    }

    /// Ω² = 2g² − (γ/2)², real.
    pub fn omega_sq(&self) -> f64 {
        2.0 * self.g * self.g - 0.25 * self.gamma * self.gamma
    }

    /// Ω when it is real and positive.
    pub fn real_omega(&self) -> Option<f64> {
        let w2 = self.omega_sq();
        (w2 > 0.0).then(|| w2.sqrt())
    }

    pub fn kernel(&self) -> ExponentialKernel {
        ExponentialKernel { g: self.g, gamma: self.gamma }
    }
}

/// e^{−γt/2}·C(t) and e^{−γt/2}·S(t) with C = cos Ωt, S = sin(Ωt)/Ω,
/// continued analytically through Ω = 0.
fn damped_pair(t: f64, p: &KernelParams) -> (f64, f64) {
    let half = 0.5 * p.gamma;
    let w2 = p.omega_sq();
    let x2 = w2 * t * t;
    if x2.abs() < SERIES_THRESHOLD * SERIES_THRESHOLD {
        let decay = (-half * t).exp();
        let c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        let s = t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        (decay * c, decay * s)
    } else if w2 > 0.0 {
        let w = w2.sqrt();
        let decay = (-half * t).exp();
        (decay * (w * t).cos(), decay * (w * t).sin() / w)
    } else {
        let k = (-w2).sqrt();
        let slow = ((k - half) * t).exp();
        let fast = (-(k + half) * t).exp();
        (0.5 * (slow + fast), fast * (2.0 * k * t).exp_m1() / (2.0 * k))
    }
}

/// ρ₁₁(t) for initial |1⟩.
pub fn phi(t: f64, params: &KernelParams) -> f64 {
    let (c, s) = damped_pair(t, params);
    c + 0.5 * params.gamma * s
}

/// (φ, φ', φ'') by analytic differentiation.
pub fn phi_derivatives(t: f64, params: &KernelParams) -> (f64, f64, f64) {
    let (c, s) = damped_pair(t, params);
    let g2 = params.g * params.g;
    let half = 0.5 * params.gamma;
    (c + half * s, -2.0 * g2 * s, -2.0 * g2 * (c - half * s))
}

/// χ(ξ, t) = [1 − |ξ|² φ(t)] e^{−|ξ|²/2}.
pub fn chi_closed_form(xi: Complex64, t: f64, params: &KernelParams) -> Complex64 {
    let s = xi.norm_sqr();
    Complex64::new((1.0 - s * phi(t, params)) * (-0.5 * s).exp(), 0.0)
}

/// W(α, t) = (2/π) e^{−2|α|²} [1 + 2(2|α|² − 1) φ(t)].
pub fn wigner_closed_form(alpha: Complex64, t: f64, params: &KernelParams) -> f64 {
    let a2 = alpha.norm_sqr();
    FRAC_2_PI * (-2.0 * a2).exp() * (1.0 + 2.0 * (2.0 * a2 - 1.0) * phi(t, params))
}

/// Characteristic function of diag(1 − φ(t), φ(t)) for any population curve.
pub struct PopulationChi<F> {
    pub population: F,
}

impl<F: Fn(f64) -> f64> ChiField for PopulationChi<F> {
    fn value(&self, xi: Complex64, t: f64) -> Complex64 {
        let s = xi.norm_sqr();
        Complex64::new((1.0 - s * (self.population)(t)) * (-0.5 * s).exp(), 0.0)
    }

    /// r∂_r χ = 2s ∂_s χ.
    fn radial_derivative(&self, xi: Complex64, t: f64) -> Complex64 {
        let s = xi.norm_sqr();
        let p = (self.population)(t);
        Complex64::new(2.0 * s * (-p - 0.5 * (1.0 - s * p)) * (-0.5 * s).exp(), 0.0)
    }
}

/// The closed-form χ(ξ, t) as a [`ChiField`].
pub fn closed_form_field(params: KernelParams) -> PopulationChi<impl Fn(f64) -> f64> {
    PopulationChi { population: move |t| phi(t, &params) }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeVerdict {
    pub violates: bool,
    /// g²/γ² − 1/8.
    pub margin: f64,
    pub stated_condition: &'static str,
    pub implemented_condition: &'static str,
}

/// Whether the population of |1⟩ goes negative: true iff Ω is real and
/// nonzero. Only n = 1 has a closed form.
pub fn positivity_violation_regime(params: &KernelParams, n: usize) -> Result<RegimeVerdict> {
    if n != 1 {
        return Err(Error::Unsupported(format!(
            "violation regime only derived for initial |1>, got |{n}>"
        )));
    }
    let ratio2 = (params.g / params.gamma).powi(2);
    Ok(RegimeVerdict {
        violates: ratio2 - 0.125 > REGIME_EDGE_TOL,
        margin: ratio2 - 0.125,
        stated_condition: STATED_REGIME_CONDITION,
        implemented_condition: IMPLEMENTED_REGIME_CONDITION,
    })
}

/// g/γ above which |χ| > 1 somewhere: the first minimum
/// φ(π/Ω) = −e^{−γπ/(2Ω)} reaches −1/2 at Ω = γπ/(2 ln 2).
pub fn scf_bound_violation_threshold() -> f64 {
    let omega = PI / (2.0 * std::f64::consts::LN_2);
    ((omega * omega + 0.25).sqrt()) / std::f64::consts::SQRT_2
}

/// First zero of φ, at Ωt = π − arctan(2Ω/γ).
pub fn first_population_zero(params: &KernelParams) -> Option<f64> {
    let w = params.real_omega()?;
    Some((PI - (2.0 * w / params.gamma).atan()) / w)
}

/// First minimum (t = π/Ω, φ = −e^{−γπ/(2Ω)}).
pub fn first_population_minimum(params: &KernelParams) -> Option<(f64, f64)> {
    let w = params.real_omega()?;
    Some((PI / w, -(-params.gamma * PI / (2.0 * w)).exp()))
}

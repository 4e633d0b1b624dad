//! Ordered moments from derivatives of a characteristic function at the
//! origin: ⟨a†^m aⁿ⟩_p = (∂_ξ)^m (−∂_ξ*)ⁿ χ(ξ, p)|₀.
//!
//! The ordering of the result is the ordering of the sampled function: the
//! p = +1 function yields normally ordered moments, p = 0 symmetrized ones.

use num_complex::Complex64;
use serde::Serialize;

use super::characteristic::{characteristic_function, Ordering};
use crate::error::{Error, Result};
use crate::fock::DensityMatrix;

/// Default stencil spacing.
pub const STENCIL_SPACING: f64 = 1e-3;
/// Largest accepted Richardson error estimate.
pub const STENCIL_ERROR_LIMIT: f64 = 1e-3;

/// χ on the 5×5 stencil ξ = h(i + i·j), i, j ∈ {−2, …, 2}.
#[derive(Debug, Clone)]
pub struct OriginStencil {
    pub spacing: f64,
    pub ordering: Ordering,
    /// values[i + 2][j + 2] = χ(h·i + i·h·j)
    pub values: [[Complex64; 5]; 5],
}

impl OriginStencil {
    pub fn sample(spacing: f64, ordering: Ordering, chi: impl Fn(Complex64) -> Complex64) -> Self {
        let mut values = [[Complex64::new(0.0, 0.0); 5]; 5];
        for (a, row) in values.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                let xi = Complex64::new(spacing * (a as f64 - 2.0), spacing * (b as f64 - 2.0));
                *v = chi(xi);
            }
        }
        OriginStencil { spacing, ordering, values }
    }

    pub fn from_density(rho: &DensityMatrix, spacing: f64, ordering: Ordering) -> Self {
        Self::sample(spacing, ordering, |xi| characteristic_function(rho, xi, ordering).value)
    }

    fn at(&self, i: i32, j: i32) -> Complex64 {
        self.values[(i + 2) as usize][(j + 2) as usize]
    }
}

/// A moment and its Richardson error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moment {
    pub value: Complex64,
    pub error_estimate: f64,
    pub ordering: Ordering,
}

struct Partials {
    x: Complex64,
    y: Complex64,
    xx: Complex64,
    yy: Complex64,
    xy: Complex64,
}

// Fourth-order central differences (five-point), or second-order ones
// (three-point) when `coarse` is set.
fn partials(s: &OriginStencil, coarse: bool) -> Partials {
    let h = s.spacing;
    let d1 = |f: &dyn Fn(i32) -> Complex64| {
        if coarse {
            (f(1) - f(-1)) / (2.0 * h)
        } else {
            (-f(2) + f(1) * 8.0 - f(-1) * 8.0 + f(-2)) / (12.0 * h)
        }
    };
    let d2 = |f: &dyn Fn(i32) -> Complex64| {
        if coarse {
            (f(1) - f(0) * 2.0 + f(-1)) / (h * h)
        } else {
            (-f(2) + f(1) * 16.0 - f(0) * 30.0 + f(-1) * 16.0 - f(-2)) / (12.0 * h * h)
        }
    };
    let x = d1(&|i| s.at(i, 0));
    let y = d1(&|j| s.at(0, j));
    let xx = d2(&|i| s.at(i, 0));
    let yy = d2(&|j| s.at(0, j));
    // ∂x∂y as the x-difference of y-differences
    let xy = d1(&|i| d1(&|j| s.at(i, j)));
    Partials { x, y, xx, yy, xy }
}

fn combine(p: &Partials, m: u32, n: u32) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    // ∂_ξ = (∂x − i∂y)/2, ∂_ξ* = (∂x + i∂y)/2
    match (m, n) {
        (0, 0) => unreachable!(),
        (1, 0) => (p.x - i * p.y) * 0.5,
        (0, 1) => -(p.x + i * p.y) * 0.5,
        (1, 1) => -(p.xx + p.yy) * 0.25,
        (2, 0) => (p.xx - i * p.xy * 2.0 - p.yy) * 0.25,
        (0, 2) => (p.xx + i * p.xy * 2.0 - p.yy) * 0.25,
        _ => unreachable!(),
    }
}

/// ⟨a†^m aⁿ⟩ in the ordering of the stencil, for m + n ≤ 2.
pub fn moments_from_chi(stencil: &OriginStencil, m: u32, n: u32) -> Result<Moment> {
    if m + n > 2 {
        return Err(Error::Unsupported(format!("moments need m + n <= 2, got ({m}, {n})")));
    }
    if m + n == 0 {
        return Ok(Moment { value: stencil.at(0, 0), error_estimate: 0.0, ordering: stencil.ordering });
    }
    let fine = combine(&partials(stencil, false), m, n);
    let coarse = combine(&partials(stencil, true), m, n);
    // the second-order error dominates the difference
    let estimate = (fine - coarse).norm();
    if !(estimate <= STENCIL_ERROR_LIMIT) {
        return Err(Error::StencilTooCoarse { estimate });
    }
    Ok(Moment { value: fine, error_estimate: estimate, ordering: stencil.ordering })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_density, FockDim};

    fn dim() -> FockDim {
        FockDim::new(12).unwrap()
    }

    #[test]
    fn normally_ordered_number() {
        let rho = fock_density(1, dim()).unwrap();
        let s = OriginStencil::from_density(&rho, STENCIL_SPACING, Ordering::Normal);
        let m = moments_from_chi(&s, 1, 1).unwrap();
        assert!((m.value - 1.0).norm() < 1e-4);
        assert_eq!(m.ordering, Ordering::Normal);
    }

    #[test]
    fn symmetric_number_is_shifted_by_half() {
        let rho = fock_density(1, dim()).unwrap();
        let s = OriginStencil::from_density(&rho, STENCIL_SPACING, Ordering::Symmetric);
        let m = moments_from_chi(&s, 1, 1).unwrap();
        assert!((m.value - 1.5).norm() < 1e-4);
    }

    #[test]
    fn zeroth_moment_is_one() {
        let rho = DensityMatrix::diagonal(dim(), &[0.2, 0.3, 0.5]).unwrap();
        let s = OriginStencil::from_density(&rho, STENCIL_SPACING, Ordering::Symmetric);
        assert!((moments_from_chi(&s, 0, 0).unwrap().value - 1.0).norm() < 1e-14);
    }

    #[test]
    fn coherent_amplitude_moments() {
        // normally ordered χ of a coherent state |β⟩: exp(ξβ* − ξ*β)
        let beta = Complex64::new(0.6, -0.3);
        let s = OriginStencil::sample(STENCIL_SPACING, Ordering::Normal, |xi| {
            (xi * beta.conj() - xi.conj() * beta).exp()
        });
        let a = moments_from_chi(&s, 0, 1).unwrap().value;
        let ad = moments_from_chi(&s, 1, 0).unwrap().value;
        let a2 = moments_from_chi(&s, 0, 2).unwrap().value;
        let ad2 = moments_from_chi(&s, 2, 0).unwrap().value;
        let n = moments_from_chi(&s, 1, 1).unwrap().value;
        assert!((a - beta).norm() < 1e-8);
        assert!((ad - beta.conj()).norm() < 1e-8);
        assert!((a2 - beta * beta).norm() < 1e-6);
        assert!((ad2 - beta.conj() * beta.conj()).norm() < 1e-6);
        assert!((n - beta.norm_sqr()).norm() < 1e-6);
    }

    #[test]
    fn rejects_high_orders_and_coarse_stencils() {
        let rho = fock_density(1, dim()).unwrap();
        let s = OriginStencil::from_density(&rho, STENCIL_SPACING, Ordering::Normal);
        assert!(moments_from_chi(&s, 2, 1).is_err());
        let coarse = OriginStencil::from_density(&rho, 0.3, Ordering::Symmetric);
        assert!(matches!(moments_from_chi(&coarse, 1, 1), Err(Error::StencilTooCoarse { .. })));
    }
}

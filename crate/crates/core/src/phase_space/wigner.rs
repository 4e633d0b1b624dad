use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};

use super::characteristic::{trace_product, CharacteristicField, Ordering};
use super::grid::PhaseGrid;
use crate::error::{Error, Result};
use crate::fock::{displacement_matrix, DensityMatrix, FockDim};

/// Largest imaginary residue accepted from the parity series.
pub const WIGNER_IMAG_TOL: f64 = 1e-10;
/// Minimum half-width of cartesian grids used in transforms.
pub const TRANSFORM_MIN_EXTENT: f64 = 5.0;
/// Maximum spacing of cartesian grids used in transforms.
pub const TRANSFORM_MAX_SPACING: f64 = 0.1;

/// |α|² above which the parity series is not trusted.
pub fn wigner_guard(dim: FockDim) -> f64 {
    dim.n_cut() as f64 / 8.0
}

/// W(α) = (2/π) Σ_n (−1)ⁿ ⟨n|D(α)† ρ D(α)|n⟩.
pub fn wigner_function(rho: &DensityMatrix, alpha: Complex64) -> Result<f64> {
    let limit = wigner_guard(rho.dim());
    if alpha.norm_sqr() > limit {
        return Err(Error::TruncationGuard { modulus_sq: alpha.norm_sqr(), limit });
    }
    let d = displacement_matrix(alpha, rho.dim()).value;
    let n = rho.dim().n_cut();
    // D Π D†
    let parity = ndarray::Array2::from_shape_fn((n, n), |(j, k)| {
        (0..n)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                d.get(j, m) * d.get(k, m).conj() * sign
            })
            .sum::<Complex64>()
    });
    let w = trace_product(rho.entries(), &parity) * FRAC_2_PI;
    if w.im.abs() > WIGNER_IMAG_TOL {
        return Err(Error::ImaginaryResidue(w.im.abs()));
    }
    Ok(w.re)
}

/// W on every point of a grid.
pub fn wigner_field(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<Vec<f64>> {
    grid.points().iter().map(|&a| wigner_function(rho, a)).collect()
}

/// W(α) = (1/π²) ∫ d²ξ χ(ξ) e^{αξ* − α*ξ} by trapezoidal quadrature of a
/// symmetric characteristic function on a cartesian grid.
pub fn wigner_via_transform(chi: &CharacteristicField, alpha: Complex64) -> Result<f64> {
    if chi.ordering != Ordering::Symmetric {
        return Err(Error::Unsupported("Wigner transform needs the symmetric ordering".into()));
    }
    chi.grid.require_transform_quality(TRANSFORM_MIN_EXTENT, TRANSFORM_MAX_SPACING)?;
    let weights = chi.grid.area_weights().expect("cartesian grid checked");
    let mut total = Complex64::new(0.0, 0.0);
    for ((xi, value), w) in chi.grid.points().iter().zip(&chi.values).zip(weights) {
        let phase = alpha * xi.conj() - alpha.conj() * xi;
        total += value * phase.exp() * w;
    }
    Ok(total.re / (PI * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fock_density;

    fn dim(n: usize) -> FockDim {
        FockDim::new(n).unwrap()
    }

    #[test]
    fn vacuum_peak() {
        let w = wigner_function(&fock_density(0, dim(20)).unwrap(), Complex64::new(0.0, 0.0)).unwrap();
        assert!((w - 0.6366198).abs() < 1e-7);
    }

    #[test]
    fn single_photon_origin() {
        let w = wigner_function(&fock_density(1, dim(20)).unwrap(), Complex64::new(0.0, 0.0)).unwrap();
        assert!((w + FRAC_2_PI).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_state_exceeds_bound() {
        let rho = DensityMatrix::diagonal(dim(20), &[1.3, -0.3]).unwrap();
        let w = wigner_function(&rho, Complex64::new(0.0, 0.0)).unwrap();
        assert!((w - FRAC_2_PI * 1.6).abs() < 1e-13);
        assert!((w - 1.0186).abs() < 1e-4);
        assert!(w > FRAC_2_PI);
    }

    #[test]
    fn coherent_state_gaussian() {
        // vacuum displaced: W(α) = (2/π) e^{−2|α|²}
        let rho = fock_density(0, dim(30)).unwrap();
        for a in [0.3, 0.9, 1.7] {
            let alpha = Complex64::from_polar(a, 1.0);
            let w = wigner_function(&rho, alpha).unwrap();
            assert!((w - FRAC_2_PI * (-2.0 * a * a).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn guard_rejects_far_points() {
        let rho = fock_density(0, dim(8)).unwrap();
        assert!(wigner_function(&rho, Complex64::new(1.0, 0.0)).is_ok());
        assert!(matches!(
            wigner_function(&rho, Complex64::new(1.01, 0.0)),
            Err(Error::TruncationGuard { .. })
        ));
    }

    #[test]
    fn transform_of_vacuum_gaussian() {
        let grid = PhaseGrid::cartesian(5.0, 0.1).unwrap();
        let chi = CharacteristicField::from_fn(&grid, Ordering::Symmetric, 0.0, |xi| {
            Complex64::new((-0.5 * xi.norm_sqr()).exp(), 0.0)
        });
        let w = wigner_via_transform(&chi, Complex64::new(0.0, 0.0)).unwrap();
        assert!((w - FRAC_2_PI).abs() < 2e-3);
    }

    #[test]
    fn transform_is_linear() {
        let grid = PhaseGrid::cartesian(5.0, 0.1).unwrap();
        let a = CharacteristicField::from_fn(&grid, Ordering::Symmetric, 0.0, |xi| {
            Complex64::new((-0.5 * xi.norm_sqr()).exp(), 0.0)
        });
        let b = CharacteristicField::from_fn(&grid, Ordering::Symmetric, 0.0, |xi| {
            let s = xi.norm_sqr();
            Complex64::new((1.0 - s) * (-0.5 * s).exp(), 0.0)
        });
        let mut avg = a.clone();
        for (v, w) in avg.values.iter_mut().zip(&b.values) {
            *v = (*v + w) * 0.5;
        }
        let alpha = Complex64::new(0.4, -0.7);
        let lhs = wigner_via_transform(&avg, alpha).unwrap();
        let rhs = 0.5 * (wigner_via_transform(&a, alpha).unwrap() + wigner_via_transform(&b, alpha).unwrap());
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn transform_rejects_coarse_or_misordered_fields() {
        let coarse = PhaseGrid::cartesian(5.0, 0.25).unwrap();
        let chi = CharacteristicField::from_fn(&coarse, Ordering::Symmetric, 0.0, |_| Complex64::new(0.0, 0.0));
        assert!(matches!(wigner_via_transform(&chi, Complex64::new(0.0, 0.0)), Err(Error::InsufficientGrid(_))));
        let grid = PhaseGrid::cartesian(5.0, 0.1).unwrap();
        let chi = CharacteristicField::from_fn(&grid, Ordering::Normal, 0.0, |_| Complex64::new(0.0, 0.0));
        assert!(wigner_via_transform(&chi, Complex64::new(0.0, 0.0)).is_err());
    }
}

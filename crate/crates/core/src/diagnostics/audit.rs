use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_2_PI;

use crate::dynamics::support_block;
use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::linalg::{hermitian_eigen, hermiticity_deviation};
use crate::phase_space::{CharacteristicField, PhaseGrid};

/// Eigenvalues in (−tol, 0) are reported as zero.
pub const EIGEN_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct DensityAudit {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    /// Smallest eigenvalue after clamping (−tol, 0) to zero.
    pub min_eigenvalue: f64,
    pub raw_min_eigenvalue: f64,
    /// Eigenvector of the smallest eigenvalue, in the Fock basis.
    pub min_eigenvector: Vec<Complex64>,
}

pub(crate) fn clamp_eigenvalue(value: f64, tol: f64) -> f64 {
    if value < 0.0 && value > -tol {
        0.0
    } else {
        value
    }
}

/// Audit of a matrix whose support lies in a leading block of an
/// `n_cut`-dimensional space; the complement contributes zero eigenvalues.
pub(crate) fn audit_block(block: &Array2<Complex64>, n_cut: usize, tol: f64) -> DensityAudit {
    let k = block.nrows();
    let trace: Complex64 = block.diag().iter().copied().sum();
    let eig = hermitian_eigen(block);
    let mut raw = eig.min_value();
    let mut vector: Vec<Complex64> = (0..n_cut)
        .map(|m| if m < k { eig.vectors[[m, 0]] } else { Complex64::new(0.0, 0.0) })
        .collect();
    if k < n_cut && raw > 0.0 {
        raw = 0.0;
        vector = (0..n_cut)
            .map(|m| Complex64::new(if m == k { 1.0 } else { 0.0 }, 0.0))
            .collect();
    }
    DensityAudit {
        trace_deviation: (trace - 1.0).norm(),
        hermiticity_deviation: hermiticity_deviation(block),
        min_eigenvalue: clamp_eigenvalue(raw, tol),
        raw_min_eigenvalue: raw,
        min_eigenvector: vector,
    }
}

/// Trace, hermiticity and spectrum of a density matrix. A negative
/// eigenvalue is reported, not rejected.
pub fn audit_density(rho: &DensityMatrix, tol: f64) -> DensityAudit {
    let entries = rho.entries();
    let block = support_block(entries);
    let sub = entries.slice(ndarray::s![..block, ..block]).to_owned();
    audit_block(&sub, rho.dim().n_cut(), tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiAudit {
    /// |χ(0) − 1|.
    pub origin_deviation: f64,
    pub sup_abs: f64,
    /// sup |χ| − 1.
    pub sup_excess: f64,
    pub argmax: Complex64,
}

pub(crate) fn chi_extremum(points: &[Complex64], values: &[Complex64]) -> (f64, Complex64) {
    points
        .iter()
        .zip(values)
        .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), |best, (&z, v)| {
            if v.norm() > best.0 {
                (v.norm(), z)
            } else {
                best
            }
        })
}

pub fn audit_chi_field(field: &CharacteristicField) -> Result<ChiAudit> {
    let origin = field
        .value_at_origin()
        .ok_or_else(|| Error::InsufficientGrid("characteristic field must include the origin".into()))?;
    let (sup_abs, argmax) = chi_extremum(field.grid.points(), &field.values);
    Ok(ChiAudit {
        origin_deviation: (origin - 1.0).norm(),
        sup_abs,
        sup_excess: sup_abs - 1.0,
        argmax,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WignerAudit {
    pub max_abs: f64,
    /// max |W| − 2/π.
    pub excess: f64,
    pub argmax: Complex64,
}

pub(crate) fn wigner_extremum(points: &[Complex64], values: &[f64]) -> (f64, Complex64) {
    points
        .iter()
        .zip(values)
        .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), |best, (&z, v)| {
            if v.abs() > best.0 {
                (v.abs(), z)
            } else {
                best
            }
        })
}

pub fn audit_wigner_field(grid: &PhaseGrid, values: &[f64]) -> Result<WignerAudit> {
    if values.len() != grid.len() {
        return Err(Error::DimMismatch { expected: grid.len(), found: values.len() });
    }
    let (max_abs, argmax) = wigner_extremum(grid.points(), values);
    Ok(WignerAudit { max_abs, excess: max_abs - FRAC_2_PI, argmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_density, FockDim, OperatorMatrix};
    use crate::oracle::{chi_closed_form, first_population_minimum, phi, KernelParams};
    use crate::phase_space::{wigner_field, Ordering, RadialSpacing};

    fn dim() -> FockDim {
        FockDim::new(10).unwrap()
    }

    #[test]
    fn fock_state_is_positive() {
        let a = audit_density(&fock_density(1, dim()).unwrap(), EIGEN_ZERO_TOL);
        assert_eq!(a.min_eigenvalue, 0.0);
        assert_eq!(a.trace_deviation, 0.0);
        assert_eq!(a.hermiticity_deviation, 0.0);
    }

    #[test]
    fn negative_population_is_found() {
        let p = KernelParams::from_ratio(1.0).unwrap();
        let (t, _) = first_population_minimum(&p).unwrap();
        let f = phi(t, &p);
        let rho = DensityMatrix::diagonal(dim(), &[1.0 - f, f]).unwrap();
        let a = audit_density(&rho, EIGEN_ZERO_TOL);
        assert!((a.min_eigenvalue + (-std::f64::consts::PI / 7f64.sqrt()).exp()).abs() < 1e-12);
        assert!((a.min_eigenvector[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_negative_eigenvalues_are_clamped() {
        let rho = DensityMatrix::diagonal(dim(), &[1.0 + 1e-9, -1e-9]).unwrap();
        let a = audit_density(&rho, EIGEN_ZERO_TOL);
        assert_eq!(a.min_eigenvalue, 0.0);
        assert!(a.raw_min_eigenvalue < 0.0);
    }

    #[test]
    fn off_diagonal_state_spectrum() {
        // (|0⟩ + |1⟩)/√2 has eigenvalues {0, 1}; with extra coherence it goes negative
        let mut e = Array2::zeros((10, 10));
        e[[0, 0]] = Complex64::new(0.5, 0.0);
        e[[1, 1]] = Complex64::new(0.5, 0.0);
        e[[0, 1]] = Complex64::new(0.0, 0.7);
        e[[1, 0]] = Complex64::new(0.0, -0.7);
        let rho = DensityMatrix::new(OperatorMatrix::from_array(e).unwrap()).unwrap();
        let a = audit_density(&rho, EIGEN_ZERO_TOL);
        assert!((a.min_eigenvalue + 0.2).abs() < 1e-12);
    }

    #[test]
    fn vacuum_chi_peaks_at_origin() {
        let grid = PhaseGrid::radial(3.0, 50, RadialSpacing::Modulus).unwrap();
        let rho = fock_density(0, dim()).unwrap();
        let field = CharacteristicField::from_density(&rho, &grid, Ordering::Symmetric, 0.0);
        let a = audit_chi_field(&field).unwrap();
        assert_eq!(a.sup_abs, 1.0);
        assert_eq!(a.argmax, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn strong_coupling_chi_exceeds_one() {
        let p = KernelParams::from_ratio(3.0).unwrap();
        let (t, _) = first_population_minimum(&p).unwrap();
        let grid = PhaseGrid::radial(3.0, 200, RadialSpacing::Modulus).unwrap();
        let field = CharacteristicField::from_fn(&grid, Ordering::Symmetric, t, |xi| chi_closed_form(xi, t, &p));
        let a = audit_chi_field(&field).unwrap();
        assert!(a.sup_excess > 0.0);
        assert!(a.argmax.norm_sqr() < 1.0);
    }

    #[test]
    fn chi_audit_needs_origin() {
        let grid = PhaseGrid::cartesian(1.05, 0.7).unwrap();
        let field = CharacteristicField::from_fn(&grid, Ordering::Symmetric, 0.0, |_| Complex64::new(1.0, 0.0));
        assert!(audit_chi_field(&field).is_err());
    }

    #[test]
    fn wigner_bound_cases() {
        let dim = || FockDim::new(40).unwrap();
        let grid = PhaseGrid::radial(2.0, 41, RadialSpacing::Modulus).unwrap();
        let vacuum = wigner_field(&fock_density(0, dim()).unwrap(), &grid).unwrap();
        let a = audit_wigner_field(&grid, &vacuum).unwrap();
        assert!(a.excess.abs() < 1e-12);
        assert_eq!(a.argmax, Complex64::new(0.0, 0.0));

        let p = KernelParams::from_ratio(1.0).unwrap();
        let (_, f) = first_population_minimum(&p).unwrap();
        let rho = DensityMatrix::diagonal(dim(), &[1.0 - f, f]).unwrap();
        let a = audit_wigner_field(&grid, &wigner_field(&rho, &grid).unwrap()).unwrap();
        assert!((a.max_abs - FRAC_2_PI * (1.0 - 2.0 * f)).abs() < 1e-10);
        assert!((a.max_abs - 1.0253).abs() < 5e-4);
        assert!(audit_wigner_field(&grid, &vacuum[1..]).is_err());
    }
}

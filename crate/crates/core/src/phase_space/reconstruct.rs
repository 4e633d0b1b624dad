use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::characteristic::{CharacteristicField, Ordering};
use super::wigner::{TRANSFORM_MAX_SPACING, TRANSFORM_MIN_EXTENT};
use crate::error::{Error, Result};
use crate::fock::{displacement_matrix, DensityMatrix, FockDim, OperatorMatrix};
use crate::linalg::hermitian_part;

/// Raw-trace deviation above which a reconstruction is flagged.
pub const RECONSTRUCTION_TRACE_FLAG: f64 = 1e-3;

/// Density matrix recovered from a sampled characteristic function.
#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    #[serde(skip)]
    pub density: DensityMatrix,
    /// Trace of the Hermitian-symmetrized quadrature result before
    /// normalization.
    pub raw_trace: f64,
    pub trace_deviation: f64,
    pub flagged: bool,
}

/// ρ_mn = (1/π) ∫ d²ξ χ(ξ) ⟨m|D(−ξ)|n⟩, from Tr[D(ξ)D(−ξ')] = π δ²(ξ − ξ').
///
/// The quadrature result is symmetrized and rescaled to unit trace; the
/// pre-normalization trace is reported.
pub fn reconstruct_density(chi: &CharacteristicField, dim: FockDim) -> Result<Reconstruction> {
    if chi.ordering != Ordering::Symmetric {
        return Err(Error::Unsupported("reconstruction needs the symmetric ordering".into()));
    }
    chi.grid.require_transform_quality(TRANSFORM_MIN_EXTENT, TRANSFORM_MAX_SPACING)?;
    let weights = chi.grid.area_weights().expect("cartesian grid checked");
    let n = dim.n_cut();
    let mut acc: Array2<Complex64> = Array2::zeros((n, n));
    for ((xi, value), w) in chi.grid.points().iter().zip(&chi.values).zip(weights) {
        if value.norm() == 0.0 {
            continue;
        }
        let d = displacement_matrix(-xi, dim).value;
        let scale = value * (w / PI);
        ndarray::Zip::from(&mut acc).and(d.entries()).for_each(|a, x| *a += x * scale);
    }
    let sym = hermitian_part(&acc);
    let raw_trace: f64 = sym.diag().iter().map(|z| z.re).sum();
    if !(raw_trace.is_finite() && raw_trace.abs() > 1e-12) {
        return Err(Error::TraceDeviation { deviation: (raw_trace - 1.0).abs(), tolerance: RECONSTRUCTION_TRACE_FLAG });
    }
    let trace_deviation = (raw_trace - 1.0).abs();
    let normalized = sym.mapv(|z| z / raw_trace);
    let density = DensityMatrix::new(OperatorMatrix::from_array(normalized)?)?;
    Ok(Reconstruction {
        density,
        raw_trace,
        trace_deviation,
        flagged: trace_deviation > RECONSTRUCTION_TRACE_FLAG,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fock_density;
    use crate::phase_space::grid::PhaseGrid;

    #[test]
    fn vacuum_round_trip() {
        let dim = FockDim::new(12).unwrap();
        let grid = PhaseGrid::cartesian(5.0, 0.1).unwrap();
        let chi = CharacteristicField::from_fn(&grid, Ordering::Symmetric, 0.0, |xi| {
            Complex64::new((-0.5 * xi.norm_sqr()).exp(), 0.0)
        });
        let rec = reconstruct_density(&chi, dim).unwrap();
        assert!(!rec.flagged);
        let expected = fock_density(0, dim).unwrap();
        assert!(rec.density.as_operator().max_abs_diff(expected.as_operator()).unwrap() < 1e-4);
    }

    #[test]
    fn displaced_reconstruction_keeps_coherences() {
        // χ of |ψ⟩ = (|0⟩ + |1⟩)/√2: Tr[ρD(ξ)] = ½[1 + (1−|ξ|²) + ξ − ξ*]e^{−|ξ|²/2}
        let dim = FockDim::new(10).unwrap();
        let grid = PhaseGrid::cartesian(5.0, 0.1).unwrap();
        let chi = CharacteristicField::from_fn(&grid, Ordering::Symmetric, 0.0, |xi| {
            let s = xi.norm_sqr();
            (Complex64::new(2.0 - s, 0.0) + xi - xi.conj()) * (0.5 * (-0.5 * s).exp())
        });
        let rec = reconstruct_density(&chi, dim).unwrap();
        for (m, k) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((rec.density.get(m, k) - 0.5).norm() < 1e-4, "({m},{k})");
        }
    }

    #[test]
    fn rejects_insufficient_grid() {
        let dim = FockDim::new(6).unwrap();
        let grid = PhaseGrid::cartesian(3.0, 0.1).unwrap();
        let chi = CharacteristicField::from_fn(&grid, Ordering::Symmetric, 0.0, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(reconstruct_density(&chi, dim), Err(Error::InsufficientGrid(_))));
    }
}

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::PhaseGrid;
use crate::error::{Error, Result};
use crate::fock::{displacement_matrix, DensityMatrix, Flagged};

/// Operator ordering of a characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ordering {
    /// p = +1.
    Normal,
    /// p = 0.
    Symmetric,
    /// p = −1.
    Antinormal,
}

impl Ordering {
    pub fn p(self) -> f64 {
        match self {
            Ordering::Normal => 1.0,
            Ordering::Symmetric => 0.0,
            Ordering::Antinormal => -1.0,
        }
    }

    pub fn from_p(p: i32) -> Result<Self> {
        match p {
            1 => Ok(Ordering::Normal),
            0 => Ok(Ordering::Symmetric),
            -1 => Ok(Ordering::Antinormal),
            other => Err(Error::Unsupported(format!("ordering parameter p = {other}"))),
        }
    }

    /// e^{p|ξ|²/2}.
    pub fn factor(self, xi: Complex64) -> f64 {
        (0.5 * self.p() * xi.norm_sqr()).exp()
    }
}

/// Σ_mn A_mn B_nm = Tr[AB], skipping exact zeros of `a`.
pub(crate) fn trace_product(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
    let k = a.nrows().min(b.nrows());
    let mut total = Complex64::new(0.0, 0.0);
    for m in 0..a.nrows() {
        for n in 0..a.ncols() {
            let x = a[[m, n]];
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            assert!(m < k && n < k, "operand support exceeds sampled block");
            total += x * b[[n, m]];
        }
    }
    total
}

/// χ(ξ, p) = Tr[ρ D(ξ)] e^{p|ξ|²/2}.
pub fn characteristic_function(
    rho: &DensityMatrix,
    xi: Complex64,
    ordering: Ordering,
) -> Flagged<Complex64> {
    let disp = displacement_matrix(xi, rho.dim());
    Flagged {
        value: trace_product(rho.entries(), disp.value.entries()) * ordering.factor(xi),
        truncation_warning: disp.truncation_warning,
    }
}

/// A characteristic function known as a formula in (ξ, t).
pub trait ChiField {
    fn value(&self, xi: Complex64, t: f64) -> Complex64;

    /// (ξ∂_ξ + ξ*∂_ξ*)χ = r∂_r χ, by default a central difference under
    /// the dilation ξ → (1 ± ε)ξ.
    fn radial_derivative(&self, xi: Complex64, t: f64) -> Complex64 {
        let eps = 1e-5;
        (self.value(xi * (1.0 + eps), t) - self.value(xi * (1.0 - eps), t)) / (2.0 * eps)
    }
}

/// χ sampled on a grid at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicField {
    pub grid: PhaseGrid,
    pub ordering: Ordering,
    pub values: Vec<Complex64>,
    pub time: f64,
    /// Grid points beyond the displacement truncation guard.
    pub truncation_warnings: usize,
}

impl CharacteristicField {
    pub fn from_density(rho: &DensityMatrix, grid: &PhaseGrid, ordering: Ordering, time: f64) -> Self {
        let mut warnings = 0;
        let values = grid
            .points()
            .iter()
            .map(|&xi| {
                let v = characteristic_function(rho, xi, ordering);
                warnings += v.truncation_warning as usize;
                v.value
            })
            .collect();
        CharacteristicField {
            grid: grid.clone(),
            ordering,
            values,
            time,
            truncation_warnings: warnings,
        }
    }

    pub fn from_fn(
        grid: &PhaseGrid,
        ordering: Ordering,
        time: f64,
        f: impl Fn(Complex64) -> Complex64,
    ) -> Self {
        CharacteristicField {
            grid: grid.clone(),
            ordering,
            values: grid.points().iter().map(|&xi| f(xi)).collect(),
            time,
            truncation_warnings: 0,
        }
    }

    pub fn from_chi_field(
        field: &impl ChiField,
        grid: &PhaseGrid,
        ordering: Ordering,
        time: f64,
    ) -> Self {
        Self::from_fn(grid, ordering, time, |xi| field.value(xi, time))
    }

    pub fn value_at_origin(&self) -> Option<Complex64> {
        self.grid.origin_index().map(|i| self.values[i])
    }
}

/// Precomputed displacement blocks on a fixed grid, for evaluating χ and W
/// of many states whose support lies in a leading block.
#[derive(Debug, Clone)]
pub struct PhaseSampler {
    grid: PhaseGrid,
    block: usize,
    displacement: Vec<Array2<Complex64>>,
    displaced_parity: Vec<Array2<Complex64>>,
}

impl PhaseSampler {
    /// `block` bounds the support of the states to be sampled.
    pub fn new(grid: &PhaseGrid, dim: crate::fock::FockDim, block: usize) -> Self {
        let n = dim.n_cut();
        let block = block.clamp(1, n);
        let mut displacement = Vec::with_capacity(grid.len());
        let mut displaced_parity = Vec::with_capacity(grid.len());
        for &z in grid.points() {
            let d = displacement_matrix(z, dim).value.into_entries();
            displacement.push(d.slice(ndarray::s![..block, ..block]).to_owned());
            displaced_parity.push(Array2::from_shape_fn((block, block), |(j, k)| {
                (0..n)
                    .map(|m| {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        d[[j, m]] * d[[k, m]].conj() * sign
                    })
                    .sum()
            }));
        }
        PhaseSampler { grid: grid.clone(), block, displacement, displaced_parity }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn block(&self) -> usize {
        self.block
    }

    /// Tr[ρ D(ξ_k)] for every grid point (symmetric ordering).
    pub fn chi_values(&self, rho: &Array2<Complex64>) -> Vec<Complex64> {
        self.displacement.iter().map(|d| trace_product(rho, d)).collect()
    }

    /// (2/π) Tr[ρ D(α_k) Π D(α_k)†] for every grid point; real part.
    pub fn wigner_values(&self, rho: &Array2<Complex64>) -> Vec<f64> {
        self.displaced_parity
            .iter()
            .map(|m| trace_product(rho, m).re * std::f64::consts::FRAC_2_PI)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_density, laguerre, FockDim};
    use crate::phase_space::grid::RadialSpacing;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dim(n: usize) -> FockDim {
        FockDim::new(n).unwrap()
    }

    fn random_state(n_cut: usize, support: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::<Complex64>::zeros((n_cut, n_cut));
        for m in 0..support {
            for k in 0..support {
                a[[m, k]] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        // A A† is positive; normalize the trace
        let rho = a.dot(&a.t().mapv(|z| z.conj()));
        let tr: Complex64 = rho.diag().iter().copied().sum();
        let rho = crate::linalg::hermitian_part(&rho.mapv(|z| z / tr.re));
        DensityMatrix::new(crate::fock::OperatorMatrix::from_array(rho).unwrap()).unwrap()
    }

    #[test]
    fn origin_value_is_one() {
        let rho = random_state(12, 5, 3);
        for ordering in [Ordering::Normal, Ordering::Symmetric, Ordering::Antinormal] {
            let chi = characteristic_function(&rho, Complex64::new(0.0, 0.0), ordering).value;
            assert!((chi - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn fock_state_laguerre_form() {
        let d = dim(20);
        for n in 0..5 {
            let rho = fock_density(n, d).unwrap();
            for s in [0.2, 1.0, 2.5] {
                let xi = Complex64::from_polar(f64::sqrt(s), 0.3);
                let chi = characteristic_function(&rho, xi, Ordering::Symmetric).value;
                let expected = laguerre(n, s) * (-0.5 * s).exp();
                assert!((chi - expected).norm() < 1e-12);
            }
        }
        let rho = fock_density(1, d).unwrap();
        let chi = characteristic_function(&rho, Complex64::new(1.0, 0.0), Ordering::Symmetric);
        assert!(chi.value.norm() < 1e-15);
    }

    #[test]
    fn ordering_factor() {
        let rho = fock_density(1, dim(10)).unwrap();
        let xi = Complex64::new(0.4, -0.9);
        let sym = characteristic_function(&rho, xi, Ordering::Symmetric).value;
        let normal = characteristic_function(&rho, xi, Ordering::Normal).value;
        let anti = characteristic_function(&rho, xi, Ordering::Antinormal).value;
        let f = (0.5 * xi.norm_sqr()).exp();
        assert!((normal - sym * f).norm() < 1e-14);
        assert!((anti - sym / f).norm() < 1e-14);
    }

    #[test]
    fn truncation_guard_is_flagged() {
        let rho = fock_density(0, dim(8)).unwrap();
        assert!(!characteristic_function(&rho, Complex64::new(1.4, 0.0), Ordering::Symmetric).truncation_warning);
        assert!(characteristic_function(&rho, Complex64::new(1.5, 0.0), Ordering::Symmetric).truncation_warning);
    }

    #[test]
    fn fock_diagonal_states_are_rotation_invariant() {
        let rho = DensityMatrix::diagonal(dim(10), &[0.5, 0.3, 0.2]).unwrap();
        let base = characteristic_function(&rho, Complex64::new(1.3, 0.0), Ordering::Symmetric).value;
        for k in 1..12 {
            let xi = Complex64::from_polar(1.3, k as f64 * 0.5);
            let v = characteristic_function(&rho, xi, Ordering::Symmetric).value;
            assert!((v - base).norm() < 1e-10);
        }
    }

    #[test]
    fn sampler_matches_direct_evaluation() {
        let d = dim(16);
        let rho = random_state(16, 4, 11);
        let grid = PhaseGrid::radial(2.0, 9, RadialSpacing::Modulus).unwrap();
        let sampler = PhaseSampler::new(&grid, d, 4);
        let chi = sampler.chi_values(rho.entries());
        for (z, v) in grid.points().iter().zip(chi) {
            let direct = characteristic_function(&rho, *z, Ordering::Symmetric).value;
            assert!((v - direct).norm() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn bounded_and_conjugation_symmetric(seed in 0u64..200, re in -2.5f64..2.5, im in -2.5f64..2.5) {
            let rho = random_state(24, 4, seed);
            let xi = Complex64::new(re, im);
            let plus = characteristic_function(&rho, xi, Ordering::Symmetric).value;
            let minus = characteristic_function(&rho, -xi, Ordering::Symmetric).value;
            prop_assert!(plus.norm() <= 1.0 + 1e-9);
            prop_assert!((minus - plus.conj()).norm() < 1e-12);
        }
    }
}

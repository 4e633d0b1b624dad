//! Truncated Fock-space primitives: ladder operators, number states,
//! displacement operators and the density-matrix type.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Hermiticity tolerance enforced by [`DensityMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance enforced by [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Number of retained basis states |0⟩ … |n_cut−1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockDim(usize);

impl FockDim {
    pub fn new(n_cut: usize) -> Result<Self> {
        if n_cut < 2 {
            return Err(Error::InvalidDim(n_cut));
        }
        Ok(FockDim(n_cut))
    }

    pub fn n_cut(self) -> usize {
        self.0
    }
}

/// Dense square operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: FockDim,
    entries: Array2<Complex64>,
}

impl OperatorMatrix {
    pub fn from_array(entries: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let dim = FockDim::new(rows)?;
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(OperatorMatrix { dim, entries })
    }

    pub fn zeros(dim: FockDim) -> Self {
        let n = dim.n_cut();
        OperatorMatrix { dim, entries: Array2::zeros((n, n)) }
    }

    pub fn identity(dim: FockDim) -> Self {
        let n = dim.n_cut();
        OperatorMatrix { dim, entries: Array2::eye(n) }
    }

    /// The outer product |i⟩⟨j|.
    pub fn basis(dim: FockDim, i: usize, j: usize) -> Result<Self> {
        let n = dim.n_cut();
        for index in [i, j] {
            if index >= n {
                return Err(Error::FockIndexOutOfRange { index, n_cut: n });
            }
        }
        let mut op = Self::zeros(dim);
        op.entries[[i, j]] = ONE;
        Ok(op)
    }

    pub(crate) fn from_parts(dim: FockDim, entries: Array2<Complex64>) -> Self {
        debug_assert_eq!(entries.dim(), (dim.n_cut(), dim.n_cut()));
        OperatorMatrix { dim, entries }
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<Complex64> {
        self.entries
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[[m, n]]
    }

    pub fn dagger(&self) -> Self {
        let entries = self.entries.t().mapv(|z| z.conj());
        OperatorMatrix { dim: self.dim, entries }
    }

    pub fn matmul(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.check_dim(rhs.dim)?;
        Ok(OperatorMatrix { dim: self.dim, entries: self.entries.dot(&rhs.entries) })
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diag().iter().copied().sum()
    }

    /// max |A_mn − A_nm*|.
    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.entries)
    }

    /// max |A_mn − B_mn|.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        self.check_dim(other.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        OperatorMatrix { dim: self.dim, entries: linalg::hermitian_part(&self.entries) }
    }

    pub(crate) fn check_dim(&self, other: FockDim) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimMismatch { expected: self.dim.n_cut(), found: other.n_cut() });
        }
        Ok(())
    }
}

/// Hermitian, unit-trace operator. Positivity is deliberately not enforced:
/// non-positive instances are the objects under study.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(OperatorMatrix);

impl DensityMatrix {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        Self::with_tolerance(op, HERMITIAN_TOL, TRACE_TOL)
    }

    pub fn with_tolerance(op: OperatorMatrix, herm_tol: f64, trace_tol: f64) -> Result<Self> {
        let deviation = op.hermiticity_deviation();
        if deviation > herm_tol {
            return Err(Error::NotHermitian { deviation, tolerance: herm_tol });
        }
        let deviation = (op.trace() - ONE).norm();
        if deviation > trace_tol {
            return Err(Error::TraceDeviation { deviation, tolerance: trace_tol });
        }
        Ok(DensityMatrix(op))
    }

    /// Diagonal density matrix with the given populations.
    pub fn diagonal(dim: FockDim, populations: &[f64]) -> Result<Self> {
        if populations.len() > dim.n_cut() {
            return Err(Error::DimMismatch { expected: dim.n_cut(), found: populations.len() });
        }
        let mut op = OperatorMatrix::zeros(dim);
        for (k, p) in populations.iter().enumerate() {
            op.entries[[k, k]] = Complex64::new(*p, 0.0);
        }
        Self::new(op)
    }

    pub fn dim(&self) -> FockDim {
        self.0.dim
    }

    pub fn as_operator(&self) -> &OperatorMatrix {
        &self.0
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.0
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.0.entries
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.0.entries[[m, n]]
    }

    /// Real part of ⟨n|ρ|n⟩.
    pub fn population(&self, n: usize) -> f64 {
        self.0.entries[[n, n]].re
    }
}

/// |n⟩⟨n|.
pub fn fock_density(n: usize, dim: FockDim) -> Result<DensityMatrix> {
    Ok(DensityMatrix(OperatorMatrix::basis(dim, n, n)?))
}

/// Annihilation operator: ⟨n−1|a|n⟩ = √n.
pub fn annihilation_matrix(dim: FockDim) -> OperatorMatrix {
    let n = dim.n_cut();
    let mut entries = Array2::zeros((n, n));
    for k in 1..n {
        entries[[k - 1, k]] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    OperatorMatrix { dim, entries }
}

pub fn creation_matrix(dim: FockDim) -> OperatorMatrix {
    annihilation_matrix(dim).dagger()
}

pub fn number_matrix(dim: FockDim) -> OperatorMatrix {
    let n = dim.n_cut();
    let mut entries = Array2::zeros((n, n));
    for k in 0..n {
        entries[[k, k]] = Complex64::new(k as f64, 0.0);
    }
    OperatorMatrix { dim, entries }
}

/// A value carrying a truncation-reliability warning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flagged<T> {
    pub value: T,
    /// Set when |ξ|² exceeds the trusted range for the truncation.
    pub truncation_warning: bool,
}

/// |ξ|² above which displacement matrices are flagged as unreliable.
pub fn displacement_guard(dim: FockDim) -> f64 {
    dim.n_cut() as f64 / 4.0
}

/// Generalized Laguerre polynomials L_0^(α)(x) … L_{max_order}^(α)(x) by the
/// forward three-term recurrence.
pub fn laguerre_sequence(max_order: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(1.0);
    if max_order == 0 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for k in 1..max_order {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// L_n(x), the ordinary Laguerre polynomial.
pub fn laguerre(n: usize, x: f64) -> f64 {
    laguerre_sequence(n, 0.0, x)[n]
}

/// Displacement operator exp(ξa† − ξ*a) from the closed Laguerre form of its
/// matrix elements. Each element is exact for the infinite-dimensional
/// operator; only the set of retained elements is truncated.
pub fn displacement_matrix(xi: Complex64, dim: FockDim) -> Flagged<OperatorMatrix> {
    let n = dim.n_cut();
    let s = xi.norm_sqr();
    let gauss = (-0.5 * s).exp();
    let mut entries = Array2::zeros((n, n));

    // prefactor ξ^d / sqrt(d!) for the n = 0 element of offset d
    let mut head = ONE;
    for d in 0..n {
        if d > 0 {
            head *= xi / (d as f64).sqrt();
        }
        let lag = laguerre_sequence(n - d - 1, d as f64, s);
        // prefactor sqrt(k!/(k+d)!) ξ^d, updated along the diagonal
        let mut pref = head;
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        for k in 0..(n - d) {
            if k > 0 {
                pref *= ((k as f64) / ((k + d) as f64)).sqrt();
            }
            let value = pref * gauss * lag[k];
            entries[[k + d, k]] = value;
            if d > 0 {
                entries[[k, k + d]] = value.conj() * sign;
            }
        }
    }
    Flagged {
        value: OperatorMatrix { dim, entries },
        truncation_warning: s > displacement_guard(dim),
    }
}

/// Displacement operator by scaling-and-squaring exponentiation of the
/// truncated generator ξa† − ξ*a. Exactly unitary within the truncated space.
pub fn displacement_matrix_expm(xi: Complex64, dim: FockDim) -> Flagged<OperatorMatrix> {
    let a = annihilation_matrix(dim);
    let generator = a.dagger().entries.mapv(|z| z * xi) - a.entries.mapv(|z| z * xi.conj());
    Flagged {
        value: OperatorMatrix { dim, entries: linalg::expm(&generator) },
        truncation_warning: xi.norm_sqr() > displacement_guard(dim),
    }
}

/// Column vector of |n⟩.
pub fn fock_vector(n: usize, dim: FockDim) -> Result<ndarray::Array1<Complex64>> {
    if n >= dim.n_cut() {
        return Err(Error::FockIndexOutOfRange { index: n, n_cut: dim.n_cut() });
    }
    let mut v = ndarray::Array1::from_elem(dim.n_cut(), ZERO);
    v[n] = ONE;
    Ok(v)
}

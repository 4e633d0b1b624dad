use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{annihilation_matrix, number_matrix, FockDim, OperatorMatrix};
use crate::linalg::kron;

/// Zero-temperature damping generator Lρ = 2aρa† − a†aρ − ρa†a on a fixed
/// truncation.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: FockDim,
    lowering: Array2<Complex64>,
    raising: Array2<Complex64>,
    number: Array2<Complex64>,
}

impl Liouvillian {
    pub fn new(dim: FockDim) -> Self {
        let a = annihilation_matrix(dim);
        Liouvillian {
            dim,
            raising: a.dagger().into_entries(),
            lowering: a.into_entries(),
            number: number_matrix(dim).into_entries(),
        }
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    /// Literal matrix-product evaluation.
    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim.n_cut(), found: rho.dim().n_cut() });
        }
        let r = rho.entries();
        let jump = self.lowering.dot(r).dot(&self.raising).mapv(|z| z * 2.0);
        let out = jump - self.number.dot(r) - r.dot(&self.number);
        Ok(OperatorMatrix::from_parts(self.dim, out))
    }

    /// Column-stacking superoperator: vec(Lρ) = S vec(ρ).
    pub fn superoperator(&self) -> SuperOperator {
        let n = self.dim.n_cut();
        let id: Array2<Complex64> = Array2::eye(n);
        // vec(AXB) = (Bᵀ ⊗ A) vec(X); (a†)ᵀ = a for the real ladder matrix
        let raising_t = self.raising.t().to_owned();
        let jump = kron(&raising_t, &self.lowering).mapv(|z| z * 2.0);
        let left = kron(&id, &self.number);
        let right = kron(&self.number.t().to_owned(), &id);
        SuperOperator { dim: self.dim, entries: jump - left - right }
    }
}

/// Lρ for the truncation implied by `rho`.
pub fn liouvillian_apply(rho: &OperatorMatrix) -> OperatorMatrix {
    Liouvillian::new(rho.dim()).apply(rho).expect("dimension taken from input")
}

/// Banded evaluation: (Lρ)_mn = 2√((m+1)(n+1)) ρ_{m+1,n+1} − (m+n) ρ_mn.
///
/// Works on any leading block: entries outside the block never feed back
/// into it, so a block holding the support of ρ evolves exactly.
pub(crate) fn apply_banded(rho: &Array2<Complex64>, out: &mut Array2<Complex64>) {
    let k = rho.nrows();
    for m in 0..k {
        for n in 0..k {
            let mut value = rho[[m, n]] * -((m + n) as f64);
            if m + 1 < k && n + 1 < k {
                value += rho[[m + 1, n + 1]] * (2.0 * (((m + 1) * (n + 1)) as f64).sqrt());
            }
            out[[m, n]] = value;
        }
    }
}

/// Dense superoperator acting on column-vectorized operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: FockDim,
    entries: Array2<Complex64>,
}

impl SuperOperator {
    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn apply(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        if op.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim.n_cut(), found: op.dim().n_cut() });
        }
        let v = self.entries.dot(&vectorize(op));
        unvectorize(&v, self.dim)
    }
}

/// Column-stacking vectorization: index m + n·n_cut holds X_mn.
pub fn vectorize(op: &OperatorMatrix) -> ndarray::Array1<Complex64> {
    let n = op.dim().n_cut();
    ndarray::Array1::from_shape_fn(n * n, |idx| op.get(idx % n, idx / n))
}

pub fn unvectorize(v: &ndarray::Array1<Complex64>, dim: FockDim) -> Result<OperatorMatrix> {
    let n = dim.n_cut();
    if v.len() != n * n {
        return Err(Error::DimMismatch { expected: n * n, found: v.len() });
    }
    Ok(OperatorMatrix::from_parts(dim, Array2::from_shape_fn((n, n), |(m, k)| v[m + k * n])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fock_density;
    use proptest::prelude::*;

    fn dim(n: usize) -> FockDim {
        FockDim::new(n).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn vacuum_is_fixed_point() {
        let out = liouvillian_apply(fock_density(0, dim(5)).unwrap().as_operator());
        assert!(out.entries().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn excited_population_decays_into_vacuum() {
        let out = liouvillian_apply(fock_density(1, dim(4)).unwrap().as_operator());
        assert_eq!(out.get(0, 0), c(2.0));
        assert_eq!(out.get(1, 1), c(-2.0));
        let others: f64 = out.entries().iter().map(|z| z.norm()).sum::<f64>() - 4.0;
        assert!(others.abs() < 1e-15);
    }

    #[test]
    fn coherence_decays_at_half_rate() {
        let d = dim(4);
        let out = liouvillian_apply(&OperatorMatrix::basis(d, 1, 0).unwrap());
        let mut expected = OperatorMatrix::zeros(d).into_entries();
        expected[[1, 0]] = c(-1.0);
        assert_eq!(out.entries(), &expected);
    }

    #[test]
    fn dimension_mismatch() {
        let l = Liouvillian::new(dim(3));
        let err = l.apply(&OperatorMatrix::zeros(dim(4))).unwrap_err();
        assert_eq!(err, Error::DimMismatch { expected: 3, found: 4 });
    }

    #[test]
    fn superoperator_matches_apply_on_basis() {
        for n in [2, 3, 5] {
            let d = dim(n);
            let l = Liouvillian::new(d);
            let s = l.superoperator();
            assert_eq!(s.entries().dim(), (n * n, n * n));
            for i in 0..n {
                for j in 0..n {
                    let x = OperatorMatrix::basis(d, i, j).unwrap();
                    let via_super = s.apply(&x).unwrap();
                    let direct = l.apply(&x).unwrap();
                    assert!(via_super.max_abs_diff(&direct).unwrap() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn superoperator_preserves_trace() {
        let n = 6;
        let s = Liouvillian::new(dim(n)).superoperator();
        // vec(I)† S = 0
        for col in 0..n * n {
            let row_sum: Complex64 = (0..n).map(|k| s.entries()[[k + k * n, col]]).sum();
            assert!(row_sum.norm() < 1e-14);
        }
    }

    #[test]
    fn superoperator_annihilates_vacuum() {
        let d = dim(4);
        let s = Liouvillian::new(d).superoperator();
        let v = vectorize(fock_density(0, d).unwrap().as_operator());
        assert!(s.entries().dot(&v).iter().all(|z| z.norm() < 1e-15));
    }

    fn operator_from(values: &[(f64, f64)], n: usize) -> OperatorMatrix {
        let entries =
            Array2::from_shape_fn((n, n), |(m, k)| Complex64::new(values[m * n + k].0, values[m * n + k].1));
        OperatorMatrix::from_array(entries).unwrap()
    }

    proptest! {
        #[test]
        fn banded_matches_literal(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36)) {
            let x = operator_from(&values, 6);
            let literal = liouvillian_apply(&x);
            let mut banded = Array2::zeros((6, 6));
            apply_banded(x.entries(), &mut banded);
            let diff = literal.entries().iter().zip(banded.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-13);
        }

        #[test]
        fn preserves_hermiticity(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 25)) {
            let x = operator_from(&values, 5).hermitian_part();
            let s = Liouvillian::new(dim(5)).superoperator();
            let out = s.apply(&x).unwrap();
            prop_assert!(out.hermiticity_deviation() < 1e-12);
            prop_assert!(out.trace().norm() < 1e-12);
        }
    }
}

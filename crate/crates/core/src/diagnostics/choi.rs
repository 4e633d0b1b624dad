use ndarray::Array2;
use num_complex::Complex64;

use crate::dynamics::{propagate_operator, ExponentialKernel};
use crate::error::{Error, Result};
use crate::fock::{FockDim, OperatorMatrix};
use crate::linalg::{hermitian_eigen, hermitian_part};

/// Images Φ(|i⟩⟨j|) of the n_cut² basis matrices under one dynamical map.
#[derive(Debug, Clone)]
pub struct BasisImages {
    dim: FockDim,
    images: Vec<Option<OperatorMatrix>>,
}

impl BasisImages {
    pub fn new(dim: FockDim) -> Self {
        let n = dim.n_cut();
        BasisImages { dim, images: vec![None; n * n] }
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn insert(&mut self, i: usize, j: usize, image: OperatorMatrix) -> Result<()> {
        let n = self.dim.n_cut();
        for index in [i, j] {
            if index >= n {
                return Err(Error::FockIndexOutOfRange { index, n_cut: n });
            }
        }
        if image.dim() != self.dim {
            return Err(Error::DimMismatch { expected: n, found: image.dim().n_cut() });
        }
        self.images[i * n + j] = Some(image);
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&OperatorMatrix> {
        self.images[i * self.dim.n_cut() + j].as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.images.iter().all(Option::is_some)
    }
}

/// Runs the exponential-kernel dynamics from every basis matrix to time `t`.
pub fn evolve_basis_images(
    kernel: &ExponentialKernel,
    t: f64,
    dt: f64,
    dim: FockDim,
) -> Result<BasisImages> {
    let n = dim.n_cut();
    let mut images = BasisImages::new(dim);
    for i in 0..n {
        for j in 0..n {
            let image = propagate_operator(&OperatorMatrix::basis(dim, i, j)?, kernel, t, dt)?;
            images.insert(i, j, image)?;
        }
    }
    Ok(images)
}

#[derive(Debug, Clone)]
pub struct ChoiAudit {
    /// Hermitian part of Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
    pub matrix: Array2<Complex64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Extreme eigenvalues of a Hermitian matrix, solving each connected block
/// of its sparsity pattern separately.
pub(crate) fn block_spectrum_extremes(c: &Array2<Complex64>) -> (f64, f64) {
    let n = c.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for p in 0..n {
        for q in (p + 1)..n {
            if c[[p, q]].norm() > 0.0 {
                let (a, b) = (root(&mut parent, p), root(&mut parent, q));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        let r = root(&mut parent, p);
        groups[r].push(p);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for members in groups.iter().filter(|g| !g.is_empty()) {
        let sub = Array2::from_shape_fn((members.len(), members.len()), |(a, b)| c[[members[a], members[b]]]);
        let values = hermitian_eigen(&sub).values;
        lo = lo.min(values[0]);
        hi = hi.max(values[values.len() - 1]);
    }
    (lo, hi)
}

/// Choi matrix C[(i·N + a), (j·N + b)] = Φ(|i⟩⟨j|)_ab and its extreme
/// eigenvalues; Φ is completely positive iff the smallest is ≥ 0.
pub fn choi_matrix(images: &BasisImages) -> Result<ChoiAudit> {
    let n = images.dim.n_cut();
    let mut c = Array2::zeros((n * n, n * n));
    for i in 0..n {
        for j in 0..n {
            let image = images.get(i, j).ok_or_else(|| {
                Error::IncompleteBasis(format!("missing image of |{i}><{j}|"))
            })?;
            for a in 0..n {
                for b in 0..n {
                    c[[i * n + a, j * n + b]] = image.get(a, b);
                }
            }
        }
    }
    let matrix = hermitian_part(&c);
    let (min_eigenvalue, max_eigenvalue) = block_spectrum_extremes(&matrix);
    Ok(ChoiAudit { matrix, min_eigenvalue, max_eigenvalue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{first_population_minimum, KernelParams};

    #[test]
    fn identity_map_is_maximally_entangled_projector() {
        let dim = FockDim::new(4).unwrap();
        let k = ExponentialKernel::from_ratio(1.0).unwrap();
        let c = choi_matrix(&evolve_basis_images(&k, 0.0, 1e-3, dim).unwrap()).unwrap();
        assert!(c.min_eigenvalue.abs() < 1e-12);
        assert!((c.max_eigenvalue - 4.0).abs() < 1e-12);
    }

    #[test]
    fn violation_at_half_period() {
        let p = KernelParams::from_ratio(1.0).unwrap();
        let (t, _) = first_population_minimum(&p).unwrap();
        let dim = FockDim::new(8).unwrap();
        let c = choi_matrix(&evolve_basis_images(&p.kernel(), t, 1e-3, dim).unwrap()).unwrap();
        assert!(c.min_eigenvalue < -0.01, "{}", c.min_eigenvalue);
    }

    #[test]
    fn block_solver_matches_dense_solver() {
        let p = KernelParams::from_ratio(0.7).unwrap();
        let dim = FockDim::new(4).unwrap();
        let c = choi_matrix(&evolve_basis_images(&p.kernel(), 2.3, 1e-2, dim).unwrap()).unwrap();
        let dense = hermitian_eigen(&c.matrix).values;
        assert!((dense[0] - c.min_eigenvalue).abs() < 1e-10);
        assert!((dense[dense.len() - 1] - c.max_eigenvalue).abs() < 1e-10);
    }

    #[test]
    fn incomplete_basis_is_rejected() {
        let dim = FockDim::new(3).unwrap();
        let mut images = BasisImages::new(dim);
        images.insert(0, 0, OperatorMatrix::identity(dim)).unwrap();
        assert!(!images.is_complete());
        assert!(matches!(choi_matrix(&images), Err(Error::IncompleteBasis(_))));
        assert!(images.insert(3, 0, OperatorMatrix::identity(dim)).is_err());
    }
}

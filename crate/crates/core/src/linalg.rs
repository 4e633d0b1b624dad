//! Small dense complex linear algebra: Hermitian eigensolver (cyclic Jacobi),
//! matrix exponential and Kronecker products.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Off-diagonal Frobenius norm at which Jacobi iteration stops.
pub const JACOBI_OFF_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

pub fn hermiticity_deviation(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for m in 0..n {
        for k in m..n {
            worst = worst.max((a[[m, k]] - a[[k, m]].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    Array2::from_shape_fn((n, n), |(m, k)| (a[[m, k]] + a[[k, m]].conj()) * 0.5)
}

/// Eigen-decomposition of a Hermitian matrix. `vectors` holds eigenvectors
/// as columns, paired with ascending `values`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<Complex64>,
    pub sweeps: usize,
}

impl HermitianEigen {
    pub fn min_value(&self) -> f64 {
        self.values[0]
    }
}

fn off_diagonal_norm(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut total = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                total += a[[p, q]].norm_sqr();
            }
        }
    }
    total.sqrt()
}

/// Cyclic Jacobi rotations on the Hermitian part of `input`.
pub fn hermitian_eigen(input: &Array2<Complex64>) -> HermitianEigen {
    let n = input.nrows();
    let mut a = hermitian_part(input);
    let mut v: Array2<Complex64> = Array2::eye(n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let mut sweeps = 0;

    while sweeps < JACOBI_MAX_SWEEPS && off_diagonal_norm(&a) > JACOBI_OFF_TOL * scale {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                let abs_pq = apq.norm();
                if abs_pq < 1e-300 || abs_pq < 1e-18 * scale {
                    a[[p, q]] = ZERO;
                    a[[q, p]] = ZERO;
                    continue;
                }
                let phase = apq / abs_pq;
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let theta = (aqq - app) / (2.0 * abs_pq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag-phase ∘ real rotation, acting on columns p, q
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = -phase.conj() * s;
                let j_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = akp * j_pp + akq * j_qp;
                    a[[k, q]] = akp * j_pq + akq * j_qq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[[q, k]] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[[p, q]] = ZERO;
                a[[q, p]] = ZERO;
                a[[p, p]] = Complex64::new(a[[p, p]].re, 0.0);
                a[[q, q]] = Complex64::new(a[[q, q]].re, 0.0);
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * j_pp + vkq * j_qp;
                    v[[k, q]] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].re.total_cmp(&a[[j, j]].re));
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]].re));
    let vectors = Array2::from_shape_fn((n, n), |(row, col)| v[[row, order[col]]]);
    HermitianEigen { values, vectors, sweeps }
}

fn one_norm(a: &Array2<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let norm = one_norm(a);
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let scaled = a.mapv(|z| z / 2f64.powi(squarings as i32));

    let mut result: Array2<Complex64> = Array2::eye(n);
    let mut term: Array2<Complex64> = Array2::eye(n);
    for k in 1..=30 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        result = result + &term;
        if one_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(row, col)| {
        a[[row / br, col / bc]] * b[[row % br, col % bc]]
    })
}

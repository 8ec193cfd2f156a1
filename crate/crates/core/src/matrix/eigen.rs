//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Matrices in this crate stay below ~40x40, where Jacobi is both accurate
//! (small relative error on every eigenvalue) and fast enough.

use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `U f(Lambda) U^dagger`
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let u = &self.vectors;
        ComplexMatrix::from_fn(n, n, |r, c| {
            let mut acc = ZERO;
            for (k, &w) in weights.iter().enumerate() {
                if w != 0.0 {
                    acc += u[(r, k)] * u[(c, k)].conj() * w;
                }
            }
            acc
        })
    }

    /// Diagonal of `U f(Lambda) U^dagger` without forming the full matrix.
    pub fn reconstruct_diagonal_with(&self, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        (0..n).map(|r| (0..n).map(|k| self.vectors[(r, k)].norm_sqr() * weights[k]).sum()).collect()
    }
}

/// Full eigendecomposition of the Hermitian part of `m`.
///
/// Panics if `m` is not square; callers validate Hermiticity themselves.
pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    jacobi(m, true)
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    jacobi(m, false).values
}

fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> HermitianEigen {
    assert!(m.is_square(), "eigendecomposition needs a square matrix");
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = if want_vectors { ComplexMatrix::identity(n) } else { ComplexMatrix::zeros(0, 0) };

    let scale = a.frobenius_norm();
    if n > 1 && scale > 0.0 {
        let threshold = (f64::EPSILON * scale).powi(2) * 1e-2;
        for _ in 0..MAX_SWEEPS {
            let off: f64 =
                (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a[(p, q)].norm_sqr()).sum();
            if off <= threshold {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q, want_vectors);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = if want_vectors { ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]) } else { v };
    HermitianEigen { values, vectors }
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, e^{-i phi}) R(theta)` on
/// the `(p, q)` plane, replacing `a` by `G^dagger a G` and `v` by `v G`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, want_vectors: bool) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // a rotation this small cannot change any entry in double precision
    if b < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / b; // e^{i phi}
    let tau = (aqq - app) / (2.0 * b);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.rows();
    // columns: a <- a G
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * g_pp + aiq * g_qp;
        a[(i, q)] = aip * g_pq + aiq * g_qq;
    }
    // rows: a <- G^dagger a
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = g_pp.conj() * apj + g_qp.conj() * aqj;
        a[(q, j)] = g_pq.conj() * apj + g_qq.conj() * aqj;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(app - t * b, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * b, 0.0);

    if want_vectors {
        for i in 0..n {
            let vip = v[(i, p)];
            let viq = v[(i, q)];
            v[(i, p)] = vip * g_pp + viq * g_qp;
            v[(i, q)] = vip * g_pq + viq * g_qq;
        }
    }
}

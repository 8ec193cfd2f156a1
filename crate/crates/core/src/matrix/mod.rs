//! Dense complex matrices and the handful of linear-algebra primitives the
//! rest of the crate is built on.
//!
//! Composite indices follow one global convention: the basis vector
//! `|j>|alpha>` of `H_A (x) H_B` sits at row `j * dim_b + alpha`.

mod eigen;

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};

/// Elementwise tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_TOL` are accepted as nonnegative.
pub const PSD_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real entries given row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// `|v><v|`
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    /// The matrix unit `|r><c|` of the given shape.
    pub fn unit(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(r, c)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_complex(Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * x * self^dagger`
    pub fn sandwich(&self, x: &Self) -> Self {
        self.matmul(x).matmul(&self.adjoint())
    }

    pub fn mat_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "mat_vec: dimension mismatch");
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }

    pub fn add_assign_scaled(&mut self, rhs: &Self, s: f64) {
        assert_eq!(self.shape(), rhs.shape(), "add_assign_scaled: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        self.diagonal().iter().map(|z| z.re).collect()
    }

    /// Largest elementwise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.shape(), rhs.shape(), "max_abs_diff: shape mismatch");
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c {
                    worst = worst.max(self[(r, c)].norm());
                }
            }
        }
        worst
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(M + M^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Block-diagonal direct sum `self (+) rhs`.
    pub fn direct_sum(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)];
            }
        }
        for r in 0..rhs.rows {
            for c in 0..rhs.cols {
                out[(self.rows + r, self.cols + c)] = rhs[(r, c)];
            }
        }
        out
    }

    /// Sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Tensor product `a (x) b`; row `(i, k)` of the result is `i * b.rows() + k`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Traces out the second factor of a `(dim_a * dim_b)`-square matrix.
pub fn partial_trace_b(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over B needs a {n}x{n} matrix for dims ({dim_a},{dim_b}), got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(dim_a, dim_a, |j, k| {
        (0..dim_b).map(|alpha| m[(j * dim_b + alpha, k * dim_b + alpha)]).sum()
    }))
}

/// Completely dephasing map: keeps the diagonal, zeroes everything else.
pub fn dephase(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| if r == c { m[(r, c)] } else { ZERO })
}

fn require_hermitian(m: &ComplexMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!("{what}: matrix is {}x{}, not square", m.rows(), m.cols())));
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::InvalidInput(format!("{what}: matrix is not Hermitian (deviation {dev:e})")));
    }
    Ok(())
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    require_hermitian(m, "trace_norm")?;
    Ok(hermitian_eigenvalues(m).iter().map(|l| l.abs()).sum())
}

/// Von Neumann entropy in bits of a unit-trace PSD matrix.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    require_hermitian(rho, "von_neumann_entropy")?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::InvalidInput(format!("von_neumann_entropy: trace is {tr}, expected 1")));
    }
    let values = hermitian_eigenvalues(rho);
    if let Some(&min) = values.first() {
        if min < -PSD_TOL {
            return Err(Error::InvalidInput(format!("von_neumann_entropy: negative eigenvalue {min:e}")));
        }
    }
    Ok(entropy_of_spectrum(&values))
}

/// `-sum p log2 p` over a spectrum, treating clipped negatives and zeros as `0 log 0 = 0`.
pub(crate) fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trace_norm_trivial_cases() {
        assert_abs_diff_eq!(trace_norm(&ComplexMatrix::identity(2)).unwrap(), 2.0, epsilon = 1e-14);
        let m = ComplexMatrix::from_diagonal(&[1.0, -1.0]);
        assert_abs_diff_eq!(trace_norm(&m).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_norm_rejects_bad_input() {
        assert!(matches!(trace_norm(&ComplexMatrix::zeros(2, 3)), Err(Error::InvalidInput(_))));
        let m = ComplexMatrix::new(2, 2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        assert!(matches!(trace_norm(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn entropy_trivial_cases() {
        let pure = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        assert_abs_diff_eq!(von_neumann_entropy(&pure).unwrap(), 0.0, epsilon = 1e-14);
        let mixed = ComplexMatrix::from_diagonal(&[0.5, 0.5]);
        assert_abs_diff_eq!(von_neumann_entropy(&mixed).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn entropy_of_quarter_three_quarters() {
        // binary entropy h(1/4) evaluated directly
        let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert_abs_diff_eq!(h, 0.811_278_124_459_132_9, epsilon = 1e-15);
        let rho = ComplexMatrix::from_diagonal(&[0.25, 0.75]);
        assert_abs_diff_eq!(von_neumann_entropy(&rho).unwrap(), h, epsilon = 1e-13);
    }

    #[test]
    fn entropy_rejects_negative_spectrum_and_bad_trace() {
        let m = ComplexMatrix::from_diagonal(&[1.5, -0.5]);
        assert!(von_neumann_entropy(&m).is_err());
        let m = ComplexMatrix::from_diagonal(&[0.5, 0.4]);
        assert!(von_neumann_entropy(&m).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let pt = partial_trace_b(&ComplexMatrix::identity(4), 2, 2).unwrap();
        assert_eq!(pt, ComplexMatrix::identity(2).scale(2.0));
        // Choi matrix of the qubit identity channel: sum_jk |jj><kk|
        let mut j = ComplexMatrix::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                j[(a * 2 + a, b * 2 + b)] = ONE;
            }
        }
        assert_eq!(partial_trace_b(&j, 2, 2).unwrap(), ComplexMatrix::identity(2));
        assert!(partial_trace_b(&j, 2, 3).is_err());
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
        let p0 = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let k = kron(&p0, &x);
        assert_eq!(k.block(0, 0, 2, 2), x);
        assert_eq!(k.block(2, 2, 2, 2), ComplexMatrix::zeros(2, 2));
        assert_eq!(k.block(0, 2, 2, 2), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn dephase_examples() {
        let d = ComplexMatrix::from_diagonal(&[0.3, 0.7]);
        assert_eq!(dephase(&d), d);
        let plus = ComplexMatrix::outer(&[c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)]);
        assert!(dephase(&plus).max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn shape_checks() {
        assert!(ComplexMatrix::new(2, 2, vec![ZERO; 3]).is_err());
        let m = ComplexMatrix::new(2, 3, vec![ONE; 6]).unwrap();
        assert_eq!(m.adjoint().shape(), (3, 2));
        assert!(ComplexMatrix::from_real_rows(&[&[1.0], &[1.0, 2.0]]).is_err());
    }
}

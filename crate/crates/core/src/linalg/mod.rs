//! Dense complex linear algebra.
//!
//! Matrices are square, row-major and small (a few hundred rows at most), so
//! everything here is written directly against `Vec<Complex64>` without any
//! blocking or BLAS.

mod eig;
mod expm;
mod lu;

pub use eig::{eig_general, sort_canonical, RawEigenSystem, MAX_QR_ITERS_PER_DIM};
pub use expm::{expm, expm_action};
pub use lu::{lu_solve, LuDecomposition, PIVOT_FLOOR};

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Shorthand for `Complex64::new`.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty or non-finite input.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| c64(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let dim = columns.len();
        let mut m = Self::zeros(dim);
        for (j, col) in columns.iter().enumerate() {
            if col.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: col.dim(),
                });
            }
            for i in 0..dim {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::new((0..self.dim).map(|i| self[(i, j)]).collect())
    }

    /// Row `i` read as a bra; returns the corresponding ket (conjugated entries).
    pub fn row_as_ket(&self, i: usize) -> ComplexVector {
        ComplexVector::new(self.row(i).iter().map(|z| z.conj()).collect())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dims(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dims(self.dim, v.dim())?;
        let n = self.dim;
        Ok(ComplexVector::new(
            (0..n)
                .map(|i| self.row(i).iter().zip(v.as_slice()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute row sum (induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        let adj = self.adjoint();
        let mut out = self.clone();
        for (o, a) in out.data.iter_mut().zip(&adj.data) {
            *o = (*o + a) * 0.5;
        }
        out
    }

    /// Frobenius norm of `A − A†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Free-function form of [`ComplexMatrix::matmul`].
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

/// Free-function form of [`ComplexMatrix::adjoint`].
pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix addition");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix subtraction");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("dimension mismatch in matrix product")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dense complex column vector (a ket).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![ZERO; dim] }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[index] = ONE;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in inner product");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> ComplexVector {
        ComplexVector::new(self.data.iter().map(|z| z * factor).collect())
    }

    pub fn conj(&self) -> ComplexVector {
        ComplexVector::new(self.data.iter().map(|z| z.conj()).collect())
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &ComplexVector) -> ComplexMatrix {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in outer product");
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.data[i] * other.data[j].conj();
            }
        }
        m
    }

    /// Index of the entry with the largest modulus (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        let mut best_val = -1.0;
        for (i, z) in self.data.iter().enumerate() {
            let a = z.norm();
            if a > best_val {
                best = i;
                best_val = a;
            }
        }
        best
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    #[inline]
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.data[i]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;

    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in vector addition");
        ComplexVector::new(self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexVector {
    type Output = ComplexVector;

    fn sub(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in vector subtraction");
        ComplexVector::new(self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(r: f64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c64(0.0, r), ONE], vec![ONE, c64(0.0, -r)]]).unwrap()
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(ComplexMatrix::new(0, vec![]), Err(Error::EmptyMatrix));
        assert!(matches!(
            ComplexMatrix::new(2, vec![ONE; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut data = vec![ONE; 4];
        data[3] = c64(f64::NAN, 0.0);
        assert_eq!(ComplexMatrix::new(2, data), Err(Error::NonFinite { row: 1, col: 1 }));
    }

    #[test]
    fn identity_is_neutral() {
        let a = toy(0.37);
        assert_eq!(ComplexMatrix::identity(2).matmul(&a).unwrap(), a);
        assert_eq!(a.matmul(&ComplexMatrix::identity(2)).unwrap(), a);
    }

    #[test]
    fn pauli_x_squares_to_identity() {
        let x = pauli_x();
        assert_eq!(x.matmul(&x).unwrap(), ComplexMatrix::identity(2));
    }

    #[test]
    fn toy_square_is_scalar() {
        // H(r)^2 = (1 - r^2) I
        let h = toy(0.5);
        let sq = h.matmul(&h).unwrap();
        assert!(max_diff(&sq, &ComplexMatrix::identity(2).scale(c64(0.75, 0.0))) < 1e-15);
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let err = toy(0.1).matmul(&ComplexMatrix::identity(3)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn adjoint_cases() {
        assert_eq!(ComplexMatrix::identity(3).adjoint(), ComplexMatrix::identity(3));
        let expected = ComplexMatrix::from_rows(&[vec![c64(0.0, -0.7), ONE], vec![ONE, c64(0.0, 0.7)]]).unwrap();
        assert_eq!(toy(0.7).adjoint(), expected);
        let a = ComplexMatrix::from_rows(&[vec![c64(1.0, 2.0), c64(-3.0, 0.5)], vec![c64(0.0, -1.0), c64(4.0, 4.0)]])
            .unwrap();
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn vector_inner_is_conjugate_linear() {
        let a = ComplexVector::new(vec![c64(0.0, 1.0), ONE]);
        let b = ComplexVector::new(vec![ONE, ONE]);
        assert_eq!(a.inner(&b), c64(1.0, -1.0));
        assert_eq!(b.inner(&a), c64(1.0, 1.0));
        assert!((a.norm() - 2f64.sqrt()).abs() < 1e-15);
    }
}

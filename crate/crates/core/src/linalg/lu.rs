use super::{Complex64, ComplexMatrix, ComplexVector, ZERO};
use crate::error::{Error, Result};

/// Relative pivot floor: a pivot below `PIVOT_FLOOR * ‖A‖_F` is treated as zero.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    min_pivot: f64,
}

impl LuDecomposition {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let floor = PIVOT_FLOOR * a.norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;

        for k in 0..n {
            let (p, pmag) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmag > floor) {
                return Err(Error::SingularMatrix { pivot: pmag, floor });
            }
            min_pivot = min_pivot.min(pmag);
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= factor * ukj;
                }
            }
        }
        Ok(Self { lu, perm, min_pivot })
    }

    /// Smallest pivot magnitude encountered.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve_vec(&self, b: &ComplexVector) -> Result<ComplexVector> {
        let n = self.lu.dim();
        if b.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.dim(),
            });
        }
        let mut x: Vec<_> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let acc = x[i] - (0..i).map(|j| row[j] * x[j]).sum::<Complex64>();
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let acc = x[i] - ((i + 1)..n).map(|j| row[j] * x[j]).sum::<Complex64>();
            x[i] = acc / row[i];
        }
        Ok(ComplexVector::new(x))
    }

    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.lu.dim();
        if rhs.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rhs.dim(),
            });
        }
        let cols = (0..n)
            .map(|j| self.solve_vec(&rhs.column(j)))
            .collect::<Result<Vec<_>>>()?;
        ComplexMatrix::from_columns(&cols)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.lu.dim()))
    }
}

/// Solves `a · x = rhs`.
pub fn lu_solve(a: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    LuDecomposition::factor(a)?.solve(rhs)
}

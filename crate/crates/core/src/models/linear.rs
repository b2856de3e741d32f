use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};

use super::Family;

/// `H(λ) = H₀ + λ H₁`.
#[derive(Debug, Clone)]
pub struct LinearFamily {
    h0: ComplexMatrix,
    h1: ComplexMatrix,
}

impl LinearFamily {
    pub fn new(h0: ComplexMatrix, h1: ComplexMatrix) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(Error::DimensionMismatch {
                expected: h0.dim(),
                found: h1.dim(),
            });
        }
        Ok(Self { h0, h1 })
    }

    pub fn h0(&self) -> &ComplexMatrix {
        &self.h0
    }

    pub fn h1(&self) -> &ComplexMatrix {
        &self.h1
    }
}

impl Family for LinearFamily {
    fn name(&self) -> String {
        format!("linear{}", self.h0.dim())
    }

    fn block(&self, lambda: f64, _sector: usize) -> Result<ComplexMatrix> {
        let h = &self.h0 + &self.h1.scale(c64(lambda, 0.0));
        if !h.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(h)
    }
}

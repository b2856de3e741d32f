use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, ONE};
use crate::metric::{MetricOperator, MetricProvenance};

use super::Family;

/// `|1 − r²|` below this counts as sitting on the exceptional point.
const EP_GUARD: f64 = 1e-14;

/// Two-level PT-symmetric model `[[ir, 1], [1, −ir]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    pub r: f64,
}

pub fn toy_hamiltonian(p: ToyParams) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c64(0.0, p.r), ONE], vec![ONE, c64(0.0, -p.r)]]).expect("finite 2x2")
}

fn guard(r: f64) -> Result<f64> {
    let d = 1.0 - r * r;
    if d.abs() < EP_GUARD {
        return Err(Error::AtExceptionalPoint(format!("toy model at r = {r}")));
    }
    Ok(d)
}

/// `−1 / (4 (1 − r²)²)`, valid on both sides of the exceptional points.
pub fn toy_chi_exact(p: ToyParams) -> Result<f64> {
    let d = guard(p.r)?;
    Ok(-1.0 / (4.0 * d * d))
}

/// Closed-form metric: static `(1/cos α) [[1, −i sin α], [i sin α, 1]]` with
/// `sin α = r` for `|r| < 1`; for `|r| > 1` it depends on `t` through
/// `exp(±2 t Λ)`, `Λ = √(r² − 1)`. For `r < −1` the `r > 1` expression is
/// conjugated by σ_x, which maps `H(r)` to `H(−r)`.
pub fn toy_metric_exact(p: ToyParams, t: f64) -> Result<MetricOperator> {
    let r = p.r;
    let d = guard(r)?;
    let g = if d > 0.0 {
        let cos_a = d.sqrt();
        ComplexMatrix::from_rows(&[vec![ONE, c64(0.0, -r)], vec![c64(0.0, r), ONE]])?.scale(c64(1.0 / cos_a, 0.0))
    } else {
        let lam = (-d).sqrt();
        let a = r.abs();
        let (up, down) = ((2.0 * t * lam).exp(), (-2.0 * t * lam).exp());
        let mut g11 = (lam + a) * down - (lam - a) * up;
        let mut g22 = (lam + a) * up - (lam - a) * down;
        let mut off = up + down;
        if r < 0.0 {
            std::mem::swap(&mut g11, &mut g22);
            off = -off;
        }
        ComplexMatrix::from_rows(&[vec![c64(g11, 0.0), c64(0.0, -off)], vec![c64(0.0, off), c64(g22, 0.0)]])?
            .scale(c64(0.5 / lam, 0.0))
    };
    MetricOperator::new(g, MetricProvenance::ClosedForm)
}

/// The toy model with `λ = r`. Its exceptional points are the zeros of `1 − r²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyFamily;

impl Family for ToyFamily {
    fn name(&self) -> String {
        "toy".into()
    }

    fn block(&self, lambda: f64, _sector: usize) -> Result<ComplexMatrix> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(toy_hamiltonian(ToyParams { r: lambda }))
    }

    fn discriminant(&self, lambda: f64, _sector: usize) -> Option<f64> {
        Some((1.0 - lambda) * (1.0 + lambda))
    }

    fn min_band_gap(&self, lambda: f64) -> Result<f64> {
        Ok(2.0 * ((1.0 - lambda) * (1.0 + lambda)).abs().sqrt())
    }
}

//! Hilbert-space metric operators.
//!
//! A metric `G` is Hermitian positive-definite and, for a time-independent
//! Hamiltonian, obeys `dG/dt = i (G H − H† G)`. Away from exceptional points the
//! left-projector choice `G = Σ_i |L_i⟩⟨L_i|` solves it with every right
//! eigenstate carrying unit metric norm; its time dependence is a decay factor
//! `exp(−2 t Im E_i)` on each projector.

use serde::{Deserialize, Serialize};

use crate::biortho::BiorthogonalSystem;
use crate::error::{Error, Result};
use crate::linalg::{c64, eig_general, Complex64, ComplexMatrix, ComplexVector, I};

/// Relative Hermiticity tolerance `‖G − G†‖ ≤ HERMITIAN_TOL · ‖G‖`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative positivity floor on the smallest eigenvalue of `(G + G†)/2`.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricProvenance {
    /// `Σ_i |L_i⟩⟨L_i|` from a biorthonormal system.
    LeftProjector,
    /// Left projectors propagated to time `t`.
    Evolved,
    /// Analytic expression for the two-level model.
    ClosedForm,
}

#[derive(Debug, Clone)]
pub struct MetricOperator {
    g: ComplexMatrix,
    provenance: MetricProvenance,
}

impl MetricOperator {
    /// Validates Hermiticity and positive-definiteness.
    pub fn new(g: ComplexMatrix, provenance: MetricProvenance) -> Result<Self> {
        let norm = g.norm();
        let defect = g.hermiticity_defect();
        if defect > HERMITIAN_TOL * norm {
            return Err(Error::InvalidMetric(format!("not Hermitian: ‖G − G†‖ = {defect:.3e}")));
        }
        let m = Self { g, provenance };
        let lowest = m.min_eigenvalue()?;
        if !(lowest > POSITIVITY_FLOOR * norm) {
            return Err(Error::InvalidMetric(format!(
                "not positive-definite: smallest eigenvalue {lowest:.3e}"
            )));
        }
        Ok(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn provenance(&self) -> MetricProvenance {
        self.provenance
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let sys = eig_general(&self.g.hermitian_part())?;
        Ok(sys.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue()
            .map(|m| m > POSITIVITY_FLOOR * self.g.norm())
            .unwrap_or(false)
    }
}

fn weighted_projectors(sys: &BiorthogonalSystem, weights: &[f64]) -> ComplexMatrix {
    let n = sys.dim();
    let lefts = sys.lefts();
    let mut g = ComplexMatrix::zeros(n);
    for a in 0..n {
        for b in a..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, w) in weights.iter().enumerate() {
                acc += lefts[(i, a)].conj() * lefts[(i, b)] * *w;
            }
            g[(a, b)] = acc;
            g[(b, a)] = acc.conj();
        }
        g[(a, a)] = c64(g[(a, a)].re, 0.0);
    }
    g
}

/// `G = Σ_i |L_i⟩⟨L_i|`.
pub fn build_metric(sys: &BiorthogonalSystem) -> Result<MetricOperator> {
    let g = weighted_projectors(sys, &vec![1.0; sys.dim()]);
    MetricOperator::new(g, MetricProvenance::LeftProjector)
}

/// `G(t) = Σ_i exp(−2 t Im E_i) |L_i⟩⟨L_i|`, i.e. `|L_i(t)⟩ = exp(−i E_i* t) |L_i⟩`.
pub fn evolve_metric(sys: &BiorthogonalSystem, t: f64) -> Result<MetricOperator> {
    if t == 0.0 {
        return build_metric(sys);
    }
    let weights: Vec<f64> = sys.values().iter().map(|e| (-2.0 * t * e.im).exp()).collect();
    let g = weighted_projectors(sys, &weights);
    MetricOperator::new(g, MetricProvenance::Evolved)
}

/// Right-hand side of the metric equation of motion, `i (G H − H† G)`.
pub fn eom_rhs(g: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gh = g.matmul(h)?;
    let hg = h.adjoint().matmul(g)?;
    Ok((&gh - &hg).scale(I))
}

/// `‖dG/dt − i (G H − H† G)‖_F / max(‖G‖_F, 1)`.
pub fn eom_residual(g: &MetricOperator, dg_dt: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    let rhs = eom_rhs(g.matrix(), h)?;
    if dg_dt.dim() != rhs.dim() {
        return Err(Error::DimensionMismatch {
            expected: rhs.dim(),
            found: dg_dt.dim(),
        });
    }
    Ok((dg_dt - &rhs).norm() / g.matrix().norm().max(1.0))
}

/// Central difference of [`evolve_metric`] in `t`.
pub fn metric_time_derivative(sys: &BiorthogonalSystem, t: f64, step: f64) -> Result<ComplexMatrix> {
    let plus = evolve_metric(sys, t + step)?;
    let minus = evolve_metric(sys, t - step)?;
    Ok((plus.matrix() - minus.matrix()).scale(c64(0.5 / step, 0.0)))
}

/// `⟨ψ|G|φ⟩`.
pub fn metric_inner(g: &MetricOperator, psi: &ComplexVector, phi: &ComplexVector) -> Result<Complex64> {
    let gphi = g.matrix().mul_vec(phi)?;
    if psi.dim() != gphi.dim() {
        return Err(Error::DimensionMismatch {
            expected: gphi.dim(),
            found: psi.dim(),
        });
    }
    Ok(psi.inner(&gphi))
}

/// Integrates `dG/dt = i (G H − H† G)` from `g0` at `t = 0` to `t_end` with
/// fixed-step classical RK4. Used to cross-check [`evolve_metric`].
pub fn integrate_eom_rk4(g0: &ComplexMatrix, h: &ComplexMatrix, t_end: f64, step: f64) -> Result<ComplexMatrix> {
    if !(step > 0.0) {
        return Err(Error::InvalidSpec("RK4 step must be positive".into()));
    }
    let steps = (t_end.abs() / step).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let half = c64(0.5 * dt, 0.0);
    let full = c64(dt, 0.0);
    let sixth = c64(dt / 6.0, 0.0);
    let mut g = g0.clone();
    for _ in 0..steps {
        let k1 = eom_rhs(&g, h)?;
        let k2 = eom_rhs(&(&g + &k1.scale(half)), h)?;
        let k3 = eom_rhs(&(&g + &k2.scale(half)), h)?;
        let k4 = eom_rhs(&(&g + &k3.scale(full)), h)?;
        let incr = &(&(&k1 + &k2.scale(c64(2.0, 0.0))) + &k3.scale(c64(2.0, 0.0))) + &k4;
        g = &g + &incr.scale(sixth);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biortho::biorthogonal_system;
    use crate::linalg::ONE;

    fn toy(r: f64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c64(0.0, r), ONE], vec![ONE, c64(0.0, -r)]]).unwrap()
    }

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Unbroken-region closed form, substituted by hand: sin α = r, cos α = √(1 − r²).
    fn unbroken_oracle(r: f64) -> ComplexMatrix {
        let cos_a = (1.0 - r * r).sqrt();
        ComplexMatrix::from_rows(&[vec![ONE, c64(0.0, -r)], vec![c64(0.0, r), ONE]])
            .unwrap()
            .scale(c64(1.0 / cos_a, 0.0))
    }

    #[test]
    fn hermitian_metric_is_identity() {
        let x = ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let g = build_metric(&biorthogonal_system(&x).unwrap()).unwrap();
        assert!(max_diff(g.matrix(), &ComplexMatrix::identity(2)) < 1e-15);
        assert_eq!(g.provenance(), MetricProvenance::LeftProjector);
    }

    #[test]
    fn toy_unbroken_metric() {
        for r in [0.0, 0.3, 0.5, -0.8] {
            let g = build_metric(&biorthogonal_system(&toy(r)).unwrap()).unwrap();
            assert!(max_diff(g.matrix(), &unbroken_oracle(r)) < 1e-12, "r = {r}");
        }
        let g = build_metric(&biorthogonal_system(&toy(0.5)).unwrap()).unwrap();
        let lowest = g.min_eigenvalue().unwrap();
        assert!((lowest - 0.5 / 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unbroken_metric_is_static() {
        let sys = biorthogonal_system(&toy(0.5)).unwrap();
        let g = build_metric(&sys).unwrap();
        let zero = ComplexMatrix::zeros(2);
        assert!(eom_residual(&g, &zero, &toy(0.5)).unwrap() <= 1e-12);
        for t in [0.5, 1.0, 3.0] {
            let gt = evolve_metric(&sys, t).unwrap();
            assert!(max_diff(gt.matrix(), &unbroken_oracle(0.5)) < 1e-10);
        }
    }

    #[test]
    fn identity_metric_has_zero_residual_for_hermitian() {
        let x = ComplexMatrix::from_real(2, &[0.3, 1.0, 1.0, -0.2]).unwrap();
        let g = MetricOperator::new(ComplexMatrix::identity(2), MetricProvenance::ClosedForm).unwrap();
        assert_eq!(eom_residual(&g, &ComplexMatrix::zeros(2), &x).unwrap(), 0.0);
    }

    #[test]
    fn invalid_metrics_rejected() {
        let not_herm = ComplexMatrix::from_rows(&[vec![ONE, ONE], vec![c64(0.0, 0.0), ONE]]).unwrap();
        assert!(matches!(
            MetricOperator::new(not_herm, MetricProvenance::ClosedForm),
            Err(Error::InvalidMetric(_))
        ));
        let indefinite = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(
            MetricOperator::new(indefinite, MetricProvenance::ClosedForm),
            Err(Error::InvalidMetric(_))
        ));
    }

    #[test]
    fn right_states_are_metric_orthonormal() {
        let sys = biorthogonal_system(&toy(0.5)).unwrap();
        let g = build_metric(&sys).unwrap();
        let (r1, r2) = (sys.right(0), sys.right(1));
        assert!(metric_inner(&g, &r1, &r2).unwrap().norm() < 1e-10);
        let n1 = metric_inner(&g, &r1, &r1).unwrap();
        assert!((n1 - ONE).norm() < 1e-12);
        let psi = ComplexVector::new(vec![c64(0.3, -1.0), c64(2.0, 0.5)]);
        let q = metric_inner(&g, &psi, &psi).unwrap();
        assert!(q.re > 0.0 && q.im.abs() < 1e-14);
    }

    #[test]
    fn rk4_agrees_with_closed_form() {
        let h = toy(2.0);
        let sys = biorthogonal_system(&h).unwrap();
        let g0 = build_metric(&sys).unwrap();
        let t = 0.8;
        let rk = integrate_eom_rk4(g0.matrix(), &h, t, 1e-3).unwrap();
        let exact = evolve_metric(&sys, t).unwrap();
        assert!((&rk - exact.matrix()).norm() <= 1e-9 * exact.matrix().norm());
    }
}

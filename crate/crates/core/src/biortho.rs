//! Biorthonormal left/right eigensystems.
//!
//! Left eigenvectors are the rows of the inverse of the right-eigenvector
//! stack, so `⟨L_i|R_j⟩ = δ_ij` holds by construction. Each pair is then
//! rescaled to the balanced gauge `‖L_i‖ = ‖R_i‖` with the largest-modulus entry
//! of `R_i` real and positive. In that gauge `Σ_i |L_i⟩⟨L_i|` is the metric whose
//! right eigenstates have unit metric norm, and Hermitian input gives unit
//! vectors with `L_i = R_i`.

use crate::error::{Error, Result};
use crate::linalg::{eig_general, Complex64, ComplexMatrix, ComplexVector, LuDecomposition, RawEigenSystem};

/// Rigidity below this is treated as coalescence.
pub const TOL_EP: f64 = 1e-8;
/// Rigidity below this is reported as close to an exceptional point.
pub const NEAR_EP: f64 = 1e-1;
/// Overlap and eigenvalue tie tolerance in [`match_states`].
pub const MATCH_TIE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    values: Vec<Complex64>,
    /// columns are `|R_i⟩`
    rights: ComplexMatrix,
    /// rows are `⟨L_i|`
    lefts: ComplexMatrix,
    rigidity: Vec<f64>,
}

impl BiorthogonalSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn rights(&self) -> &ComplexMatrix {
        &self.rights
    }

    pub fn lefts(&self) -> &ComplexMatrix {
        &self.lefts
    }

    pub fn right(&self, i: usize) -> ComplexVector {
        self.rights.column(i)
    }

    /// `|L_i⟩` as a ket.
    pub fn left(&self, i: usize) -> ComplexVector {
        self.lefts.row_as_ket(i)
    }

    pub fn rigidity(&self) -> &[f64] {
        &self.rigidity
    }

    pub fn min_rigidity(&self) -> f64 {
        self.rigidity.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_near_ep(&self) -> bool {
        self.min_rigidity() < NEAR_EP
    }

    /// `max_{i,j} |⟨L_i|R_j⟩ − δ_ij|`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let prod = self.lefts.matmul(&self.rights).expect("square");
        (&prod - &ComplexMatrix::identity(self.dim()))
            .as_slice()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `‖Σ_i |R_i⟩⟨L_i| − 𝟙‖_F`.
    pub fn completeness_defect(&self) -> f64 {
        let prod = self.rights.matmul(&self.lefts).expect("square");
        (&prod - &ComplexMatrix::identity(self.dim())).norm()
    }

    /// Rescales pair `i` by `R_i → c R_i`, `⟨L_i| → ⟨L_i| / c`.
    pub fn regauged(&self, i: usize, c: Complex64) -> BiorthogonalSystem {
        let mut out = self.clone();
        let n = self.dim();
        for k in 0..n {
            out.rights[(k, i)] *= c;
            out.lefts[(i, k)] /= c;
        }
        out
    }
}

/// `|⟨l|r⟩| / (‖l‖ ‖r‖)`.
pub fn rigidity(left: &ComplexVector, right: &ComplexVector) -> Result<f64> {
    let (ln, rn) = (left.norm(), right.norm());
    if ln == 0.0 || rn == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((left.inner(right).norm() / (ln * rn)).min(1.0))
}

pub fn biorthogonalize(raw: &RawEigenSystem) -> Result<BiorthogonalSystem> {
    if raw.converged.iter().any(|c| !c) {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    let n = raw.dim();
    let stack = &raw.right_vectors;
    let lu = LuDecomposition::factor(stack).map_err(|e| match e {
        Error::SingularMatrix { pivot, .. } => Error::AtExceptionalPoint(format!(
            "right-eigenvector stack is singular (pivot {pivot:.3e}): eigenvectors coalesce"
        )),
        other => other,
    })?;
    let inverse = lu.inverse()?;

    let mut rights = ComplexMatrix::zeros(n);
    let mut lefts = ComplexMatrix::zeros(n);
    let mut rig = Vec::with_capacity(n);
    for i in 0..n {
        let r = stack.column(i);
        let l = inverse.row_as_ket(i);
        let rho = rigidity(&l, &r)?;
        if rho < TOL_EP {
            return Err(Error::AtExceptionalPoint(format!(
                "state {i} has rigidity {rho:.3e} below {TOL_EP:e}"
            )));
        }
        let peak = r[r.argmax_abs()];
        let phase = peak.conj() / peak.norm();
        let c = phase * (l.norm() / r.norm()).sqrt();
        for k in 0..n {
            rights[(k, i)] = r[k] * c;
            lefts[(i, k)] = inverse[(i, k)] / c;
        }
        let overlap: Complex64 = (0..n).map(|k| lefts[(i, k)] * rights[(k, i)]).sum();
        for k in 0..n {
            lefts[(i, k)] /= overlap;
        }
        rig.push(rho);
    }
    Ok(BiorthogonalSystem {
        values: raw.values.clone(),
        rights,
        lefts,
        rigidity: rig,
    })
}

/// Eigensolve followed by [`biorthogonalize`].
pub fn biorthogonal_system(h: &ComplexMatrix) -> Result<BiorthogonalSystem> {
    biorthogonalize(&eig_general(h)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateMatching {
    /// `permutation[i]` is the index in `next` of state `i` of `prev`.
    pub permutation: Vec<usize>,
    pub overlaps: Vec<f64>,
    /// Either side was close to an exceptional point, so the assignment may
    /// pair states across a coalescence.
    pub crossed_ep: bool,
}

/// Greedy assignment by maximal `|⟨L_i(prev)|R_j(next)⟩|`.
///
/// Ties within [`MATCH_TIE`] fall back to the smaller eigenvalue distance and
/// then to the lower index. Greedy is exact for the small parameter steps
/// sweeps use, but is not an optimal assignment in general. When either side
/// is near an exceptional point ties are resolved by index and the result is
/// flagged instead of rejected.
pub fn match_states(prev: &BiorthogonalSystem, next: &BiorthogonalSystem) -> Result<StateMatching> {
    let n = prev.dim();
    if next.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: next.dim(),
        });
    }
    let prod = prev.lefts.matmul(&next.rights)?;
    let overlap = |i: usize, j: usize| prod[(i, j)].norm();
    let gap = |i: usize, j: usize| (prev.values[i] - next.values[j]).norm();

    // Across a coalescence the states are symmetric mixtures and ties are
    // expected; the flag carries the warning instead of an error.
    let crossed_ep = prev.is_near_ep() || next.is_near_ep();
    for i in (0..n).filter(|_| !crossed_ep) {
        let mut row: Vec<usize> = (0..n).collect();
        row.sort_by(|&a, &b| overlap(i, b).total_cmp(&overlap(i, a)));
        if n > 1 {
            let (a, b) = (row[0], row[1]);
            if (overlap(i, a) - overlap(i, b)).abs() < MATCH_TIE && (gap(i, a) - gap(i, b)).abs() < MATCH_TIE {
                return Err(Error::AmbiguousMatching { row: i });
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    pairs.sort_by(|&(i1, j1), &(i2, j2)| {
        let (o1, o2) = (overlap(i1, j1), overlap(i2, j2));
        if (o1 - o2).abs() >= MATCH_TIE {
            o2.total_cmp(&o1)
        } else {
            gap(i1, j1).total_cmp(&gap(i2, j2)).then(i1.cmp(&i2)).then(j1.cmp(&j2))
        }
    });

    let mut permutation = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut overlaps = vec![0.0; n];
    for (i, j) in pairs {
        if permutation[i] == usize::MAX && !taken[j] {
            permutation[i] = j;
            taken[j] = true;
            overlaps[i] = overlap(i, j);
        }
    }
    Ok(StateMatching {
        permutation,
        overlaps,
        crossed_ep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, ONE};

    fn toy(r: f64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c64(0.0, r), ONE], vec![ONE, c64(0.0, -r)]]).unwrap()
    }

    #[test]
    fn hermitian_lefts_are_adjoint_rights() {
        let x = ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let sys = biorthogonal_system(&x).unwrap();
        for i in 0..2 {
            assert!((&sys.left(i) - &sys.right(i)).norm() < 1e-15);
            assert!((sys.rigidity()[i] - 1.0).abs() < 1e-15);
            assert!((sys.right(i).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn toy_unbroken_rigidity_is_cos_alpha() {
        let sys = biorthogonal_system(&toy(0.5)).unwrap();
        assert!(sys.biorthonormality_defect() < 1e-12);
        for &rho in sys.rigidity() {
            assert!((rho - 0.75f64.sqrt()).abs() < 1e-14);
        }
        // balanced gauge: ‖R‖^2 = 1/rigidity
        let r = sys.right(0);
        assert!((r.norm().powi(2) - 1.0 / 0.75f64.sqrt()).abs() < 1e-14);
        assert!((r.norm() - sys.left(0).norm()).abs() < 1e-14);
    }

    #[test]
    fn rigidity_examples() {
        let e1 = ComplexVector::new(vec![ONE, c64(0.0, 0.0)]);
        assert_eq!(rigidity(&e1, &e1).unwrap(), 1.0);
        assert_eq!(rigidity(&ComplexVector::zeros(2), &e1), Err(Error::ZeroVector));
        let sys = biorthogonal_system(&toy(0.8)).unwrap();
        assert!((sys.rigidity()[0] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn toy_at_ep_is_rejected() {
        assert!(matches!(
            biorthogonal_system(&toy(1.0)),
            Err(Error::AtExceptionalPoint(_))
        ));
        assert!(matches!(
            biorthogonal_system(&toy(-1.0)),
            Err(Error::AtExceptionalPoint(_))
        ));
    }

    #[test]
    fn largest_entry_is_real_positive() {
        let sys = biorthogonal_system(&toy(2.0)).unwrap();
        for i in 0..2 {
            let r = sys.right(i);
            let peak = r[r.argmax_abs()];
            assert!(peak.im.abs() < 1e-15 && peak.re > 0.0);
        }
    }

    #[test]
    fn matching_identity_and_small_step() {
        let a = biorthogonal_system(&toy(0.3)).unwrap();
        let m = match_states(&a, &a).unwrap();
        assert_eq!(m.permutation, vec![0, 1]);
        assert!(!m.crossed_ep);
        let b = biorthogonal_system(&toy(0.3001)).unwrap();
        assert_eq!(match_states(&a, &b).unwrap().permutation, vec![0, 1]);
    }

    #[test]
    fn matching_across_ep_is_flagged() {
        // rigidity sqrt(1 - 0.999^2) ≈ 0.0447 sits below the near-EP flag
        let a = biorthogonal_system(&toy(0.999)).unwrap();
        let b = biorthogonal_system(&toy(1.001)).unwrap();
        assert!(a.min_rigidity() > TOL_EP && a.min_rigidity() < NEAR_EP);
        let m = match_states(&a, &b).unwrap();
        assert!(m.crossed_ep);
        let mut sorted = m.permutation.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1]);
    }

    #[test]
    fn degenerate_hermitian_is_ambiguous() {
        let h = ComplexMatrix::identity(2);
        let sys = biorthogonal_system(&h).unwrap();
        let rotated = biorthogonalize(&RawEigenSystem {
            values: vec![ONE, ONE],
            right_vectors: ComplexMatrix::from_real(
                2,
                &[0.5f64.sqrt(), 0.5f64.sqrt(), 0.5f64.sqrt(), -(0.5f64.sqrt())],
            )
            .unwrap(),
            converged: vec![true, true],
        })
        .unwrap();
        assert_eq!(match_states(&sys, &rotated), Err(Error::AmbiguousMatching { row: 0 }));
    }
}

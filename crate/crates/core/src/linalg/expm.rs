use super::{c64, eig_general, ComplexMatrix, ComplexVector, LuDecomposition};
use crate::error::Result;

/// Eigenvector stacks with condition estimate above this use the Taylor path.
const MAX_EIGEN_CONDITION: f64 = 1e8;

/// `exp(a)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let norm = a.norm_inf();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a.scale(c64(0.5f64.powi(squarings), 0.0));
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=40 {
        term = term.matmul(&b).expect("square").scale(c64(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.norm() <= f64::EPSILON * 1e-2 * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum).expect("square");
    }
    sum
}

/// `exp(−i h t) · v`.
///
/// Uses the eigendecomposition when the eigenvector stack is well conditioned
/// and falls back to [`expm`] otherwise (near or at an exceptional point).
pub fn expm_action(h: &ComplexMatrix, t: f64, v: &ComplexVector) -> Result<ComplexVector> {
    if v.dim() != h.dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: h.dim(),
            found: v.dim(),
        });
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let sys = eig_general(h)?;
    let vecs = &sys.right_vectors;
    if let Ok(lu) = LuDecomposition::factor(vecs) {
        let inv = lu.inverse()?;
        if vecs.norm() * inv.norm() < MAX_EIGEN_CONDITION {
            let coeffs = inv.mul_vec(v)?;
            let n = h.dim();
            let mut out = ComplexVector::zeros(n);
            for j in 0..n {
                let w = coeffs[j] * (-super::I * sys.values[j] * t).exp();
                for i in 0..n {
                    out[i] += vecs[(i, j)] * w;
                }
            }
            return Ok(out);
        }
    }
    let gen = h.scale(c64(0.0, -t));
    expm(&gen).mul_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, I, ONE, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy(r: f64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c64(0.0, r), ONE], vec![ONE, c64(0.0, -r)]]).unwrap()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
        ComplexVector::new(
            (0..n)
                .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn zero_time_is_identity() {
        let v = ComplexVector::new(vec![c64(0.3, 0.1), c64(-1.0, 2.0)]);
        assert_eq!(expm_action(&toy(0.4), 0.0, &v).unwrap(), v);
    }

    #[test]
    fn hermitian_evolution_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 5;
        let a = ComplexMatrix::new(
            n,
            (0..n * n)
                .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let h = a.hermitian_part();
        let v = random_vec(&mut rng, n);
        for t in [0.1, 1.0, 7.5] {
            let out = expm_action(&h, t, &v).unwrap();
            assert!((out.norm() - v.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn broken_toy_eigenvector_grows() {
        // eigenvalue +i sqrt(3): exp(-i E t) = exp(sqrt(3) t)
        let h = toy(2.0);
        let sys = eig_general(&h).unwrap();
        let v = sys.vector(1);
        assert!((sys.values[1] - c64(0.0, 3f64.sqrt())).norm() < 1e-14);
        let t = 0.7;
        let out = expm_action(&h, t, &v).unwrap();
        let expected = v.scale(c64((3f64.sqrt() * t).exp(), 0.0));
        assert!((&out - &expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn taylor_matches_eigen_path() {
        let h = toy(0.3);
        let v = ComplexVector::new(vec![ONE, c64(0.0, 1.0)]);
        let t = 2.3;
        let via_eig = expm_action(&h, t, &v).unwrap();
        let via_taylor = expm(&h.scale(-I * t)).mul_vec(&v).unwrap();
        assert!((&via_eig - &via_taylor).norm() < 1e-12);
    }

    #[test]
    fn defective_matrix_uses_taylor() {
        // at the EP H^2 = 0, so exp(-iHt) = I - iHt exactly
        let h = toy(1.0);
        let v = ComplexVector::new(vec![ONE, ZERO]);
        let t = 1.5;
        let out = expm_action(&h, t, &v).unwrap();
        let hv = h.mul_vec(&v).unwrap();
        let expected = &v - &hv.scale(I * t);
        assert!((&out - &expected).norm() < 1e-12);
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 4;
        let h = ComplexMatrix::new(
            n,
            (0..n * n)
                .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)))
                .collect(),
        )
        .unwrap();
        let v = random_vec(&mut rng, n);
        let (t1, t2) = (0.4, 1.1);
        let joint = expm_action(&h, t1 + t2, &v).unwrap();
        let split = expm_action(&h, t2, &expm_action(&h, t1, &v).unwrap()).unwrap();
        assert!((&joint - &split).norm() <= 1e-9 * joint.norm());
    }
}

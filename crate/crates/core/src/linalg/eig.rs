//! General (non-Hermitian) complex eigensolver.
//!
//! `dim == 2` is solved in closed form. Larger matrices are reduced to upper
//! Hessenberg form with Householder reflectors and then driven to complex Schur
//! form `A = Z T Z†` by single-shift QR sweeps (Wilkinson shift, Givens
//! rotations, deflation on negligible subdiagonals). Right eigenvectors come from
//! back-substitution on `T`, mapped back through `Z`.

use std::cmp::Ordering;

use super::{Complex64, ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::error::{Error, Result};

/// QR sweep budget is `MAX_QR_ITERS_PER_DIM * dim` over the whole reduction.
pub const MAX_QR_ITERS_PER_DIM: usize = 30;

/// Eigenvalues with unnormalized (unit-norm) right eigenvectors in the columns
/// of `right_vectors`, in canonical order: ascending real part, then imaginary.
#[derive(Debug, Clone)]
pub struct RawEigenSystem {
    pub values: Vec<Complex64>,
    pub right_vectors: ComplexMatrix,
    pub converged: Vec<bool>,
}

impl RawEigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> ComplexVector {
        self.right_vectors.column(j)
    }

    /// `max_j ‖H v_j − E_j v_j‖ / (‖H‖ ‖v_j‖)`.
    pub fn max_relative_residual(&self, h: &ComplexMatrix) -> f64 {
        let hn = h.norm().max(f64::MIN_POSITIVE);
        (0..self.dim())
            .map(|j| {
                let v = self.vector(j);
                let hv = h.mul_vec(&v).expect("dimension checked at construction");
                let r = &hv - &v.scale(self.values[j]);
                r.norm() / (hn * v.norm())
            })
            .fold(0.0, f64::max)
    }
}

fn canonical_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Sorts eigenvalues ascending by (real, imaginary) and permutes the vector
/// columns alongside.
pub fn sort_canonical(values: &mut [Complex64], vectors: &mut ComplexMatrix) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| canonical_cmp(&values[i], &values[j]).then(i.cmp(&j)));
    let old_vals = values.to_vec();
    let old_vecs = vectors.clone();
    for (new, &old) in order.iter().enumerate() {
        values[new] = old_vals[old];
        for i in 0..n {
            vectors[(i, new)] = old_vecs[(i, old)];
        }
    }
}

/// All eigenvalues of `h` with right eigenvectors.
///
/// Never fails on defective input: at an exceptional point the returned
/// eigenvectors are (numerically) parallel, which downstream biorthogonalization
/// detects.
pub fn eig_general(h: &ComplexMatrix) -> Result<RawEigenSystem> {
    let n = h.dim();
    let (mut values, mut vectors) = match n {
        1 => (vec![h[(0, 0)]], ComplexMatrix::identity(1)),
        2 => eig_2x2(h),
        _ => {
            let (hess, q) = hessenberg(h);
            let (t, z) = schur(hess, q)?;
            let x = triangular_eigenvectors(&t);
            let mut v = z.matmul(&x)?;
            normalize_columns(&mut v);
            ((0..n).map(|i| t[(i, i)]).collect(), v)
        }
    };
    sort_canonical(&mut values, &mut vectors);
    Ok(RawEigenSystem {
        values,
        right_vectors: vectors,
        converged: vec![true; n],
    })
}

fn eig_2x2(h: &ComplexMatrix) -> (Vec<Complex64>, ComplexMatrix) {
    let (a, b, c, d) = (h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
    let mean = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mut vectors = ComplexMatrix::zeros(2);
    let mut values = Vec::with_capacity(2);
    for (col, sign) in [(0usize, 1.0), (1usize, -1.0)] {
        let s_disc = disc * sign;
        values.push(mean + s_disc);
        // (b, E - a) and (E - d, c) both span the eigenspace; E - a and E - d are
        // formed from the half-difference so no large terms cancel.
        let u1 = [b, s_disc - half_diff];
        let u2 = [s_disc + half_diff, c];
        let n1 = (u1[0].norm_sqr() + u1[1].norm_sqr()).sqrt();
        let n2 = (u2[0].norm_sqr() + u2[1].norm_sqr()).sqrt();
        let (u, nrm) = if n1 >= n2 { (u1, n1) } else { (u2, n2) };
        if nrm > 0.0 && nrm.is_finite() {
            vectors[(0, col)] = u[0] / nrm;
            vectors[(1, col)] = u[1] / nrm;
        } else {
            // scalar matrix: every vector is an eigenvector
            vectors[(col, col)] = ONE;
        }
    }
    (values, vectors)
}

/// Householder reduction `A = Q H Q†` with `H` upper Hessenberg.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let xnorm = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // left: rows k+1.., H ← (I − 2vv†) H
        for j in k..n {
            let dot: Complex64 = v.iter().enumerate().map(|(p, vp)| vp.conj() * h[(k + 1 + p, j)]).sum();
            for (p, vp) in v.iter().enumerate() {
                h[(k + 1 + p, j)] -= vp * dot * 2.0;
            }
        }
        // right: columns k+1.., H ← H (I − 2vv†), same for Q
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let dot: Complex64 = v.iter().enumerate().map(|(p, vp)| m[(i, k + 1 + p)] * vp).sum();
                for (p, vp) in v.iter().enumerate() {
                    m[(i, k + 1 + p)] -= dot * vp.conj() * 2.0;
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Givens rotation `G = [[c, s], [−s̄, c]]` with `G (a, b)ᵀ = (r, 0)ᵀ`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let mean = (a + d) * 0.5;
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let e1 = mean + disc;
    let e2 = mean - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// Drives a Hessenberg matrix to upper triangular Schur form, accumulating the
/// unitary factor into `z`.
fn schur(mut h: ComplexMatrix, mut z: ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = h.dim();
    let max_iters = MAX_QR_ITERS_PER_DIM * n;
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        // find the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= eps * diag {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if total >= max_iters {
            return Err(Error::NoConvergence { iterations: total });
        }
        total += 1;
        since_deflation += 1;

        let shift = if since_deflation.is_multiple_of(10) {
            h[(hi, hi)] + h[(hi, hi - 1)].norm() * 0.75
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
            rotations.push((k, c, s));
        }
        for &(k, c, s) in &rotations {
            for i in 0..=(k + 1) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s.conj();
                z[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok((h, z))
}

/// Columns are eigenvectors of the upper triangular `t`.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.dim();
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let degenerate = 1e-12 * tnorm;
    let mut x = ComplexMatrix::zeros(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut col = vec![ZERO; n];
        col[k] = ONE;
        for j in (0..k).rev() {
            let sum: Complex64 = ((j + 1)..=k).map(|m| t[(j, m)] * col[m]).sum();
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < degenerate {
                let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if sum.norm() <= degenerate * scale {
                    // decoupled copy of a repeated eigenvalue
                    col[j] = ZERO;
                    continue;
                }
            }
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            col[j] = -sum / denom;
            // rescale to keep entries bounded near coalescence
            let big = col[j].norm();
            if big > 1e150 {
                for z in col.iter_mut() {
                    *z /= big;
                }
            }
        }
        for i in 0..n {
            x[(i, k)] = col[i];
        }
    }
    x
}

fn normalize_columns(v: &mut ComplexMatrix) {
    let n = v.dim();
    for j in 0..n {
        let nrm = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for i in 0..n {
                v[(i, j)] /= nrm;
            }
        }
    }
}

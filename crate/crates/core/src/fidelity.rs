//! Generalized fidelity and its finite-difference susceptibility.
//!
//! The metric form `⟨⟨R₁|R₂⟩⟩⟨⟨R₂|R₁⟩⟩` and the biorthogonal form
//! `⟨L₁|R₂⟩⟨L₂|R₁⟩` coincide when each metric is `Σ_i |L_i⟩⟨L_i|`. The
//! susceptibility is `(1 − F)/ε²`. It is complex in general; exceptional points
//! show up as `Re χ → −∞`.

use serde::{Deserialize, Serialize};

use crate::biortho::{biorthogonal_system, match_states, BiorthogonalSystem};
use crate::error::{Error, Result};
use crate::linalg::{c64, expm_action, Complex64, ComplexVector, ONE};
use crate::metric::{evolve_metric, metric_inner, MetricOperator};
use crate::models::Family;

/// Tolerance on `⟨ψ|G|ψ⟩ = 1` and `⟨L|R⟩ = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// `|1 − F|` above this means the step left the quadratic regime.
pub const MAX_DEVIATION: f64 = 0.5;
/// Sectors whose closed-form discriminant is below this are treated as coalesced.
pub const DISCRIMINANT_GUARD: f64 = 1e-12;
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityForm {
    Metric,
    Biorthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityResult {
    pub f: Complex64,
    pub form: FidelityForm,
    pub epsilon: Option<f64>,
}

impl FidelityResult {
    /// `|F| > 1` can only come from the two metrics differing.
    pub fn exceeds_unity(&self) -> bool {
        self.f.norm() > 1.0
    }
}

fn check_unit(value: Complex64) -> Result<()> {
    if (value - ONE).norm() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm: value.norm() });
    }
    Ok(())
}

/// `(ψ₁† G₁ ψ₂)(ψ₂† G₂ ψ₁)` for metric-normalized states.
pub fn fidelity_metric(
    psi1: &ComplexVector,
    g1: &MetricOperator,
    psi2: &ComplexVector,
    g2: &MetricOperator,
) -> Result<FidelityResult> {
    check_unit(metric_inner(g1, psi1, psi1)?)?;
    check_unit(metric_inner(g2, psi2, psi2)?)?;
    let f = metric_inner(g1, psi1, psi2)? * metric_inner(g2, psi2, psi1)?;
    Ok(FidelityResult {
        f,
        form: FidelityForm::Metric,
        epsilon: None,
    })
}

/// `⟨l₁|r₂⟩⟨l₂|r₁⟩` for biorthonormal pairs. Left vectors are passed as kets.
pub fn fidelity_biortho(
    l1: &ComplexVector,
    r1: &ComplexVector,
    l2: &ComplexVector,
    r2: &ComplexVector,
) -> Result<FidelityResult> {
    for (l, r) in [(l1, r1), (l2, r2)] {
        if l.dim() != r.dim() {
            return Err(Error::DimensionMismatch {
                expected: r.dim(),
                found: l.dim(),
            });
        }
        let overlap = l.inner(r);
        if (overlap - ONE).norm() > NORMALIZATION_TOL {
            return Err(Error::NotBiorthonormal {
                overlap: format!("{overlap}"),
            });
        }
    }
    if l1.dim() != l2.dim() {
        return Err(Error::DimensionMismatch {
            expected: l1.dim(),
            found: l2.dim(),
        });
    }
    Ok(FidelityResult {
        f: l1.inner(r2) * l2.inner(r1),
        form: FidelityForm::Biorthogonal,
        epsilon: None,
    })
}

/// `1 − ⟨L₁|R₂⟩⟨L₂|R₁⟩ / (⟨L₁|R₁⟩⟨L₂|R₂⟩)` without the cancellation of the
/// naive form.
///
/// The second pair is first rescaled so that `⟨L₁|R₂⟩ = ⟨L₁|R₁⟩`, which makes
/// `ΔR = R₂ − R₁` and `ΔL = L₂ − L₁` of order ε. Then
/// `n₁n₂ − ab = n₁⟨ΔL|ΔR⟩ − ⟨L₁|ΔR⟩⟨ΔL|R₁⟩` with every term formed from
/// small differences.
pub fn one_minus_fidelity(
    l1: &ComplexVector,
    r1: &ComplexVector,
    l2: &ComplexVector,
    r2: &ComplexVector,
) -> Result<Complex64> {
    let n1 = l1.inner(r1);
    let n2 = l2.inner(r2);
    let a = l1.inner(r2);
    if n1.norm() == 0.0 || n2.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !(a.norm() > f64::MIN_POSITIVE) {
        return Err(Error::StepTooLarge { deviation: 1.0 });
    }
    let c = n1 / a;
    let r2 = r2.scale(c);
    let l2 = l2.scale(c.inv().conj());
    let dr = &r2 - r1;
    let dl = &l2 - l1;
    let num = n1 * dl.inner(&dr) - l1.inner(&dr) * dl.inner(r1);
    Ok(num / (n1 * n2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// `(λ, λ + ε)`
    #[default]
    Forward,
    /// `(λ − ε/2, λ + ε/2)`, a diagnostic variant with an `O(ε²)` error.
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityOptions {
    pub epsilon: f64,
    pub richardson: bool,
    pub stencil: Stencil,
}

impl Default for SusceptibilityOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            richardson: true,
            stencil: Stencil::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityResult {
    pub chi: Complex64,
    pub re_chi: f64,
    pub epsilon_used: f64,
    pub richardson: bool,
    pub stencil: Stencil,
    /// Fidelity at the full step ε (product over sectors).
    pub fidelity: Complex64,
    /// Smallest phase rigidity among the tracked states.
    pub rigidity: f64,
}

/// Per-sector eigensystems of a family at one parameter value.
#[derive(Debug, Clone)]
pub struct FamilyPoint {
    pub lambda: f64,
    pub systems: Vec<BiorthogonalSystem>,
    discriminants: Vec<Option<f64>>,
}

impl FamilyPoint {
    pub fn new(model: &dyn Family, lambda: f64) -> Result<Self> {
        let discriminants: Vec<Option<f64>> = (0..model.sectors()).map(|s| model.discriminant(lambda, s)).collect();
        let systems = (0..model.sectors())
            .map(|s| {
                if let Some(d) = discriminants[s] {
                    if d.abs() < DISCRIMINANT_GUARD {
                        return Err(Error::AtExceptionalPoint(format!(
                            "{} sector {s} coalesces at λ = {lambda}",
                            model.name()
                        )));
                    }
                }
                biorthogonal_system(&model.block(lambda, s)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambda,
            systems,
            discriminants,
        })
    }

    pub fn min_rigidity(&self) -> f64 {
        self.systems
            .iter()
            .map(|s| s.min_rigidity())
            .fold(f64::INFINITY, f64::min)
    }

    /// Rigidity of the selected band of every sector, minimized.
    pub fn band_rigidity(&self, bands: &[usize]) -> f64 {
        self.systems
            .iter()
            .zip(bands)
            .map(|(s, &b)| s.rigidity()[b])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Summed `1 − F_k` over sectors and the many-body `1 − Π F_k`, tracking
/// `bands[k]` of `from` into `to` by state matching.
fn sector_deviation(from: &FamilyPoint, to: &FamilyPoint, bands: &[usize]) -> Result<(Complex64, Complex64)> {
    let crosses = from
        .discriminants
        .iter()
        .zip(&to.discriminants)
        .any(|pair| matches!(pair, (Some(a), Some(b)) if a.signum() != b.signum()));
    if crosses {
        return Err(Error::AtExceptionalPoint(format!(
            "step from λ = {} to {} crosses a coalescence",
            from.lambda, to.lambda
        )));
    }
    let mut sum = c64(0.0, 0.0);
    let mut total = c64(0.0, 0.0);
    for ((a, b), &band) in from.systems.iter().zip(&to.systems).zip(bands) {
        if band >= a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: band + 1,
            });
        }
        let j = match_states(a, b)?.permutation[band];
        let d = one_minus_fidelity(&a.left(band), &a.right(band), &b.left(j), &b.right(j))?;
        sum += d;
        // 1 − (1 − D)(1 − d) without forming the product near 1
        total = total + d - total * d;
    }
    if total.norm() > MAX_DEVIATION {
        return Err(Error::StepTooLarge {
            deviation: total.norm(),
        });
    }
    Ok((sum, total))
}

fn raw_chi(
    model: &dyn Family,
    from: &FamilyPoint,
    to: &FamilyPoint,
    bands: &[usize],
    eps: f64,
) -> Result<(Complex64, Complex64)> {
    let (sum, total) = sector_deviation(from, to, bands)?;
    Ok((sum / (eps * eps * model.density_norm()), ONE - total))
}

/// Finite-difference susceptibility of `band` at `lambda` with the default
/// forward stencil.
pub fn susceptibility_fd(
    model: &dyn Family,
    lambda: f64,
    band: usize,
    epsilon: f64,
    use_richardson: bool,
) -> Result<SusceptibilityResult> {
    susceptibility_with(
        model,
        lambda,
        band,
        &SusceptibilityOptions {
            epsilon,
            richardson: use_richardson,
            stencil: Stencil::Forward,
        },
    )
}

/// Like [`susceptibility_fd`] with an explicit stencil.
///
/// For multi-sector families the reported `χ` is `Σ_k (1 − F_k)/ε²` divided by
/// the family's density norm, the `ε²` coefficient of `1 − Π_k F_k`.
///
/// Richardson extrapolation combines steps ε and ε/2. The forward stencil has
/// a first-order error, so the combination is `2χ(ε/2) − χ(ε)`; the central
/// stencil is second order and uses `(4χ(ε/2) − χ(ε))/3`.
pub fn susceptibility_with(
    model: &dyn Family,
    lambda: f64,
    band: usize,
    opts: &SusceptibilityOptions,
) -> Result<SusceptibilityResult> {
    susceptibility_sectors(model, lambda, &vec![band; model.sectors()], opts)
}

/// Like [`susceptibility_with`] with a separate band index per sector.
pub fn susceptibility_sectors(
    model: &dyn Family,
    lambda: f64,
    bands: &[usize],
    opts: &SusceptibilityOptions,
) -> Result<SusceptibilityResult> {
    if bands.len() != model.sectors() {
        return Err(Error::DimensionMismatch {
            expected: model.sectors(),
            found: bands.len(),
        });
    }
    let eps = opts.epsilon;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidSpec(format!("epsilon must be positive, got {eps}")));
    }
    let (chi_full, fid, rigidity, chi_half) = match opts.stencil {
        Stencil::Forward => {
            let base = FamilyPoint::new(model, lambda)?;
            let far = FamilyPoint::new(model, lambda + eps)?;
            let (chi, fid) = raw_chi(model, &base, &far, bands, eps)?;
            let mut rig = base.band_rigidity(bands).min(far.min_rigidity());
            let half = if opts.richardson {
                let mid = FamilyPoint::new(model, lambda + 0.5 * eps)?;
                rig = rig.min(mid.min_rigidity());
                Some(raw_chi(model, &base, &mid, bands, 0.5 * eps)?.0)
            } else {
                None
            };
            (chi, fid, rig, half)
        }
        Stencil::Central => {
            let lo = FamilyPoint::new(model, lambda - 0.5 * eps)?;
            let hi = FamilyPoint::new(model, lambda + 0.5 * eps)?;
            let (chi, fid) = raw_chi(model, &lo, &hi, bands, eps)?;
            let mut rig = lo.band_rigidity(bands).min(hi.min_rigidity());
            let half = if opts.richardson {
                let lo2 = FamilyPoint::new(model, lambda - 0.25 * eps)?;
                let hi2 = FamilyPoint::new(model, lambda + 0.25 * eps)?;
                rig = rig.min(lo2.min_rigidity()).min(hi2.min_rigidity());
                Some(raw_chi(model, &lo2, &hi2, bands, 0.5 * eps)?.0)
            } else {
                None
            };
            (chi, fid, rig, half)
        }
    };
    let chi = match (chi_half, opts.stencil) {
        (None, _) => chi_full,
        (Some(h), Stencil::Forward) => h * 2.0 - chi_full,
        (Some(h), Stencil::Central) => (h * 4.0 - chi_full) / 3.0,
    };
    Ok(SusceptibilityResult {
        chi,
        re_chi: chi.re,
        epsilon_used: eps,
        richardson: opts.richardson,
        stencil: opts.stencil,
        fidelity: fid,
        rigidity,
    })
}

/// Evolves the tracked states at `λ` and `λ + ε` under their own Hamiltonians
/// and their metrics alongside, and returns `max_t |F(t) − F(0)| / |F(0)|`
/// over all sectors.
pub fn fidelity_time_invariance_check(
    model: &dyn Family,
    lambda: f64,
    band: usize,
    epsilon: f64,
    t_grid: &[f64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in 0..model.sectors() {
        let h1 = model.block(lambda, s)?;
        let h2 = model.block(lambda + epsilon, s)?;
        let sys1 = biorthogonal_system(&h1)?;
        let sys2 = biorthogonal_system(&h2)?;
        let j = match_states(&sys1, &sys2)?.permutation[band];
        let (r1, r2) = (sys1.right(band), sys2.right(j));
        let at = |t: f64| -> Result<Complex64> {
            let g1 = evolve_metric(&sys1, t)?;
            let g2 = evolve_metric(&sys2, t)?;
            let p1 = expm_action(&h1, t, &r1)?;
            let p2 = expm_action(&h2, t, &r2)?;
            Ok(metric_inner(&g1, &p1, &p2)? * metric_inner(&g2, &p2, &p1)?)
        };
        let f0 = at(0.0)?;
        for &t in t_grid {
            worst = worst.max((at(t)? - f0).norm() / f0.norm());
        }
    }
    Ok(worst)
}

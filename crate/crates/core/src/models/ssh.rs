use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, Complex64, ComplexMatrix};

use super::Family;

/// `|ξ_k|² − u²` below this (in magnitude) makes the closed-form density undefined.
pub const DENSITY_EP_GUARD: f64 = 1e-12;

/// Non-Hermitian SSH chain: gain `+iu` on sublattice ↑, loss `−iu` on ↓,
/// intra-cell hopping `v`, inter-cell hopping `w`, `N` cells, periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SshParams {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub n_cells: usize,
}

impl SshParams {
    pub fn new(u: f64, v: f64, w: f64, n_cells: usize) -> Result<Self> {
        let p = Self { u, v, w, n_cells };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u.is_finite() && self.v.is_finite() && self.w.is_finite()) {
            return Err(Error::InvalidSpec("SSH parameters must be finite".into()));
        }
        if self.u < 0.0 {
            return Err(Error::InvalidSpec(format!("u must be non-negative, got {}", self.u)));
        }
        if self.n_cells < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 cells, got {}",
                self.n_cells
            )));
        }
        Ok(())
    }
}

/// `k = 2π m / N`.
pub fn ssh_momentum(m: usize, n_cells: usize) -> f64 {
    2.0 * PI * m as f64 / n_cells as f64
}

/// `|ξ_k|² − u²` written as `(v + w cos k)² + (w sin k)² − u²`, which stays
/// accurate where `ξ_k` is small.
pub fn ssh_discriminant(u: f64, v: f64, w: f64, k: f64) -> f64 {
    let (s, c) = k.sin_cos();
    let a = v + w * c;
    let b = w * s;
    a * a + b * b - u * u
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochBlock {
    pub k: f64,
    pub xi_k: Complex64,
    pub block: ComplexMatrix,
    /// `[ε_k^−, ε_k^+]`
    pub bands: [Complex64; 2],
}

pub fn ssh_bloch(p: &SshParams, k: f64) -> BlochBlock {
    let xi = c64(p.v, 0.0) + c64(0.0, k).exp() * p.w;
    let block =
        ComplexMatrix::from_rows(&[vec![c64(0.0, p.u), xi], vec![xi.conj(), c64(0.0, -p.u)]]).expect("finite 2x2");
    let root = c64(ssh_discriminant(p.u, p.v, p.w, k), 0.0).sqrt();
    BlochBlock {
        k,
        xi_k: xi,
        block,
        bands: [-root, root],
    }
}

/// The `2N × 2N` single-particle matrix. Site `2n` is ↑ and `2n + 1` is ↓ of cell `n`.
pub fn ssh_realspace(p: &SshParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let n = 2 * p.n_cells;
    let mut h = ComplexMatrix::zeros(n);
    for cell in 0..p.n_cells {
        let (up, down) = (2 * cell, 2 * cell + 1);
        let next_up = (2 * cell + 2) % n;
        h[(up, up)] = c64(0.0, p.u);
        h[(down, down)] = c64(0.0, -p.u);
        h[(up, down)] += c64(p.v, 0.0);
        h[(down, up)] += c64(p.v, 0.0);
        h[(down, next_up)] += c64(p.w, 0.0);
        h[(next_up, down)] += c64(p.w, 0.0);
    }
    Ok(h)
}

/// Ground-state susceptibility density with respect to `w`,
/// `(1/N) Σ_k (v² sin²k − u²) / (4 (|ξ_k|² − u²)²)`, summed in ascending `k`.
pub fn ssh_chi0_density(p: &SshParams) -> Result<f64> {
    p.validate()?;
    let mut sum = 0.0;
    for m in 0..p.n_cells {
        let k = ssh_momentum(m, p.n_cells);
        let d = ssh_discriminant(p.u, p.v, p.w, k);
        if d.abs() < DENSITY_EP_GUARD {
            return Err(Error::AtExceptionalPoint(format!(
                "band touching at k = {k} (m = {m}): |xi_k|^2 - u^2 = {d:.3e}"
            )));
        }
        let s = p.v * k.sin();
        sum += (s * s - p.u * p.u) / (4.0 * d * d);
    }
    Ok(sum / p.n_cells as f64)
}

/// An inter-cell hopping at which one momentum pair coalesces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SshEp {
    /// Representative momentum in `[0, π]`.
    pub k: f64,
    pub w: f64,
    /// 2 when `k` and `2π − k` are distinct grid momenta.
    pub multiplicity: usize,
}

/// Positive roots `w = −v cos k ± √(u² − v² sin²k)` over the momentum grid,
/// sorted by `w`. Empty for `u = 0`, where band touchings are Hermitian
/// degeneracies rather than coalescences.
pub fn ssh_ep_locations(u: f64, v: f64, n_cells: usize) -> Vec<SshEp> {
    let mut out = Vec::new();
    if !(u > 0.0) || n_cells == 0 {
        return out;
    }
    for m in 0..=n_cells / 2 {
        let k = ssh_momentum(m, n_cells);
        let (s, c) = k.sin_cos();
        let disc = u * u - (v * s) * (v * s);
        if disc < 0.0 {
            continue;
        }
        let root = disc.sqrt();
        let multiplicity = if m == 0 || 2 * m == n_cells { 1 } else { 2 };
        let mut ws = vec![-v * c - root];
        if root > 0.0 {
            ws.push(-v * c + root);
        }
        for w in ws.into_iter().filter(|w| *w > 0.0) {
            out.push(SshEp { k, w, multiplicity });
        }
    }
    out.sort_by(|a, b| a.w.total_cmp(&b.w));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SshPhase {
    PtSymmetricTopological,
    PtBroken,
    PtSymmetricTrivial,
    Boundary,
}

impl SshPhase {
    pub fn label(self) -> &'static str {
        match self {
            SshPhase::PtSymmetricTopological => "pt-symmetric-topological",
            SshPhase::PtBroken => "pt-broken",
            SshPhase::PtSymmetricTrivial => "pt-symmetric-trivial",
            SshPhase::Boundary => "boundary",
        }
    }
}

/// Infinite-chain phase of `(u, v, w)`.
pub fn ssh_phase(u: f64, v: f64, w: f64) -> SshPhase {
    let (lo, hi) = (v - u, v + u);
    if w > hi {
        SshPhase::PtSymmetricTopological
    } else if w < lo {
        SshPhase::PtSymmetricTrivial
    } else if w > lo && w < hi {
        SshPhase::PtBroken
    } else {
        SshPhase::Boundary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SshParam {
    U,
    V,
    W,
}

impl std::str::FromStr for SshParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" => Ok(SshParam::U),
            "v" => Ok(SshParam::V),
            "w" => Ok(SshParam::W),
            other => Err(Error::Parse(format!("unknown SSH parameter {other:?}"))),
        }
    }
}

/// SSH chain swept along one of `u`, `v`, `w`; sector `m` is the Bloch block at
/// `k = 2π m / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshFamily {
    pub base: SshParams,
    pub param: SshParam,
}

impl SshFamily {
    pub fn new(base: SshParams, param: SshParam) -> Result<Self> {
        base.validate()?;
        Ok(Self { base, param })
    }

    pub fn along_w(base: SshParams) -> Result<Self> {
        Self::new(base, SshParam::W)
    }

    pub fn params_at(&self, lambda: f64) -> SshParams {
        let mut p = self.base;
        match self.param {
            SshParam::U => p.u = lambda,
            SshParam::V => p.v = lambda,
            SshParam::W => p.w = lambda,
        }
        p
    }
}

impl Family for SshFamily {
    fn name(&self) -> String {
        "ssh".into()
    }

    fn sectors(&self) -> usize {
        self.base.n_cells
    }

    fn block(&self, lambda: f64, sector: usize) -> Result<ComplexMatrix> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        let p = self.params_at(lambda);
        Ok(ssh_bloch(&p, ssh_momentum(sector, p.n_cells)).block)
    }

    fn density_norm(&self) -> f64 {
        self.base.n_cells as f64
    }

    fn discriminant(&self, lambda: f64, sector: usize) -> Option<f64> {
        let p = self.params_at(lambda);
        Some(ssh_discriminant(p.u, p.v, p.w, ssh_momentum(sector, p.n_cells)))
    }

    fn min_band_gap(&self, lambda: f64) -> Result<f64> {
        let p = self.params_at(lambda);
        Ok((0..p.n_cells)
            .map(|m| 2.0 * ssh_discriminant(p.u, p.v, p.w, ssh_momentum(m, p.n_cells)).abs().sqrt())
            .fold(f64::INFINITY, f64::min))
    }
}

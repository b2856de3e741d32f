use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biortho::{match_states, NEAR_EP};
use crate::error::{Error, Result};
use crate::fidelity::{susceptibility_sectors, FamilyPoint, Stencil, SusceptibilityOptions, DEFAULT_EPSILON};
use crate::linalg::{c64, Complex64};
use crate::models::{
    ssh_bloch, ssh_chi0_density, ssh_momentum, Family, LinearFamily, SshFamily, SshParam, SshParams, ToyFamily,
};

/// How the band index is carried from one grid point to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tracking {
    /// Follow the state through [`match_states`] from the first grid point.
    Continuous,
    /// Use the same index in canonical eigenvalue order at every point. For
    /// the SSH chain index 0 is the lower band `ε_k^−`, the filled one.
    Canonical,
}

#[derive(Debug, Clone)]
pub enum ModelSpec {
    Toy,
    Ssh { params: SshParams, param: SshParam },
    Linear(LinearFamily),
}

impl ModelSpec {
    pub fn family(&self) -> Result<Box<dyn Family>> {
        Ok(match self {
            ModelSpec::Toy => Box::new(ToyFamily),
            ModelSpec::Ssh { params, param } => Box::new(SshFamily::new(*params, *param)?),
            ModelSpec::Linear(f) => Box::new(f.clone()),
        })
    }

    pub fn default_tracking(&self) -> Tracking {
        match self {
            ModelSpec::Ssh { .. } => Tracking::Canonical,
            _ => Tracking::Continuous,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub model: ModelSpec,
    pub grid: Vec<f64>,
    pub band: usize,
    pub epsilon: f64,
    pub richardson: bool,
    pub stencil: Stencil,
    pub tracking: Tracking,
}

impl SweepSpec {
    pub fn new(model: ModelSpec, grid: Vec<f64>) -> Self {
        let tracking = model.default_tracking();
        Self {
            model,
            grid,
            band: 0,
            epsilon: DEFAULT_EPSILON,
            richardson: true,
            stencil: Stencil::Forward,
            tracking,
        }
    }

    /// A single grid point is accepted so that one parameter value can be
    /// probed on its own.
    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.grid)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        let family = self.model.family()?;
        let dim = family.block(self.grid[0], 0)?.dim();
        if self.band >= dim {
            return Err(Error::InvalidSpec(format!(
                "band {} out of range for dimension {dim}",
                self.band
            )));
        }
        Ok(())
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidSpec("grid contains non-finite values".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSpec("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `min, min + step, …` up to `max` (inclusive within a relative 1e-9 of a
/// step), with each value rounded to 12 significant digits so that decimal
/// inputs land on the intended decimal values.
pub fn linear_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(Error::InvalidSpec("grid bounds must be finite".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidSpec(format!("step must be positive, got {step}")));
    }
    if max < min {
        return Err(Error::InvalidSpec(format!("empty grid: max {max} < min {min}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(Error::InvalidSpec(format!("grid of {count} points is too large")));
    }
    let snap = |x: f64| -> f64 { format!("{x:.11e}").parse().expect("formatted float") };
    let grid: Vec<f64> = (0..count).map(|i| snap(min + i as f64 * step)).collect();
    validate_grid(&grid)?;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleStatus {
    Ok,
    NearEp,
    SkippedAtEp,
}

impl SampleStatus {
    pub fn label(self) -> &'static str {
        match self {
            SampleStatus::Ok => "ok",
            SampleStatus::NearEp => "near-ep",
            SampleStatus::SkippedAtEp => "skipped-at-ep",
        }
    }

    pub fn from_rigidity(rigidity: f64) -> Self {
        if rigidity < NEAR_EP {
            SampleStatus::NearEp
        } else {
            SampleStatus::Ok
        }
    }
}

impl std::str::FromStr for SampleStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(SampleStatus::Ok),
            "near-ep" => Ok(SampleStatus::NearEp),
            "skipped-at-ep" => Ok(SampleStatus::SkippedAtEp),
            other => Err(Error::Parse(format!("unknown status {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub lambda: f64,
    /// NaN when skipped.
    pub f: Complex64,
    /// NaN when skipped.
    pub chi: Complex64,
    pub rigidity: f64,
    pub status: SampleStatus,
    /// Why the sample was skipped.
    pub note: Option<String>,
}

impl Sample {
    pub fn skipped(lambda: f64, note: String) -> Self {
        let nan = c64(f64::NAN, f64::NAN);
        Self {
            lambda,
            f: nan,
            chi: nan,
            rigidity: f64::NAN,
            status: SampleStatus::SkippedAtEp,
            note: Some(note),
        }
    }

    pub fn re_chi(&self) -> f64 {
        self.chi.re
    }

    pub fn is_evaluated(&self) -> bool {
        self.status != SampleStatus::SkippedAtEp
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SusceptibilityCurve {
    pub samples: Vec<Sample>,
}

impl SusceptibilityCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.lambda).collect()
    }

    /// Evaluated sample with the largest `Re χ`.
    pub fn max_re_chi(&self) -> Option<&Sample> {
        self.samples
            .iter()
            .filter(|s| s.is_evaluated())
            .max_by(|a, b| a.re_chi().total_cmp(&b.re_chi()))
    }

    pub fn min_re_chi(&self) -> Option<&Sample> {
        self.samples
            .iter()
            .filter(|s| s.is_evaluated())
            .min_by(|a, b| a.re_chi().total_cmp(&b.re_chi()))
    }
}

/// Band index per sector at every grid point, or `None` where the eigensystem
/// could not be formed.
fn track_bands(spec: &SweepSpec, points: &[Result<FamilyPoint>]) -> Vec<Option<Vec<usize>>> {
    let mut out = Vec::with_capacity(points.len());
    let mut last: Option<(&FamilyPoint, Vec<usize>)> = None;
    for p in points {
        let Ok(point) = p else {
            out.push(None);
            continue;
        };
        let bands = match (&last, spec.tracking) {
            (Some((prev, prev_bands)), Tracking::Continuous) => {
                let mut bands = Vec::with_capacity(prev_bands.len());
                for ((a, b), &band) in prev.systems.iter().zip(&point.systems).zip(prev_bands) {
                    match match_states(a, b) {
                        Ok(m) => bands.push(m.permutation[band]),
                        Err(_) => bands.push(band),
                    }
                }
                bands
            }
            _ => vec![spec.band; point.systems.len()],
        };
        out.push(Some(bands.clone()));
        last = Some((point, bands));
    }
    out
}

/// Evaluates the susceptibility at every grid point. Eigensolves and the
/// finite differences run in parallel; band tracking is a sequential pass in
/// between, so results do not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<SusceptibilityCurve> {
    spec.validate()?;
    let family = spec.model.family()?;
    let family: &dyn Family = family.as_ref();
    let opts = SusceptibilityOptions {
        epsilon: spec.epsilon,
        richardson: spec.richardson,
        stencil: spec.stencil,
    };
    let points: Vec<Result<FamilyPoint>> = spec.grid.par_iter().map(|&l| FamilyPoint::new(family, l)).collect();
    let bands = track_bands(spec, &points);
    let samples = spec
        .grid
        .par_iter()
        .zip(points.par_iter())
        .zip(bands.par_iter())
        .map(|((&lambda, point), bands)| match (point, bands) {
            (Err(e), _) => Sample::skipped(lambda, e.to_string()),
            (Ok(_), None) => Sample::skipped(lambda, "no band assignment".into()),
            (Ok(_), Some(bands)) => match susceptibility_sectors(family, lambda, bands, &opts) {
                Ok(r) => Sample {
                    lambda,
                    f: r.fidelity,
                    chi: r.chi,
                    rigidity: r.rigidity,
                    status: SampleStatus::from_rigidity(r.rigidity),
                    note: None,
                },
                Err(e) => Sample::skipped(lambda, e.to_string()),
            },
        })
        .collect();
    Ok(SusceptibilityCurve { samples })
}

/// Phase rigidity of a 2×2 SSH Bloch block, `√|D| / max(|ξ_k|, u)` with
/// `D = |ξ_k|² − u²`.
pub fn ssh_block_rigidity(p: &SshParams, k: f64) -> f64 {
    let b = ssh_bloch(p, k);
    let d = b.xi_k.norm_sqr() - p.u * p.u;
    let scale = b.xi_k.norm().max(p.u);
    if scale == 0.0 {
        return 1.0;
    }
    (d.abs().sqrt() / scale).min(1.0)
}

/// Closed-form ground-state density along `w` on a grid. No fidelity is
/// computed, so `f` is NaN for every sample.
pub fn ssh_density_curve(base: &SshParams, grid: &[f64]) -> Result<SusceptibilityCurve> {
    base.validate()?;
    validate_grid(grid)?;
    let samples = grid
        .par_iter()
        .map(|&w| {
            let p = SshParams { w, ..*base };
            match ssh_chi0_density(&p) {
                Ok(chi0) => {
                    let rigidity = (0..p.n_cells)
                        .map(|m| ssh_block_rigidity(&p, ssh_momentum(m, p.n_cells)))
                        .fold(f64::INFINITY, f64::min);
                    Sample {
                        lambda: w,
                        f: c64(f64::NAN, f64::NAN),
                        chi: c64(chi0, 0.0),
                        rigidity,
                        status: SampleStatus::from_rigidity(rigidity),
                        note: None,
                    }
                }
                Err(e) => Sample::skipped(w, e.to_string()),
            }
        })
        .collect();
    Ok(SusceptibilityCurve { samples })
}

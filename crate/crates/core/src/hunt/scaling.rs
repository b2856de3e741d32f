use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ssh_chi0_density, SshParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub chi0: f64,
}

/// `χ₀ ≈ slope · (N − 1) + intercept`. The fit is absent for a single size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub max_residual: Option<f64>,
}

/// Ground-state density at the Hermitian critical point `u = 0, w = v` for
/// each odd `N`, fitted linearly in `N − 1`.
pub fn scaling_run(v: f64, n_list: &[usize]) -> Result<ScalingFit> {
    if n_list.is_empty() {
        return Err(Error::InvalidSpec("empty size list".into()));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n % 2 == 0) {
        return Err(Error::EvenNRejected(n));
    }
    let points = n_list
        .iter()
        .map(|&n| {
            let chi0 = ssh_chi0_density(&SshParams::new(0.0, v, v, n)?)?;
            Ok(ScalingPoint { n, chi0 })
        })
        .collect::<Result<Vec<_>>>()?;

    let xs: Vec<f64> = points.iter().map(|p| (p.n - 1) as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.chi0).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return Ok(ScalingFit {
            points,
            slope: None,
            intercept: None,
            max_residual: None,
        });
    }
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        points,
        slope: Some(slope),
        intercept: Some(intercept),
        max_residual: Some(max_residual),
    })
}

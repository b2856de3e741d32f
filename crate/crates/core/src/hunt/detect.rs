use serde::{Deserialize, Serialize};

use crate::models::Family;

use super::sweep::{SampleStatus, SusceptibilityCurve};

pub const DEFAULT_THRESHOLD: f64 = 1e3;
/// The effective threshold is at least this multiple of the median `|Re χ|`.
pub const MEDIAN_ESCALATION: f64 = 10.0;
/// Candidate brackets are refined below this width.
pub const BRACKET_TOL: f64 = 1e-10;
/// Samples used on the approach side of a candidate for the exponent fit.
const FIT_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpCandidate {
    pub lambda_ep: f64,
    pub bracket: (f64, f64),
    pub min_band_gap: f64,
    /// `p` in `Re χ ~ −c |λ − λ̃|^{−p}`; diagnostic only.
    pub divergence_fit_exponent: Option<f64>,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpReport {
    pub model: String,
    /// Threshold actually applied after escalation.
    pub threshold: f64,
    pub candidates: Vec<EpCandidate>,
}

impl EpReport {
    pub fn lambdas(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.lambda_ep).collect()
    }
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

/// Bisects a sign change of `f` on `[lo, hi]` down to adjacent floats (or
/// `BRACKET_TOL` if that is reached first with an exact zero). Returns the
/// final bracket and the endpoint where `|f|` is smaller.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> ((f64, f64), f64) {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return ((lo, lo), lo);
    }
    if fhi == 0.0 {
        return ((hi, hi), hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return ((mid, mid), mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let best = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    ((lo, hi), best)
}

/// Golden-section minimum of `f` on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > BRACKET_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Least-squares slope of `log |Re χ|` against `log |λ − λ̃|` over the
/// evaluated negative samples nearest `λ̃` on its better-populated side.
fn fit_exponent(curve: &SusceptibilityCurve, lambda_ep: f64) -> Option<f64> {
    let side = |left: bool| -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = curve
            .samples
            .iter()
            .filter(|s| s.is_evaluated() && s.re_chi() < 0.0 && s.re_chi().is_finite())
            .filter(|s| {
                if left {
                    s.lambda < lambda_ep
                } else {
                    s.lambda > lambda_ep
                }
            })
            .map(|s| ((s.lambda - lambda_ep).abs(), -s.re_chi()))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.truncate(FIT_SAMPLES);
        pts
    };
    let (l, r) = (side(true), side(false));
    let pts = if l.len() >= r.len() { l } else { r };
    if pts.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(-sxy / sxx)
}

/// Finds exceptional points along a sweep.
///
/// Samples with `Re χ` below `−threshold` (escalated to
/// [`MEDIAN_ESCALATION`] times the median `|Re χ|` if that is larger) or
/// skipped at an exceptional point are grouped into contiguous clusters, each
/// widened by one grid point per side. Inside a cluster every sign change of a
/// sector discriminant is bisected to a root; families without a closed-form
/// discriminant get a golden-section search on the minimum band gap instead.
/// Roots closer than `BRACKET_TOL` are merged.
pub fn detect_eps(curve: &SusceptibilityCurve, model: &dyn Family, threshold: f64) -> EpReport {
    let evaluated: Vec<f64> = curve
        .samples
        .iter()
        .filter(|s| s.is_evaluated() && s.re_chi().is_finite())
        .map(|s| s.re_chi().abs())
        .collect();
    let effective = median(evaluated)
        .map(|m| threshold.max(MEDIAN_ESCALATION * m))
        .unwrap_or(threshold);

    let n = curve.samples.len();
    let flagged: Vec<bool> = curve
        .samples
        .iter()
        .map(|s| s.status == SampleStatus::SkippedAtEp || s.re_chi() < -effective)
        .collect();

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && flagged[i + 1] {
            i += 1;
        }
        let lo = start.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        match clusters.last_mut() {
            Some(last) if lo <= last.1 => last.1 = hi,
            _ => clusters.push((lo, hi)),
        }
        i += 1;
    }

    let lam = |j: usize| curve.samples[j].lambda;
    let mut candidates: Vec<EpCandidate> = Vec::new();
    for (lo, hi) in clusters {
        let deepest = (lo..=hi)
            .filter(|&j| curve.samples[j].is_evaluated())
            .map(|j| curve.samples[j].re_chi())
            .fold(f64::INFINITY, f64::min);
        let skipped = (lo..=hi)
            .filter(|&j| curve.samples[j].status == SampleStatus::SkippedAtEp)
            .count();
        let mut roots: Vec<((f64, f64), f64, String)> = Vec::new();
        if model.discriminant(lam(lo), 0).is_some() {
            for s in 0..model.sectors() {
                let d = |x: f64| model.discriminant(x, s).expect("closed-form discriminant");
                for j in lo..hi {
                    let (a, b) = (lam(j), lam(j + 1));
                    let (da, db) = (d(a), d(b));
                    let change = (da > 0.0 && db <= 0.0) || (da < 0.0 && db >= 0.0) || (da == 0.0 && j == lo);
                    if !change {
                        continue;
                    }
                    let (bracket, root) = bisect(d, a, b);
                    roots.push((bracket, root, format!("sector {s} discriminant changes sign")));
                }
            }
        } else if hi > lo {
            let gap = |x: f64| model.min_band_gap(x).unwrap_or(f64::INFINITY);
            let (x, g) = golden_min(gap, lam(lo), lam(hi));
            let half = 0.5 * BRACKET_TOL;
            roots.push(((x - half, x + half), x, format!("band-gap minimum {g:.3e}")));
        }
        roots.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (bracket, root, why) in roots {
            if let Some(prev) = candidates.last_mut() {
                if (prev.lambda_ep - root).abs() < BRACKET_TOL {
                    if !prev.evidence.contains(&why) {
                        prev.evidence.push_str("; ");
                        prev.evidence.push_str(&why);
                    }
                    continue;
                }
            }
            let gap = model.min_band_gap(root).unwrap_or(f64::NAN);
            let mut evidence = format!("{why}; min Re chi {deepest:.6e} over [{}, {}]", lam(lo), lam(hi));
            if skipped > 0 {
                evidence.push_str(&format!("; {skipped} sample(s) skipped at EP"));
            }
            candidates.push(EpCandidate {
                lambda_ep: root,
                bracket,
                min_band_gap: gap,
                divergence_fit_exponent: fit_exponent(curve, root),
                evidence,
            });
        }
    }

    EpReport {
        model: model.name(),
        threshold: effective,
        candidates,
    }
}

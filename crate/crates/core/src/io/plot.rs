use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::hunt::SusceptibilityCurve;

/// Plotted values are clipped to `±PLOT_CLIP`.
pub const PLOT_CLIP: f64 = 1e4;

/// Two whitespace-separated columns, 17 significant digits, `\n` endings.
/// Skipped samples become blank lines so gnuplot breaks the curve there.
pub fn plot_data(curve: &SusceptibilityCurve) -> Result<String> {
    if curve.is_empty() {
        return Err(Error::InvalidSpec("cannot plot an empty curve".into()));
    }
    let mut out = String::new();
    for s in &curve.samples {
        if !s.is_evaluated() || !s.re_chi().is_finite() {
            out.push('\n');
            continue;
        }
        let y = s.re_chi().clamp(-PLOT_CLIP, PLOT_CLIP);
        writeln!(out, "{:.16e} {:.16e}", s.lambda, y).expect("string write");
    }
    Ok(out)
}

pub fn plot_script(data_file: &str, xlabel: &str, ylabel: &str) -> String {
    format!(
        "set xlabel \"{xlabel}\"\nset ylabel \"{ylabel}\"\nset yrange [{lo:e}:{hi:e}]\nset key off\nplot \"{data_file}\" using 1:2 with lines\n",
        lo = -PLOT_CLIP,
        hi = PLOT_CLIP
    )
}

/// Writes `<stem>.dat` and `<stem>.gp` into `dir` and returns both paths.
pub fn emit_plot_data(
    curve: &SusceptibilityCurve,
    dir: &Path,
    stem: &str,
    xlabel: &str,
    ylabel: &str,
) -> Result<(PathBuf, PathBuf)> {
    let data = plot_data(curve)?;
    let data_path = dir.join(format!("{stem}.dat"));
    let script_path = dir.join(format!("{stem}.gp"));
    std::fs::write(&data_path, data).map_err(|e| Error::io(&data_path, e))?;
    let script = plot_script(&format!("{stem}.dat"), xlabel, ylabel);
    std::fs::write(&script_path, script).map_err(|e| Error::io(&script_path, e))?;
    Ok((data_path, script_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hunt::{linear_grid, run_sweep, ssh_density_curve, ModelSpec, SweepSpec};
    use crate::models::SshParams;

    #[test]
    fn toy_data_is_monotone_and_exact_format() {
        let curve = run_sweep(&SweepSpec::new(ModelSpec::Toy, linear_grid(0.0, 0.5, 0.25).unwrap())).unwrap();
        let text = plot_data(&curve).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first.split(' ').next().unwrap(), "0.0000000000000000e0");
        let xs: Vec<f64> = text
            .lines()
            .map(|l| l.split(' ').next().unwrap().parse().unwrap())
            .collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        for l in text.lines() {
            let mantissa = l.split(' ').nth(1).unwrap().split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn clipping_near_eps() {
        let base = SshParams::new(0.1, 1.0, 1.0, 101).unwrap();
        let curve = ssh_density_curve(&base, &linear_grid(0.8, 1.2, 1e-4).unwrap()).unwrap();
        let text = plot_data(&curve).unwrap();
        let floor = format!("{:.16e}", -PLOT_CLIP);
        let clipped: Vec<f64> = text
            .lines()
            .filter(|l| l.ends_with(&floor))
            .map(|l| l.split(' ').next().unwrap().parse().unwrap())
            .collect();
        for ep in crate::models::ssh_ep_locations(0.1, 1.0, 101) {
            assert!(
                clipped.iter().any(|w| (w - ep.w).abs() < 1e-3),
                "no clipping near {}",
                ep.w
            );
        }
        assert!(text
            .lines()
            .filter_map(|l| l.split(' ').nth(1))
            .all(|y| y.parse::<f64>().unwrap().abs() <= PLOT_CLIP));
    }

    #[test]
    fn empty_curve_rejected() {
        assert!(plot_data(&SusceptibilityCurve::default()).is_err());
    }

    #[test]
    fn files_written() {
        let dir = std::env::temp_dir().join(format!("ephunt-plot-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let curve = run_sweep(&SweepSpec::new(ModelSpec::Toy, vec![0.1, 0.2])).unwrap();
        let (d, s) = emit_plot_data(&curve, &dir, "toy", "r", "Re chi").unwrap();
        assert!(std::fs::read_to_string(s).unwrap().contains("plot \"toy.dat\""));
        assert_eq!(std::fs::read_to_string(d).unwrap().lines().count(), 2);
        std::fs::remove_dir_all(&dir).unwrap();
        let err = emit_plot_data(&curve, &dir.join("missing"), "toy", "r", "y").unwrap_err();
        assert!(err.to_string().contains("missing"));
    }
}

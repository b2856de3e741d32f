use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::hunt::{validate_grid, Sample, SampleStatus, ScalingFit, SusceptibilityCurve};
use crate::linalg::c64;

pub const CURVE_HEADER: [&str; 8] = [
    "lambda",
    "re_f",
    "im_f",
    "re_chi",
    "im_chi",
    "chi_exact",
    "rigidity",
    "status",
];
pub const SSH_HEADER: [&str; 3] = ["w", "chi0_density", "status"];
pub const SCALING_HEADER: [&str; 2] = ["n", "chi0"];

/// Shortest round-trip decimal; empty for NaN so skipped rows never carry
/// `NaN` or `inf` tokens.
fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Writes a sweep with the full column set. `exact` fills `chi_exact` where it
/// returns a value.
pub fn write_curve_csv<W: Write>(
    out: W,
    curve: &SusceptibilityCurve,
    exact: Option<&dyn Fn(f64) -> Option<f64>>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CURVE_HEADER).map_err(csv_err)?;
    for s in &curve.samples {
        let ex = exact.and_then(|f| f(s.lambda)).unwrap_or(f64::NAN);
        w.write_record([
            num(s.lambda),
            num(s.f.re),
            num(s.f.im),
            num(s.chi.re),
            num(s.chi.im),
            num(ex),
            num(s.rigidity),
            s.status.label().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))
}

/// Writes the `w, chi0_density, status` form used for SSH density sweeps.
pub fn write_ssh_csv<W: Write>(out: W, curve: &SusceptibilityCurve) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SSH_HEADER).map_err(csv_err)?;
    for s in &curve.samples {
        w.write_record([num(s.lambda), num(s.chi.re), s.status.label().to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))
}

pub fn write_scaling_csv<W: Write>(out: W, fit: &ScalingFit) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SCALING_HEADER).map_err(csv_err)?;
    for p in &fit.points {
        w.write_record([p.n.to_string(), num(p.chi0)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))
}

fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

/// JSON array of row objects keyed by the CSV column names; NaN becomes
/// `null`. `columns` picks the schema, `CURVE_HEADER` or `SSH_HEADER`.
pub fn curve_json(curve: &SusceptibilityCurve, columns: &[&str], exact: Option<&dyn Fn(f64) -> Option<f64>>) -> String {
    let rows: Vec<serde_json::Value> = curve
        .samples
        .iter()
        .map(|s| {
            let mut row = serde_json::Map::new();
            for &c in columns {
                let v = match c {
                    "lambda" | "w" => json_num(s.lambda),
                    "re_f" => json_num(s.f.re),
                    "im_f" => json_num(s.f.im),
                    "re_chi" | "chi0_density" => json_num(s.chi.re),
                    "im_chi" => json_num(s.chi.im),
                    "chi_exact" => json_num(exact.and_then(|f| f(s.lambda)).unwrap_or(f64::NAN)),
                    "rigidity" => json_num(s.rigidity),
                    "status" => s.status.label().into(),
                    _ => serde_json::Value::Null,
                };
                row.insert(c.to_string(), v);
            }
            if let Some(note) = &s.note {
                row.insert("note".into(), note.clone().into());
            }
            serde_json::Value::Object(row)
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("json rows") + "\n"
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| names.contains(&h))
}

fn field(record: &csv::StringRecord, idx: Option<usize>, line: u64) -> Result<f64> {
    match idx.and_then(|i| record.get(i)) {
        None | Some("") => Ok(f64::NAN),
        Some(text) => {
            let x: f64 = text
                .parse()
                .map_err(|_| Error::Parse(format!("line {line}: invalid number {text:?}")))?;
            if x.is_infinite() {
                return Err(Error::Parse(format!("line {line}: infinite value")));
            }
            Ok(x)
        }
    }
}

/// Reads a curve written by either writer. The parameter column may be named
/// `lambda` or `w` and the susceptibility `re_chi` or `chi0_density`; other
/// columns are optional. Rows without a susceptibility value are treated as
/// skipped.
pub fn read_curve_csv<R: Read>(input: R) -> Result<SusceptibilityCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let lam =
        column(&headers, &["lambda", "w"]).ok_or_else(|| Error::Parse("missing `lambda` or `w` column".into()))?;
    let chi = column(&headers, &["re_chi", "chi0_density"])
        .ok_or_else(|| Error::Parse("missing `re_chi` or `chi0_density` column".into()))?;
    let im_chi = column(&headers, &["im_chi"]);
    let re_f = column(&headers, &["re_f"]);
    let im_f = column(&headers, &["im_f"]);
    let rig = column(&headers, &["rigidity"]);
    let status = column(&headers, &["status"]);

    let mut samples = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row as u64 + 2;
        let rec = rec.map_err(csv_err)?;
        let lambda = field(&rec, Some(lam), line)?;
        if lambda.is_nan() {
            return Err(Error::Parse(format!("line {line}: missing parameter value")));
        }
        let re = field(&rec, Some(chi), line)?;
        let st = match status.and_then(|i| rec.get(i)) {
            None | Some("") => None,
            Some(text) => Some(
                text.parse::<SampleStatus>()
                    .map_err(|e| Error::Parse(format!("line {line}: {e}")))?,
            ),
        };
        if re.is_nan() || st == Some(SampleStatus::SkippedAtEp) {
            samples.push(Sample::skipped(lambda, "skipped in input".into()));
            continue;
        }
        let im = field(&rec, im_chi, line)?;
        samples.push(Sample {
            lambda,
            f: c64(field(&rec, re_f, line)?, field(&rec, im_f, line)?),
            chi: c64(re, if im.is_nan() { 0.0 } else { im }),
            rigidity: field(&rec, rig, line)?,
            status: st.unwrap_or(SampleStatus::Ok),
            note: None,
        });
    }
    let lambdas: Vec<f64> = samples.iter().map(|s| s.lambda).collect();
    if !lambdas.is_empty() {
        validate_grid(&lambdas).map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(SusceptibilityCurve { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hunt::{run_sweep, ModelSpec, SweepSpec};
    use crate::models::{toy_chi_exact, ToyParams};

    fn toy_csv() -> (SusceptibilityCurve, String) {
        let curve = run_sweep(&SweepSpec::new(ModelSpec::Toy, vec![0.5, 1.0, 1.5])).unwrap();
        let exact = |r: f64| toy_chi_exact(ToyParams { r }).ok();
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &curve, Some(&exact)).unwrap();
        (curve, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn curve_schema() {
        let (_, text) = toy_csv();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "lambda,re_f,im_f,re_chi,im_chi,chi_exact,rigidity,status"
        );
        let skipped = text.lines().nth(2).unwrap();
        assert_eq!(skipped, "1,,,,,,,skipped-at-ep");
        assert!(!text.contains("NaN") && !text.contains("inf") && !text.contains('\r'));
    }

    #[test]
    fn curve_round_trip() {
        let (curve, text) = toy_csv();
        let back = read_curve_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), curve.len());
        for (a, b) in back.samples.iter().zip(&curve.samples) {
            assert_eq!(a.status, b.status);
            if a.is_evaluated() {
                assert_eq!(a.chi, b.chi);
                assert_eq!(a.rigidity, b.rigidity);
            }
        }
    }

    #[test]
    fn ssh_schema_is_readable() {
        let text = "w,chi0_density,status\n0.9,1.5,ok\n1,,skipped-at-ep\n1.1,-2e3,near-ep\n";
        let curve = read_curve_csv(text.as_bytes()).unwrap();
        assert_eq!(curve.len(), 3);
        assert_eq!(curve.samples[1].status, SampleStatus::SkippedAtEp);
        assert_eq!(curve.samples[2].re_chi(), -2e3);
        assert_eq!(curve.samples[2].status, SampleStatus::NearEp);
    }

    #[test]
    fn malformed_input() {
        for bad in [
            "x,y\n1,2\n",
            "lambda,re_chi\nfoo,1\n",
            "lambda,re_chi\n1,inf\n",
            "lambda,re_chi\n1,1\n0,1\n",
            "lambda,re_chi,status\n1,1,weird\n",
            "lambda,re_chi\n1,1,3\n",
        ] {
            assert!(read_curve_csv(bad.as_bytes()).is_err(), "{bad:?}");
        }
        assert!(read_curve_csv("lambda,re_chi\n".as_bytes()).unwrap().is_empty());
    }
}

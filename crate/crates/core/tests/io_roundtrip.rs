use std::path::PathBuf;

use proptest::option;
use proptest::prelude::*;

use ephunt::hunt::{linear_grid, run_sweep, ModelSpec, Sample, SampleStatus, SusceptibilityCurve, SweepSpec, Tracking};
use ephunt::io::{
    curve_json, parse_n_list, plot_data, read_curve_csv, write_curve_csv, write_ssh_csv, OutputFormat, RunConfig,
    CURVE_HEADER,
};
use ephunt::linalg::c64;
use ephunt::models::{toy_chi_exact, ToyParams};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1.0..1.0f64, Just(0.0), Just(1e-300)]
}

fn config() -> impl Strategy<Value = RunConfig> {
    let a = (
        option::of(prop::sample::select(vec![
            "toy-sweep",
            "ssh-sweep",
            "scaling",
            "ep-find",
            "verify",
        ])),
        option::of(prop::sample::select(vec!["toy", "ssh"])),
        option::of(prop::sample::select(vec!["closed-form", "fidelity"])),
        option::of(finite()),
        option::of(finite()),
        option::of(finite()),
        option::of(0usize..100_000),
        option::of(prop::collection::vec(1usize..1000, 0..6)),
    );
    let b = (
        option::of(finite()),
        option::of(finite()),
        option::of(finite()),
        option::of(finite()),
        option::of(1e-12..1.0f64),
        option::of(0usize..8),
        option::of(prop_oneof![Just(Tracking::Continuous), Just(Tracking::Canonical)]),
        option::of(1e-12..1.0f64),
    );
    let c = (
        option::of(any::<bool>()),
        option::of(1.0..1e9f64),
        option::of(any::<bool>()),
        option::of("[a-z/_.]{1,20}"),
        option::of(prop_oneof![Just(OutputFormat::Csv), Just(OutputFormat::Json)]),
        option::of(any::<bool>()),
        option::of(1usize..64),
        option::of(any::<u64>()),
    );
    (a, b, c).prop_map(|(a, b, c)| RunConfig {
        command: a.0.map(str::to_string),
        model: a.1.map(str::to_string),
        method: a.2.map(str::to_string),
        u: a.3,
        v: a.4,
        w: a.5,
        n: a.6,
        n_list: a.7,
        r_min: b.0,
        r_max: b.1,
        w_min: b.2,
        w_max: b.3,
        step: b.4,
        band: b.5,
        tracking: b.6,
        epsilon: b.7,
        richardson: c.0,
        threshold: c.1,
        find_eps: c.2,
        out: c.3.map(PathBuf::from),
        format: c.4,
        plot: c.5,
        threads: c.6,
        seed: c.7,
    })
}

fn curve() -> impl Strategy<Value = SusceptibilityCurve> {
    prop::collection::vec((1e-3..1.0f64, finite(), finite(), 0.0..1.0f64, 0u8..3), 1..40).prop_map(|rows| {
        let mut lambda = -5.0;
        let samples = rows
            .into_iter()
            .map(|(step, re, im, rig, st)| {
                lambda += step;
                match st {
                    2 => Sample::skipped(lambda, "x".into()),
                    _ => Sample {
                        lambda,
                        f: c64(1.0 - re * 1e-9, im * 1e-9),
                        chi: c64(re, im),
                        rigidity: rig,
                        status: if st == 0 {
                            SampleStatus::Ok
                        } else {
                            SampleStatus::NearEp
                        },
                        note: None,
                    },
                }
            })
            .collect();
        SusceptibilityCurve { samples }
    })
}

proptest! {
    #[test]
    fn config_round_trips(cfg in config()) {
        let text = cfg.to_json_string();
        prop_assert_eq!(RunConfig::from_json_str(&text).unwrap(), cfg);
    }

    #[test]
    fn overriding_with_empty_is_identity(cfg in config()) {
        prop_assert_eq!(cfg.clone().overridden_by(RunConfig::default()), cfg.clone());
        prop_assert_eq!(RunConfig::default().overridden_by(cfg.clone()), cfg);
    }

    #[test]
    fn curve_csv_round_trips(c in curve()) {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &c, None).unwrap();
        let back = read_curve_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), c.len());
        for (a, b) in c.samples.iter().zip(&back.samples) {
            prop_assert_eq!(a.lambda, b.lambda);
            prop_assert_eq!(a.status, b.status);
            if a.is_evaluated() {
                prop_assert_eq!(a.chi, b.chi);
                prop_assert_eq!(a.f, b.f);
                prop_assert_eq!(a.rigidity, b.rigidity);
            }
        }
    }

    #[test]
    fn ssh_csv_round_trips(c in curve()) {
        let mut buf = Vec::new();
        write_ssh_csv(&mut buf, &c).unwrap();
        let back = read_curve_csv(buf.as_slice()).unwrap();
        for (a, b) in c.samples.iter().zip(&back.samples) {
            prop_assert_eq!(a.lambda, b.lambda);
            prop_assert_eq!(a.is_evaluated(), b.is_evaluated());
            if a.is_evaluated() {
                prop_assert_eq!(a.chi.re, b.chi.re);
            }
        }
    }

    #[test]
    fn linear_grid_is_increasing_and_bounded(min in -10.0..10.0f64, span in 0.0..5.0f64, step in 1e-3..1.0f64) {
        let g = linear_grid(min, min + span, step).unwrap();
        prop_assert_eq!(g.len(), ((span / step) + 1e-9).floor() as usize + 1);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(*g.last().unwrap() <= min + span + step * 1e-6);
    }

    #[test]
    fn n_list_round_trips(sizes in prop::collection::vec(1usize..100_000, 1..10)) {
        let text = sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_n_list(&text).unwrap(), sizes);
    }
}

const TOY_GOLDEN: &str = include_str!("golden/toy_sweep.csv");

fn toy_curve() -> SusceptibilityCurve {
    run_sweep(&SweepSpec::new(ModelSpec::Toy, linear_grid(0.0, 1.0, 0.25).unwrap())).unwrap()
}

#[test]
fn toy_csv_matches_golden_file() {
    let exact = |r: f64| toy_chi_exact(ToyParams { r }).ok();
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, &toy_curve(), Some(&exact)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, CURVE_HEADER.join(","));
    assert_eq!(text, TOY_GOLDEN);
}

#[test]
fn json_rows_use_csv_column_names() {
    let text = curve_json(&toy_curve(), &CURVE_HEADER, None);
    assert!(text.ends_with('\n'));
    for name in CURVE_HEADER {
        assert!(text.contains(&format!("\"{name}\"")), "{name}");
    }
    assert!(text.contains("\"status\": \"skipped-at-ep\""));
    assert!(text.contains("null"));
    assert!(!text.contains("NaN"));
}

#[test]
fn plot_data_has_seventeen_digits() {
    let data = plot_data(&toy_curve()).unwrap();
    let first = data.lines().next().unwrap();
    let cols: Vec<&str> = first.split(' ').collect();
    assert_eq!(cols.len(), 2);
    for c in cols {
        let mantissa = c.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{c}");
    }
    // The EP at r = 1 breaks the line.
    assert!(data.ends_with("\n\n"));
}

#[test]
fn reader_rejects_bad_input() {
    for text in [
        "",
        "foo,bar\n1,2\n",
        "lambda,re_chi\n1,inf\n",
        "lambda,re_chi\n1,2\n0.5,3\n",
        "lambda,re_chi,status\n1,2,weird\n",
        "lambda,re_chi\nx,2\n",
        "lambda,re_chi\n,2\n",
    ] {
        assert!(read_curve_csv(text.as_bytes()).is_err(), "{text:?}");
    }
}

#[test]
fn fuzz_seeds_parse() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let files = |dir: &str| -> Vec<Vec<u8>> {
        let mut out: Vec<Vec<u8>> = std::fs::read_dir(root.join(dir))
            .unwrap()
            .map(|e| std::fs::read(e.unwrap().path()).unwrap())
            .collect();
        out.sort();
        out
    };
    for seed in files("config_json") {
        RunConfig::from_json_str(std::str::from_utf8(&seed).unwrap()).unwrap();
    }
    for seed in files("curve_csv") {
        assert!(!read_curve_csv(seed.as_slice()).unwrap().is_empty());
    }
    for seed in files("n_list") {
        parse_n_list(std::str::from_utf8(&seed).unwrap()).unwrap();
    }
}

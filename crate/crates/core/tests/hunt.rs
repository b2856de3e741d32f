use ephunt::hunt::{
    detect_eps, linear_grid, run_sweep, ssh_density_curve, ModelSpec, SampleStatus, SweepSpec, Tracking,
    DEFAULT_THRESHOLD,
};
use ephunt::models::{ssh_ep_locations, SshFamily, SshParam, SshParams, ToyFamily};
use ephunt::Error;

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn sweep_does_not_depend_on_thread_count() {
    let spec = SweepSpec::new(ModelSpec::Toy, linear_grid(-1.2, 1.2, 0.01).unwrap());
    let one = pool(1).install(|| run_sweep(&spec)).unwrap();
    let four = pool(4).install(|| run_sweep(&spec)).unwrap();
    assert_eq!(one.len(), four.len());
    for (a, b) in one.samples.iter().zip(&four.samples) {
        assert_eq!(a.lambda, b.lambda);
        assert_eq!(a.status, b.status);
        assert_eq!(a.chi.re.to_bits(), b.chi.re.to_bits());
    }
}

#[test]
fn toy_ep_found_from_both_sides() {
    let curve = run_sweep(&SweepSpec::new(ModelSpec::Toy, linear_grid(-1.3, 1.3, 0.005).unwrap())).unwrap();
    let report = detect_eps(&curve, &ToyFamily, DEFAULT_THRESHOLD);
    let eps = report.lambdas();
    assert_eq!(eps.len(), 2, "{eps:?}");
    assert!((eps[0] + 1.0).abs() < 1e-9 && (eps[1] - 1.0).abs() < 1e-9, "{eps:?}");
    for c in &report.candidates {
        assert!(c.min_band_gap < 1e-6);
        assert!(c.bracket.0 <= c.lambda_ep && c.lambda_ep <= c.bracket.1);
    }
}

#[test]
fn grid_point_on_ep_is_skipped_not_infinite() {
    let curve = run_sweep(&SweepSpec::new(ModelSpec::Toy, linear_grid(0.9, 1.1, 0.05).unwrap())).unwrap();
    let at = curve.samples.iter().find(|s| s.lambda == 1.0).unwrap();
    assert_eq!(at.status, SampleStatus::SkippedAtEp);
    assert!(at.note.is_some());
    assert!(curve
        .samples
        .iter()
        .filter(|s| s.is_evaluated())
        .all(|s| s.re_chi().is_finite()));
}

#[test]
fn fidelity_sweep_of_ssh_chain_finds_closed_form_roots() {
    let base = SshParams::new(0.04, 1.0, 0.9, 21).unwrap();
    let grid = linear_grid(0.6, 1.4, 2e-3).unwrap();
    let spec = SweepSpec::new(
        ModelSpec::Ssh {
            params: base,
            param: SshParam::W,
        },
        grid.clone(),
    );
    assert_eq!(spec.tracking, Tracking::Canonical);
    let curve = run_sweep(&spec).unwrap();
    let report = detect_eps(&curve, &SshFamily::along_w(base).unwrap(), DEFAULT_THRESHOLD);
    let expected: Vec<f64> = ssh_ep_locations(0.04, 1.0, 21)
        .into_iter()
        .map(|e| e.w)
        .filter(|w| (0.6..=1.4).contains(w))
        .collect();
    let got = report.lambdas();
    assert_eq!(got.len(), expected.len(), "{got:?} vs {expected:?}");
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-8, "{g} vs {e}");
    }

    let closed = ssh_density_curve(&base, &grid).unwrap();
    let closed_report = detect_eps(&closed, &SshFamily::along_w(base).unwrap(), DEFAULT_THRESHOLD);
    assert_eq!(closed_report.lambdas().len(), expected.len());
}

#[test]
fn hermitian_chain_has_no_eps() {
    let base = SshParams::new(0.0, 1.0, 0.5, 101).unwrap();
    let curve = ssh_density_curve(&base, &linear_grid(0.5, 1.5, 1e-3).unwrap()).unwrap();
    let report = detect_eps(&curve, &SshFamily::along_w(base).unwrap(), DEFAULT_THRESHOLD);
    assert!(report.candidates.is_empty());
    assert!(curve.samples.iter().all(|s| s.re_chi() > 0.0));
}

#[test]
fn bad_specs_are_rejected() {
    assert!(matches!(linear_grid(1.0, 0.0, 0.1), Err(Error::InvalidSpec(_))));
    assert!(matches!(linear_grid(0.0, 1.0, 0.0), Err(Error::InvalidSpec(_))));
    assert!(matches!(linear_grid(0.0, f64::NAN, 0.1), Err(Error::InvalidSpec(_))));
    let mut spec = SweepSpec::new(ModelSpec::Toy, vec![0.0, 0.1]);
    spec.band = 2;
    assert!(matches!(run_sweep(&spec), Err(Error::InvalidSpec(_))));
    spec.band = 0;
    spec.epsilon = 0.0;
    assert!(matches!(run_sweep(&spec), Err(Error::InvalidSpec(_))));
    spec.epsilon = 1e-4;
    spec.grid = vec![0.1, 0.0];
    assert!(matches!(run_sweep(&spec), Err(Error::InvalidSpec(_))));
}

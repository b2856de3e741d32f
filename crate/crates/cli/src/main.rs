use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ephunt::hunt::{
    detect_eps, linear_grid, run_sweep, scaling_run, ssh_density_curve, ModelSpec, SusceptibilityCurve, SweepSpec,
    Tracking, DEFAULT_THRESHOLD,
};
use ephunt::io::{
    curve_json, emit_plot_data, parse_n_list, read_curve_csv, to_json, write_curve_csv, write_scaling_csv,
    write_ssh_csv, OutputFormat, RunConfig, CURVE_HEADER, SSH_HEADER,
};
use ephunt::models::{toy_chi_exact, Family, SshFamily, SshParam, SshParams, ToyFamily, ToyParams};
use ephunt::verify::{run_verify, VerifyOptions, DEFAULT_SEED};
use ephunt::Error;

#[derive(Parser, Debug)]
#[command(
    name = "ephunt",
    version,
    about = "Fidelity susceptibility sweeps and exceptional-point search"
)]
struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Finite-difference step.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    richardson: Option<bool>,
    /// Worker threads; falls back to EPHUNT_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the two-level toy model in r.
    ToySweep(ToyArgs),
    /// Ground-state susceptibility density of the SSH chain along w.
    SshSweep(SshArgs),
    /// Critical-point density for a list of odd chain sizes.
    Scaling(ScalingArgs),
    /// Locate exceptional points in an existing curve CSV.
    EpFind(EpFindArgs),
    /// Run the invariant checks.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ToyArgs {
    #[arg(long, allow_hyphen_values = true)]
    r_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    band: Option<usize>,
    #[arg(long, value_parser = parse_tracking)]
    tracking: Option<Tracking>,
    /// Also write gnuplot data and script.
    #[arg(long)]
    plot: bool,
}

#[derive(Args, Debug)]
struct SshArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// `closed-form` (default) or `fidelity`.
    #[arg(long)]
    method: Option<String>,
    /// Search the curve for exceptional points and write a JSON report.
    #[arg(long)]
    find_eps: bool,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    plot: bool,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    /// Comma-separated odd sizes, e.g. 11,51,101.
    #[arg(long = "n", value_parser = parse_sizes)]
    n_list: Option<Sizes>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<f64>,
}

#[derive(Args, Debug)]
struct EpFindArgs {
    /// Curve CSV as written by toy-sweep or ssh-sweep.
    input: PathBuf,
    /// `toy` or `ssh` (swept along w).
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Deliberately corrupt the evolved metric by this amount.
    #[arg(long)]
    perturb_metric: Option<f64>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_tracking(s: &str) -> Result<Tracking, String> {
    match s {
        "continuous" => Ok(Tracking::Continuous),
        "canonical" => Ok(Tracking::Canonical),
        other => Err(format!("unknown tracking mode {other:?}")),
    }
}

#[derive(Debug, Clone)]
struct Sizes(Vec<usize>);

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    parse_n_list(s).map(Sizes).map_err(|e| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_) | Error::EvenNRejected(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| usage(format!("missing required value --{flag}")))
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

impl Cli {
    fn command_name(&self) -> &'static str {
        match self.command {
            Command::ToySweep(_) => "toy-sweep",
            Command::SshSweep(_) => "ssh-sweep",
            Command::Scaling(_) => "scaling",
            Command::EpFind(_) => "ep-find",
            Command::Verify(_) => "verify",
        }
    }

    /// Command-line values as a config layer.
    fn to_config(&self) -> RunConfig {
        let mut c = RunConfig {
            command: Some(self.command_name().into()),
            out: self.out.clone(),
            format: self.format,
            epsilon: self.epsilon,
            richardson: self.richardson,
            threads: self.threads,
            ..RunConfig::default()
        };
        match &self.command {
            Command::ToySweep(a) => {
                c.r_min = a.r_min;
                c.r_max = a.r_max;
                c.step = a.step;
                c.band = a.band;
                c.tracking = a.tracking;
                c.plot = flag(a.plot);
            }
            Command::SshSweep(a) => {
                c.n = a.n;
                c.u = a.u;
                c.v = a.v;
                c.w_min = a.w_min;
                c.w_max = a.w_max;
                c.step = a.step;
                c.method = a.method.clone();
                c.find_eps = flag(a.find_eps);
                c.threshold = a.threshold;
                c.plot = flag(a.plot);
            }
            Command::Scaling(a) => {
                c.n_list = a.n_list.clone().map(|s| s.0);
                c.v = a.v;
            }
            Command::EpFind(a) => {
                c.model = a.model.clone();
                c.n = a.n;
                c.u = a.u;
                c.v = a.v;
                c.threshold = a.threshold;
            }
            Command::Verify(a) => {
                c.seed = a.seed;
            }
        }
        c
    }
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
    format: OutputFormat,
}

impl Run {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn epsilon(&self) -> Result<f64, Failure> {
        let eps = self.cfg.epsilon.unwrap_or(ephunt::fidelity::DEFAULT_EPSILON);
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(usage(format!("epsilon must be positive, got {eps}")));
        }
        Ok(eps)
    }

    fn threshold(&self) -> Result<f64, Failure> {
        let t = self.cfg.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !(t > 0.0 && t.is_finite()) {
            return Err(usage(format!("threshold must be positive, got {t}")));
        }
        Ok(t)
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

fn skipped(curve: &SusceptibilityCurve) -> usize {
    curve.samples.iter().filter(|s| !s.is_evaluated()).count()
}

fn toy_sweep(run: &Run) -> Result<(), Failure> {
    let c = &run.cfg;
    let grid = linear_grid(
        require(c.r_min, "r-min")?,
        require(c.r_max, "r-max")?,
        require(c.step, "step")?,
    )?;
    let mut spec = SweepSpec::new(ModelSpec::Toy, grid);
    spec.epsilon = run.epsilon()?;
    spec.richardson = c.richardson.unwrap_or(true);
    spec.band = c.band.unwrap_or(0);
    if let Some(t) = c.tracking {
        spec.tracking = t;
    }
    let curve = run_sweep(&spec)?;
    let exact = |r: f64| toy_chi_exact(ToyParams { r }).ok();
    let path = match run.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_curve_csv(&mut buf, &curve, Some(&exact))?;
            run.write("toy_sweep.csv", &buf)?
        }
        OutputFormat::Json => run.write(
            "toy_sweep.json",
            curve_json(&curve, &CURVE_HEADER, Some(&exact)).as_bytes(),
        )?,
    };
    println!("{}: {} rows, {} skipped", path.display(), curve.len(), skipped(&curve));
    if c.plot.unwrap_or(false) {
        let (dat, gp) = emit_plot_data(&curve, &run.out, "toy_sweep", "r", "Re chi")?;
        println!("{}, {}", dat.display(), gp.display());
    }
    Ok(())
}

fn ssh_sweep(run: &Run) -> Result<(), Failure> {
    let c = &run.cfg;
    let base = SshParams::new(
        require(c.u, "u")?,
        c.v.unwrap_or(1.0),
        require(c.w_min, "w-min")?,
        require(c.n, "n")?,
    )?;
    let grid = linear_grid(
        require(c.w_min, "w-min")?,
        require(c.w_max, "w-max")?,
        require(c.step, "step")?,
    )?;
    let curve = match c.method.as_deref().unwrap_or("closed-form") {
        "closed-form" => ssh_density_curve(&base, &grid)?,
        "fidelity" => {
            let mut spec = SweepSpec::new(
                ModelSpec::Ssh {
                    params: base,
                    param: SshParam::W,
                },
                grid,
            );
            spec.epsilon = run.epsilon()?;
            spec.richardson = c.richardson.unwrap_or(true);
            run_sweep(&spec)?
        }
        other => {
            return Err(usage(format!(
                "unknown method {other:?}; expected closed-form or fidelity"
            )))
        }
    };
    let path = match run.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_ssh_csv(&mut buf, &curve)?;
            run.write("ssh_sweep.csv", &buf)?
        }
        OutputFormat::Json => run.write("ssh_sweep.json", curve_json(&curve, &SSH_HEADER, None).as_bytes())?,
    };
    println!("{}: {} rows, {} skipped", path.display(), curve.len(), skipped(&curve));
    if let Some(s) = curve.max_re_chi() {
        println!("max chi0 = {:.12} at w = {}", s.re_chi(), s.lambda);
    }
    if c.find_eps.unwrap_or(false) {
        let family = SshFamily::along_w(base)?;
        let report = detect_eps(&curve, &family, run.threshold()?);
        let path = run.write("ssh_eps.json", to_json(&report).as_bytes())?;
        println!("{}: {} candidates", path.display(), report.candidates.len());
        for l in report.lambdas() {
            println!("  w_ep = {l:.12}");
        }
    }
    if c.plot.unwrap_or(false) {
        let (dat, gp) = emit_plot_data(&curve, &run.out, "ssh_sweep", "w", "chi0")?;
        println!("{}, {}", dat.display(), gp.display());
    }
    Ok(())
}

fn scaling(run: &Run) -> Result<(), Failure> {
    let c = &run.cfg;
    let sizes = require(c.n_list.clone(), "n")?;
    let fit = scaling_run(c.v.unwrap_or(1.0), &sizes)?;
    match run.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_scaling_csv(&mut buf, &fit)?;
            println!("{}", run.write("scaling.csv", &buf)?.display());
        }
        OutputFormat::Json => {
            println!(
                "{}",
                run.write("scaling.json", to_json(&fit.points).as_bytes())?.display()
            );
        }
    }
    let path = run.write("scaling_fit.json", to_json(&fit).as_bytes())?;
    match fit.slope {
        Some(slope) => println!("{}: slope = {slope:.12}", path.display()),
        None => println!("{}: single size, fit skipped", path.display()),
    }
    Ok(())
}

fn ep_find(run: &Run, input: &Path) -> Result<(), Failure> {
    let c = &run.cfg;
    let file = fs::File::open(input).map_err(|e| Failure::Runtime(format!("{}: {e}", input.display())))?;
    let curve = read_curve_csv(file).map_err(|e| usage(format!("{}: {e}", input.display())))?;
    if curve.is_empty() {
        return Err(Failure::Runtime(format!("{}: no rows", input.display())));
    }
    let family: Box<dyn Family> = match require(c.model.clone(), "model")?.as_str() {
        "toy" => Box::new(ToyFamily),
        "ssh" => Box::new(SshFamily::along_w(SshParams::new(
            require(c.u, "u")?,
            c.v.unwrap_or(1.0),
            curve.samples[0].lambda,
            require(c.n, "n")?,
        )?)?),
        other => return Err(usage(format!("unknown model {other:?}; expected toy or ssh"))),
    };
    let report = detect_eps(&curve, family.as_ref(), run.threshold()?);
    let text = to_json(&report);
    let path = run.write("eps.json", text.as_bytes())?;
    println!("{}: {} candidates", path.display(), report.candidates.len());
    for l in report.lambdas() {
        println!("  lambda_ep = {l:.12}");
    }
    Ok(())
}

fn verify(run: &Run, perturb: Option<f64>) -> Result<(), Failure> {
    let report = run_verify(&VerifyOptions {
        seed: run.cfg.seed.unwrap_or(DEFAULT_SEED),
        perturb_metric: perturb,
    });
    print!("{}", report.table());
    if report.all_passed() {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        Err(Failure::Runtime(format!("{failed} check(s) failed")))
    }
}

fn threads(cfg: &RunConfig) -> Result<Option<usize>, Failure> {
    let n = match cfg.threads {
        Some(n) => Some(n),
        None => match std::env::var("EPHUNT_THREADS") {
            Ok(s) if !s.trim().is_empty() => Some(
                s.trim()
                    .parse()
                    .map_err(|_| usage(format!("EPHUNT_THREADS: invalid thread count {s:?}")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(usage("thread count must be positive"));
    }
    Ok(n)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let top = cli.to_config();
    let cfg = match &cli.config {
        Some(path) => {
            let file = RunConfig::load(path).map_err(|e| usage(e.to_string()))?;
            if let Some(cmd) = &file.command {
                if cmd != cli.command_name() {
                    return Err(usage(format!(
                        "config is for `{cmd}` but `{}` was requested",
                        cli.command_name()
                    )));
                }
            }
            file.overridden_by(top)
        }
        None => top,
    };

    if let Some(n) = threads(&cfg)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }

    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let run = Run {
        format: cfg.format.unwrap_or_default(),
        cfg,
        out,
    };
    if !matches!(cli.command, Command::Verify(_)) {
        ensure_dir(&run.out)?;
    }
    match &cli.command {
        Command::ToySweep(_) => toy_sweep(&run),
        Command::SshSweep(_) => ssh_sweep(&run),
        Command::Scaling(_) => scaling(&run),
        Command::EpFind(a) => ep_find(&run, &a.input),
        Command::Verify(a) => verify(&run, a.perturb_metric),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use cclab_core::acceptance::{run_all, SuiteOptions};
use cclab_core::convexity::{
    build_fowler_instance_with, descending_t0, reflected_ball_step, scan_balls, verify_hypotheses,
    InstanceOptions, SampleSpec, StepOptions, DEFAULT_EXCLUSION_RADIUS,
};
use cclab_core::fixtures::{fowler_ball, kelvin_fixture, symmetric_bubble, KelvinKind};
use cclab_core::fowler::{
    equilibrium_v0, integrate, orbit_extrema, period_with_step, FowlerParams, DEFAULT_STEP,
};
use cclab_core::moving_planes::{w_field, GridSpec, HalfSpaceDomain};
use cclab_core::{Dimension, Error};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  I/O or other failure
  2  invalid arguments or parameters
  3  numerical failure (integration escape, no moving-plane start, residual above threshold)
  4  hypothesis violated (boundary mean curvature, residual or completeness)
  5  positivity failure (min h <= 0 on a scanned sphere, w < 0 past λ₀)
  6  check-all: at least one criterion failed";

#[derive(Parser)]
#[command(name = "cclab", version, about = "Conformal convexity lab", after_help = EXIT_CODES)]
struct Cli {
    /// Flat `key = value` file; `command = <name>` picks the command.
    /// Flags on the command line override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "CCLAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a Fowler orbit and write t,v,w,H as CSV.
    #[command(args_override_self = true)]
    Fowler(FowlerArgs),
    /// Periods of the Fowler orbits over a grid of n and ε/v0.
    #[command(args_override_self = true)]
    PeriodTable(PeriodTableArgs),
    /// Verify the hypotheses on a Fowler instance and scan interior spheres.
    #[command(args_override_self = true)]
    Scan(ScanArgs),
    /// One reflected-ball moving-plane step on a reference fixture.
    #[command(args_override_self = true)]
    MovingPlanes(MovingPlanesArgs),
    /// Yamabe residual of a Kelvin-transformed solution.
    #[command(args_override_self = true)]
    KelvinCheck(KelvinCheckArgs),
    /// Run every acceptance criterion and print a pass/fail table.
    #[command(args_override_self = true)]
    CheckAll(CheckAllArgs),
}

#[derive(Args, Clone, Copy)]
#[group(required = true, multiple = false)]
struct Epsilon {
    /// Minimum of v.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Minimum of v as a fraction of the equilibrium value v0(n).
    #[arg(long)]
    epsilon_frac: Option<f64>,
}

impl Epsilon {
    fn resolve(self, n: Dimension) -> f64 {
        match (self.epsilon, self.epsilon_frac) {
            (Some(e), _) => e,
            (None, Some(f)) => f * equilibrium_v0(n),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Args)]
struct FowlerArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    epsilon: Epsilon,
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    #[arg(long, default_value_t = 20.0)]
    t_max: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    /// CSV destination. Without it the CSV goes to stdout and the JSON
    /// summary to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PeriodTableArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,4,5,6")]
    n: Vec<usize>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.3,0.5,0.7,0.9,0.99"
    )]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    epsilon: Epsilon,
    /// Phase t₀ with the minimum of v at t = 0; the hypotheses need t₀ on
    /// the descending half [P/2, P].
    #[arg(long, conflicts_with = "descent")]
    t0: Option<f64>,
    /// Position on the descending half, 0 at the maximum and 1 at the minimum.
    #[arg(long, default_value_t = 0.5)]
    descent: f64,
    #[arg(long, default_value_t = 200)]
    balls: usize,
    /// Boundary samples per sphere.
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EXCLUSION_RADIUS)]
    exclusion_radius: f64,
    /// Scan even when the hypotheses fail (the exit code still reports it).
    #[arg(long)]
    override_hypotheses: bool,
    /// JSON destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-ball CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepFixtureKind {
    /// Bubble whose inverted image is symmetric about a known plane.
    Symmetric,
    /// Fowler instance with a small ball near the singular point.
    Fowler,
}

#[derive(Args)]
struct MovingPlanesArgs {
    #[arg(long, value_enum, default_value = "symmetric")]
    fixture: StepFixtureKind,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// ε/v0 for the Fowler fixture.
    #[arg(long, default_value_t = 0.5)]
    epsilon_frac: f64,
    /// Grid cells across the box.
    #[arg(long, default_value_t = 24)]
    cells: usize,
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// w_{λ₀} on the grid as x1..xn,w.
    #[arg(long)]
    field_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KelvinFixtureKind {
    Bubble,
    Cylinder,
    Fowler,
}

#[derive(Args)]
struct KelvinCheckArgs {
    #[arg(long, value_enum, default_value = "bubble")]
    fixture: KelvinFixtureKind,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct CheckAllArgs {
    /// Smaller scans and grids.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(cli) => cli,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn parse_args() -> Result<Cli> {
    let mut args: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config::config_path(&args) {
        let file = config::load(Path::new(&path))?;
        let names: Vec<String> = Cli::command()
            .get_subcommands()
            .map(|c| c.get_name().to_string())
            .collect();
        args = config::splice(args, &file, &names);
    }
    Ok(Cli::try_parse_from(args).unwrap_or_else(|e| e.exit()))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidDimension(_) | Error::Parameter(_)) => 2,
        Some(Error::HypothesisViolation(_)) => 4,
        Some(Error::Io(_)) | None => 1,
        Some(_) => 3,
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Parameter("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("building the thread pool")?;
    }
    match cli.command {
        Command::Fowler(a) => fowler(a),
        Command::PeriodTable(a) => period_table(a),
        Command::Scan(a) => scan(a),
        Command::MovingPlanes(a) => moving_planes(a),
        Command::KelvinCheck(a) => kelvin_check(a),
        Command::CheckAll(a) => check_all(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Pretty JSON to `path` or stdout, newline terminated.
fn emit_json(value: &impl serde::Serialize, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => create(p)?.write_all(text.as_bytes())?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn fowler(a: FowlerArgs) -> Result<u8> {
    let n = Dimension::new(a.n)?;
    let params = FowlerParams::new(n, a.epsilon.resolve(n), 0.0)?;
    let traj = integrate(&params, a.t_min, a.t_max, a.step)?;
    let period = if params.is_equilibrium() {
        None
    } else {
        Some(period_with_step(params.epsilon, n, a.step)?)
    };
    let extrema = match orbit_extrema(&traj) {
        Ok(e) => Some(e),
        Err(Error::InsufficientSpan { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let summary = json!({
        "n": a.n,
        "epsilon": params.epsilon,
        "v0": equilibrium_v0(n),
        "period": period,
        "v_min": extrema.map(|e| e.0),
        "v_max": extrema.map(|e| e.1),
        "samples": traj.samples().len(),
        "max_energy_drift": traj.max_energy_drift(),
    });
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            traj.write_csv(&mut w)?;
            w.flush()?;
            emit_json(&summary, None)?;
        }
        None => {
            traj.write_csv(io::stdout().lock())?;
            eprintln!("{}", serde_json::to_string_pretty(&summary)?);
        }
    }
    Ok(0)
}

fn period_table(a: PeriodTableArgs) -> Result<u8> {
    let mut jobs = Vec::new();
    for &n in &a.n {
        let n = Dimension::new(n)?;
        for &f in &a.fractions {
            if !(f > 0.0 && f < 1.0) {
                return Err(
                    Error::Parameter(format!("fractions must lie in (0, 1), got {f}")).into(),
                );
            }
            jobs.push((n, f));
        }
    }
    let rows: Vec<_> = jobs
        .par_iter()
        .map(|&(n, f)| {
            let eps = f * equilibrium_v0(n);
            period_with_step(eps, n, a.step).map(|p| (n, f, eps, p))
        })
        .collect::<Result<_, _>>()?;
    let out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = out;
    writeln!(out, "n,epsilon_frac,epsilon,period,linear_limit")?;
    for (n, f, eps, p) in rows {
        let limit = 2.0 * std::f64::consts::PI / (n.as_f64() - 2.0).sqrt();
        writeln!(
            out,
            "{},{},{},{},{}",
            n.get(),
            f,
            cclab_core::export::fmt_f64(eps),
            cclab_core::export::fmt_f64(p),
            cclab_core::export::fmt_f64(limit)
        )?;
    }
    out.flush()?;
    Ok(0)
}

fn scan(a: ScanArgs) -> Result<u8> {
    let n = Dimension::new(a.n)?;
    let eps = a.epsilon.resolve(n);
    FowlerParams::new(n, eps, 0.0)?;
    let t0 = match a.t0 {
        Some(t) => t,
        None => descending_t0(n, eps, a.descent)?,
    };
    let opts = InstanceOptions {
        exclusion_radius: a.exclusion_radius,
        allow_violations: a.override_hypotheses,
        ..InstanceOptions::default()
    };
    let inst = build_fowler_instance_with(n, eps, t0, &opts)?;
    let hyp = verify_hypotheses(
        &inst,
        &SampleSpec {
            seed: a.seed,
            ..SampleSpec::default()
        },
    )?;
    if !hyp.passed {
        eprintln!("hypotheses: {}", serde_json::to_string(&hyp)?);
        if !a.override_hypotheses {
            bail!(Error::HypothesisViolation(
                "instance fails the hypothesis checks (see report above)".into()
            ));
        }
    }
    let report = scan_balls(&inst, a.balls, a.points, a.seed)?;
    emit_json(&report, a.out.as_deref())?;
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    if !hyp.passed {
        return Ok(4);
    }
    if !(report.global_min_h > 0.0) {
        eprintln!("min h = {} is not positive", report.global_min_h);
        return Ok(5);
    }
    Ok(0)
}

fn moving_planes(a: MovingPlanesArgs) -> Result<u8> {
    let n = Dimension::new(a.n)?;
    let fixture = match a.fixture {
        StepFixtureKind::Symmetric => symmetric_bubble(n)?,
        StepFixtureKind::Fowler => fowler_ball(n, a.epsilon_frac)?,
    };
    let opts = StepOptions {
        cells: a.cells,
        tolerance: a.tolerance,
        ..StepOptions::default()
    };
    let step = reflected_ball_step(
        &fixture.instance,
        &fixture.ball,
        &fixture.p,
        &fixture.q,
        &opts,
    )?;
    emit_json(
        &json!({
            "expected_plane": fixture.expected_plane,
            "step": step,
        }),
        a.out.as_deref(),
    )?;
    if let Some(path) = &a.field_csv {
        let problem = fixture.exterior()?;
        let grid = GridSpec::enclosing(&problem.exclusions, a.cells)?;
        let domain = HalfSpaceDomain::new(step.search.lambda0, problem.exclusions, grid);
        let mut w = create(path)?;
        w_field(&problem.v, &domain)?.write_csv(&mut w)?;
        w.flush()?;
    }
    if step.min_w_interior.is_some_and(|m| m < -1e-10) {
        return Ok(5);
    }
    Ok(0)
}

fn kelvin_check(a: KelvinCheckArgs) -> Result<u8> {
    let n = Dimension::new(a.n)?;
    let kind = match a.fixture {
        KelvinFixtureKind::Bubble => KelvinKind::Bubble,
        KelvinFixtureKind::Cylinder => KelvinKind::Cylinder,
        KelvinFixtureKind::Fowler => KelvinKind::Fowler,
    };
    if a.points == 0 {
        return Err(Error::Parameter("--points must be positive".into()).into());
    }
    let r = kelvin_fixture(kind, n)?.residuals(a.points, a.seed)?;
    emit_json(&r, None)?;
    if r.max_analytic < 1e-10 && r.max_fd < 1e-6 {
        Ok(0)
    } else {
        Ok(3)
    }
}

fn check_all(a: CheckAllArgs) -> Result<u8> {
    let results = run_all(&SuiteOptions {
        quick: a.quick,
        seed: a.seed,
    });
    let mut out = io::stdout().lock();
    for r in &results {
        writeln!(
            out,
            "{:>2}  {}  {:<36} {:>7.2}s  {}",
            r.id,
            if r.passed { "PASS" } else { "FAIL" },
            r.title,
            r.seconds,
            r.detail
        )?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} passed, {failed} failed", results.len() - failed)?;
    Ok(if failed == 0 { 0 } else { 6 })
}

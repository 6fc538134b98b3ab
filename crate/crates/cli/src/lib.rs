//! `nsys` command-line front end. Every subcommand wraps one library
//! operation; rationals travel as `"p/q"` strings in and out.

#![allow(clippy::result_large_err)]

pub mod render;
pub mod table;

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use nsys_core::blocks::{basic_block, realize, BlockSchedule, Perturbation, RealizedPrefix, SimplexPoint};
use nsys_core::discretize::{approximate, discretize, sup_distance, DiscreteSet};
use nsys_core::exponents::{ratio_extrema, ratio_table, ExponentProfile};
use nsys_core::minima::{
    estimate_exponents, minkowski_window, trajectory, ExponentEstimate, Precision, TargetDescription, TargetVector,
};
use nsys_core::rat::{fmt_rat, parse_rat_list, to_f64};
use nsys_core::spectrum::{realize_spectrum_with, SpectrumOptions};
use nsys_core::systems::{canonical_ramp, validate_generalized, violations, SystemKind};
use nsys_core::{parse_rat, ExtRat, PLMap, Rat};

use render::{render_svg, RenderSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "nsys", version, about = "Exact n-systems, exponent spectra and successive minima")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a map against the n-system or generalized axioms
    Validate(ValidateArgs),
    /// Canonical ramp on [a, b]
    Ramp(RampArgs),
    /// Basic block of a strict simplex point
    Block(BlockArgs),
    /// Block schedule from cycle points and a perturbation
    Schedule(ScheduleArgs),
    /// Realize a schedule on [1, Q]
    Realize(RealizeArgs),
    /// Exact extrema of M_j(q)/q
    Exponents(ExponentsArgs),
    /// Realization certificate for an exponent profile
    Spectrum(SpectrumArgs),
    /// n-system approximating a generalized system
    Discretize(DiscretizeArgs),
    /// Successive minima trajectory and exponent estimates
    Minima(MinimaArgs),
    /// Combined graph as SVG
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    #[value(name = "n-system")]
    NSystem,
    Generalized,
}

impl From<KindArg> for SystemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::NSystem => SystemKind::NSystem,
            KindArg::Generalized => SystemKind::Generalized,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PerturbationArg {
    None,
    Harmonic,
    Geometric,
}

fn rat_arg(s: &str) -> Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

fn rat_list_arg(s: &str) -> Result<Vec<Rat>, String> {
    parse_rat_list(s).map_err(|e| e.to_string())
}

fn ext_arg(s: &str) -> Result<ExtRat, String> {
    ExtRat::parse(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long = "in", default_value = "-")]
    input: String,
    /// Overrides the `kind` field of the file (default n-system)
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Report every violation instead of the first
    #[arg(long)]
    all: bool,
}

#[derive(Args, Debug)]
struct RampArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = rat_arg)]
    from: Rat,
    #[arg(long, value_parser = rat_arg)]
    to: Rat,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct BlockArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated coordinates a_1 < … < a_n summing to 1
    #[arg(long, required = true, value_delimiter = ',', value_parser = rat_arg)]
    a: Vec<Rat>,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct ScheduleArgs {
    #[arg(long)]
    n: usize,
    /// One cycle entry, comma-separated; repeat for each entry
    #[arg(long = "point", required = true, value_parser = rat_list_arg)]
    points: Vec<Vec<Rat>>,
    #[arg(long, value_enum, default_value = "harmonic")]
    perturbation: PerturbationArg,
    #[arg(long, value_parser = rat_arg, default_value = "1/8")]
    eps0: Rat,
    #[arg(long, value_parser = rat_arg, default_value = "1/2")]
    rho: Rat,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct RealizeArgs {
    #[arg(long, default_value = "-")]
    schedule: String,
    #[arg(long, value_parser = rat_arg)]
    horizon: Rat,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct ExponentsArgs {
    /// A system or a realized prefix
    #[arg(long = "in", default_value = "-")]
    input: String,
    #[arg(long)]
    j: Option<usize>,
    /// Breakpoint table of M_j(q)/q instead of extrema; needs --j
    #[arg(long, requires = "j")]
    table: bool,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    n: usize,
    /// Finite entries of ω_0, …, ω_{n−1} in order ("inf" allowed)
    #[arg(long, value_delimiter = ',', value_parser = ext_arg)]
    omega: Vec<ExtRat>,
    /// Index j with ω_j = ∞; repeatable
    #[arg(long = "omega-inf")]
    omega_inf: Vec<usize>,
    #[arg(long = "audit-Q", value_parser = rat_arg)]
    audit_q: Option<Rat>,
    #[arg(long = "audit-tol", value_parser = rat_arg)]
    audit_tol: Option<Rat>,
    /// ε_0 of the harmonic perturbation
    #[arg(long, value_parser = rat_arg)]
    eps0: Option<Rat>,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("grid").required(true).args(["eps", "points"])))]
struct DiscretizeArgs {
    #[arg(long = "in", default_value = "-")]
    input: String,
    /// Target uniform distance; the grid is the multiples of ε/2
    #[arg(long, value_parser = rat_arg)]
    eps: Option<Rat>,
    /// Explicit discrete set, comma-separated
    #[arg(long, value_delimiter = ',', value_parser = rat_arg)]
    points: Option<Vec<Rat>>,
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long)]
    report: Option<String>,
}

#[derive(Args, Debug)]
struct MinimaArgs {
    /// Components such as 1,phi or 1,sqrt(2),1/3
    #[arg(long)]
    u: String,
    #[arg(long, value_parser = rat_arg)]
    qmax: Rat,
    #[arg(long, value_parser = rat_arg, default_value = "1/10")]
    step: Rat,
    #[arg(long, value_parser = rat_arg, default_value = "1/2")]
    tail: Rat,
    /// Mantissa bits; overrides NSYS_PRECISION
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long)]
    summary: Option<String>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).multiple(true).args(["input", "minima"])))]
struct PlotArgs {
    /// A system or a realized prefix
    #[arg(long = "in")]
    input: Option<String>,
    /// Minima CSV to overlay
    #[arg(long)]
    minima: Option<String>,
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 500)]
    height: u32,
    #[arg(long)]
    no_guides: bool,
    #[arg(long)]
    slope_labels: bool,
}

/// Summary written next to a minima CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaSummary {
    pub dim: usize,
    pub q_max: f64,
    pub step: f64,
    pub precision: Precision,
    pub target: TargetDescription,
    pub minkowski_window: (f64, f64),
    pub estimate: ExponentEstimate,
}

/// Discretization report; rationals as strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscretizeReport {
    pub eps: Option<String>,
    pub sup_distance: String,
    pub attained_at: String,
    pub grid_points: usize,
    pub ok: bool,
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Failure(Value),
}

impl From<nsys_core::Error> for CliError {
    fn from(e: nsys_core::Error) -> Self {
        use nsys_core::Error as E;
        let message = e.to_string();
        CliError::Failure(match e {
            E::Violation(v) => json!({"error": "violation", "message": message, "report": v}),
            E::Relations(vs) => json!({"error": "relations", "message": message, "report": vs}),
            E::Hypotheses(vs) => json!({"error": "hypotheses", "message": message, "report": vs}),
            E::Json(_) | E::ParseRat(_) | E::Malformed(_) => json!({"error": "parse", "message": message}),
            _ => json!({"error": "precondition", "message": message}),
        })
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(json!({"error": "parse", "message": e.to_string()}))
    }
}

fn precondition(message: String) -> CliError {
    CliError::Failure(json!({"error": "precondition", "message": message}))
}

struct Streams<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
}

impl Streams<'_> {
    fn read(&mut self, path: &str) -> Result<String, CliError> {
        let mut s = String::new();
        if path == "-" {
            self.stdin.read_to_string(&mut s).map_err(|e| CliError::Io(format!("stdin: {e}")))?;
            Ok(s)
        } else {
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
        }
    }

    fn write(&mut self, path: &str, content: &[u8]) -> Result<(), CliError> {
        if path == "-" {
            self.stdout.write_all(content).map_err(|e| CliError::Io(format!("stdout: {e}")))
        } else {
            std::fs::write(path, content).map_err(|e| CliError::Io(format!("{path}: {e}")))
        }
    }

    fn write_json<T: Serialize>(&mut self, path: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(path, text.as_bytes())
    }
}

/// A bare map, or the `system` of a realized prefix.
fn load_map(text: &str) -> Result<(PLMap, Option<String>), CliError> {
    let v: Value = serde_json::from_str(text)?;
    let inner = v.get("system").cloned().unwrap_or(v);
    let kind = inner.get("kind").and_then(Value::as_str).map(str::to_string);
    Ok((serde_json::from_value(inner)?, kind))
}

fn cmd_validate(a: ValidateArgs, io: &mut Streams, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (map, tag) = load_map(&io.read(&a.input)?)?;
    let kind = match (a.kind, tag.as_deref()) {
        (Some(k), _) => k.into(),
        (None, None | Some("n-system")) => SystemKind::NSystem,
        (None, Some("generalized")) => SystemKind::Generalized,
        (None, Some(other)) => return Err(precondition(format!("unknown system kind {other:?}"))),
    };
    let mut found = violations(&map, kind);
    if found.is_empty() {
        let segments = map.breakpoints().len() - 1;
        io.write_json("-", &json!({"valid": true, "kind": kind.tag(), "n": map.n(), "segments": segments}))?;
        return Ok(EXIT_OK);
    }
    if !a.all {
        found.truncate(1);
    }
    let report = json!({"error": "violation", "valid": false, "kind": kind.tag(), "violations": found});
    write_report(stderr, &report);
    Ok(EXIT_FAILURE)
}

fn cmd_block(a: BlockArgs, io: &mut Streams) -> Result<i32, CliError> {
    if a.a.len() != a.n {
        return Err(precondition(format!("--a has {} coordinates, expected n = {}", a.a.len(), a.n)));
    }
    let block = basic_block(&SimplexPoint::new(a.a)?)?;
    io.write(&a.out, format!("{}\n", block.to_json()).as_bytes())?;
    Ok(EXIT_OK)
}

fn cmd_schedule(a: ScheduleArgs, io: &mut Streams) -> Result<i32, CliError> {
    let cycle = a.points.into_iter().map(SimplexPoint::new).collect::<nsys_core::Result<Vec<_>>>()?;
    let perturbation = match a.perturbation {
        PerturbationArg::None => Perturbation::None,
        PerturbationArg::Harmonic => Perturbation::Harmonic { eps0: a.eps0 },
        PerturbationArg::Geometric => Perturbation::Geometric { eps0: a.eps0, rho: a.rho },
    };
    let schedule = BlockSchedule::new(a.n, cycle, perturbation)?;
    io.write_json(&a.out, &schedule)?;
    Ok(EXIT_OK)
}

fn cmd_realize(a: RealizeArgs, io: &mut Streams) -> Result<i32, CliError> {
    let schedule: BlockSchedule = serde_json::from_str(&io.read(&a.schedule)?)?;
    let prefix: RealizedPrefix = realize(&schedule, &a.horizon)?;
    io.write_json(&a.out, &prefix)?;
    Ok(EXIT_OK)
}

fn cmd_exponents(a: ExponentsArgs, io: &mut Streams) -> Result<i32, CliError> {
    let (map, _) = load_map(&io.read(&a.input)?)?;
    if a.table {
        let j = a.j.expect("clap enforces --j with --table");
        io.write_json(&a.out, &ratio_table(&map, j)?)?;
    } else {
        let js: Vec<usize> = a.j.map_or_else(|| (1..=map.n()).collect(), |j| vec![j]);
        let rows = js.into_iter().map(|j| ratio_extrema(&map, j)).collect::<nsys_core::Result<Vec<_>>>()?;
        io.write_json(&a.out, &rows)?;
    }
    Ok(EXIT_OK)
}

/// Places the `--omega` entries into the slots not claimed by `--omega-inf`.
fn assemble_profile(n: usize, finite: Vec<ExtRat>, infinite: &[usize]) -> Result<ExponentProfile, CliError> {
    if let Some(j) = infinite.iter().find(|&&j| j >= n) {
        return Err(precondition(format!("--omega-inf {j} outside 0..{n}")));
    }
    let open = (0..n).filter(|j| !infinite.contains(j)).count();
    if open != finite.len() {
        return Err(precondition(format!("expected {open} entries in --omega, got {}", finite.len())));
    }
    let mut rest = finite.into_iter();
    let values = (0..n).map(|j| if infinite.contains(&j) { ExtRat::Infinity } else { rest.next().unwrap() }).collect();
    Ok(ExponentProfile::new(values)?)
}

fn cmd_spectrum(a: SpectrumArgs, io: &mut Streams) -> Result<i32, CliError> {
    let omega = assemble_profile(a.n, a.omega, &a.omega_inf)?;
    let mut opts = SpectrumOptions::default();
    if let Some(q) = a.audit_q {
        opts.audit_horizon = q;
    }
    if let Some(t) = a.audit_tol {
        opts.audit_tolerance = t;
    }
    if let Some(eps0) = a.eps0 {
        opts.perturbation = Perturbation::Harmonic { eps0 };
    }
    let cert = realize_spectrum_with(&omega, &opts)?;
    io.write_json(&a.out, &cert)?;
    Ok(EXIT_OK)
}

fn cmd_discretize(a: DiscretizeArgs, io: &mut Streams, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (map, _) = load_map(&io.read(&a.input)?)?;
    let g = validate_generalized(map).map_err(nsys_core::Error::Violation)?;
    let (system, report) = match (&a.eps, a.points) {
        (Some(eps), _) => {
            let r = approximate(&g, eps)?;
            let report = DiscretizeReport {
                eps: Some(fmt_rat(eps)),
                sup_distance: fmt_rat(&r.sup_distance),
                attained_at: fmt_rat(&r.attained_at),
                grid_points: r.grid.points().len(),
                ok: r.ok,
            };
            (r.system, report)
        }
        (None, Some(points)) => {
            let grid = DiscreteSet::from_points(points);
            let system = discretize(&g, &grid)?;
            let (d, at) = sup_distance(g.map(), system.map())?;
            let report = DiscretizeReport {
                eps: None,
                sup_distance: fmt_rat(&d),
                attained_at: fmt_rat(&at),
                grid_points: grid.points().len(),
                ok: true,
            };
            (system, report)
        }
        (None, None) => unreachable!("clap requires --eps or --points"),
    };
    io.write(&a.out, format!("{}\n", system.to_json()).as_bytes())?;
    match (&a.report, a.out.as_str()) {
        (Some(path), _) => io.write_json(path, &report)?,
        (None, "-") => {}
        (None, _) => io.write_json("-", &report)?,
    }
    if report.ok {
        Ok(EXIT_OK)
    } else {
        let v = json!({"error": "tolerance", "message": "uniform distance exceeds ε", "report": report});
        write_report(stderr, &v);
        Ok(EXIT_FAILURE)
    }
}

fn cmd_minima(a: MinimaArgs, io: &mut Streams) -> Result<i32, CliError> {
    let u = TargetVector::parse(&a.u)?;
    let precision = match a.precision {
        Some(bits) => Precision::from_bits(bits)?,
        None => Precision::from_env()?,
    };
    let (q_max, step, tail) = (to_f64(&a.qmax), to_f64(&a.step), to_f64(&a.tail));
    let traj = trajectory(&u, q_max, step, precision)?;
    let estimate = estimate_exponents(&traj, tail)?;
    let mut csv_bytes = Vec::new();
    table::write_csv(&traj, &mut csv_bytes).map_err(|e| CliError::Io(e.to_string()))?;
    io.write(&a.out, &csv_bytes)?;
    let summary = MinimaSummary {
        dim: traj.dim,
        q_max,
        step,
        precision,
        target: traj.target.clone(),
        minkowski_window: minkowski_window(traj.dim),
        estimate,
    };
    match (&a.summary, a.out.as_str()) {
        (Some(path), _) => io.write_json(path, &summary)?,
        (None, "-") => {}
        (None, _) => io.write_json("-", &summary)?,
    }
    Ok(EXIT_OK)
}

fn cmd_plot(a: PlotArgs, io: &mut Streams) -> Result<i32, CliError> {
    let map = match &a.input {
        Some(path) => {
            let (map, _) = load_map(&io.read(path)?)?;
            Some(validate_generalized(map).map_err(nsys_core::Error::Violation)?.into_map())
        }
        None => None,
    };
    let series = match &a.minima {
        Some(path) => {
            let text = io.read(path)?;
            Some(table::read_series(text.as_bytes()).map_err(|m| CliError::Failure(json!({"error": "parse", "message": m})))?)
        }
        None => None,
    };
    let spec = RenderSpec {
        system: map.as_ref(),
        minima: series.as_ref(),
        width: a.width,
        height: a.height,
        guides: !a.no_guides,
        slope_labels: a.slope_labels,
    };
    io.write(&a.out, render_svg(&spec).as_bytes())?;
    Ok(EXIT_OK)
}

fn dispatch(cmd: Command, io: &mut Streams, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Validate(a) => cmd_validate(a, io, stderr),
        Command::Ramp(a) => {
            let ramp = canonical_ramp(a.n, &a.from, &a.to)?;
            io.write(&a.out, format!("{}\n", ramp.to_json()).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Block(a) => cmd_block(a, io),
        Command::Schedule(a) => cmd_schedule(a, io),
        Command::Realize(a) => cmd_realize(a, io),
        Command::Exponents(a) => cmd_exponents(a, io),
        Command::Spectrum(a) => cmd_spectrum(a, io),
        Command::Discretize(a) => cmd_discretize(a, io, stderr),
        Command::Minima(a) => cmd_minima(a, io),
        Command::Plot(a) => cmd_plot(a, io),
    }
}

fn write_report(stderr: &mut dyn Write, v: &Value) {
    let _ = writeln!(stderr, "{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

/// Runs with explicit streams; returns the process exit code.
pub fn run_with<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut io = Streams { stdin, stdout };
    let code = match dispatch(cli.command, &mut io, stderr) {
        Ok(code) => code,
        Err(CliError::Failure(v)) => {
            write_report(stderr, &v);
            EXIT_FAILURE
        }
        Err(CliError::Io(m)) => {
            write_report(stderr, &json!({"error": "io", "message": m}));
            EXIT_IO
        }
    };
    let _ = io.stdout.flush();
    code
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (stdin, stdout, stderr) = (std::io::stdin(), std::io::stdout(), std::io::stderr());
    run_with(args, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}

//! The `tasep` command line: exact formulas, Monte Carlo, identity suites.
//!
//! Every command prints one JSON run record on stdout. Exit codes: 0 success,
//! 1 usage error, 2 accuracy failure, 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::contour::QuadratureSpec;
use crate::error::Error;
use crate::formulas::{
    head_word, leftmost_probability, leftmost_probability_shifted_step, parse_positions, parse_species,
    tasep_leftmost_probability, transition_probability, Configuration, Evaluation, Method, StepInitial,
    SECOND_CLASS,
};
use crate::identities::{evaluate_at, run_suite, CheckOptions, IdentityKind, RationalPoint};
use crate::simulator::{
    estimate_event, estimate_position_sweep, estimate_transition, z_score, SimulationEstimate, State,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ACCURACY: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "tasep", version, about = "Exact and Monte Carlo transition probabilities for the TASEP with second class particles")]
pub struct Cli {
    /// Worker threads for parallel loops (default: all cores).
    #[arg(long, global = true, env = "TASEP_THREADS")]
    pub threads: Option<usize>,

    /// Add wall-clock runtime to the record (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a probability formula.
    Exact {
        #[arg(value_enum)]
        kind: Formula,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Estimate an event probability by simulation.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// leftmost: species word 21..1 (any word if all species agree) with x_1 = position;
        /// transition: final state equals --final/--final-species.
        #[arg(long, value_enum, default_value_t = Event::Leftmost)]
        event: Event,
    },
    /// Check algebraic identities in exact rational arithmetic.
    Verify(VerifyArgs),
    /// Evaluate a formula and simulate the same event; report z-scores.
    Compare {
        #[arg(value_enum)]
        kind: Formula,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Largest accepted |z|.
        #[arg(long, default_value_t = 4.0)]
        sigma: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    /// First class particle leftmost at x, species 21..1.
    Leftmost,
    /// Same event from y = (1, 2+l, .., N+l) via the shifted-step formula.
    Shifted,
    /// Single-species leftmost particle at x.
    Tasep,
    /// P(X(t) = X, π(t) = π).
    Transition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Event {
    Leftmost,
    Transition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Residue,
    Quadrature,
    Determinant,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Number of particles (inferred from --initial when omitted).
    #[arg(long)]
    pub n: Option<usize>,
    /// Time t ≥ 0.
    #[arg(long)]
    pub time: f64,
    /// Position x of the leftmost particle.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "sweep")]
    pub position: Option<i64>,
    /// Inclusive range of positions, `x0..x1`.
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
    /// Initial positions `y_1,..,y_N`, strictly increasing.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "step_l")]
    pub initial: Option<String>,
    /// Initial positions 1, 2+l, .., N+l.
    #[arg(long)]
    pub step_l: Option<u32>,
    /// Initial species word (default 21..1, or 1..1 for `tasep`).
    #[arg(long)]
    pub species: Option<String>,
    /// Final positions (transition only).
    #[arg(long, allow_hyphen_values = true)]
    pub r#final: Option<String>,
    /// Final species word (default 21..1).
    #[arg(long)]
    pub final_species: Option<String>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Residue)]
    pub method: MethodArg,
    /// Relative tolerance for quadrature doubling.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Contour radius in (0, 1) for quadrature.
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Starting nodes per variable for quadrature (power of two ≥ 8).
    #[arg(long, default_value_t = 16)]
    pub quad_points: usize,
    /// Also write sweep rows `x,value,method,t,n` to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SimArgs {
    #[arg(long, default_value_t = 100_000)]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// main, equivA, equivB, tasep, vandermonde, detcollapse, amplitude, braid or all.
    #[arg(long, default_value = "all")]
    pub identity: String,
    /// Inclusive range of N, `a..b`.
    #[arg(long, default_value = "2..6")]
    pub n_range: String,
    /// Random points per identity and N.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check at this point instead, e.g. `1/2,1/3`.
    #[arg(long)]
    pub point: Option<String>,
    /// Degree l of the collapse check (random in 0..=3 when omitted).
    #[arg(long)]
    pub l: Option<usize>,
    /// Exponents k_2,..,k_N of the collapse check (random when omitted).
    #[arg(long)]
    pub k: Option<String>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Accuracy { .. } => EXIT_ACCURACY,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub parameters: Value,
    pub method: Option<String>,
    pub result: Value,
    pub error_estimate: Option<f64>,
    pub seed: Option<u64>,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

/// Parses `args`, runs the command, writes the record to `out` and
/// diagnostics to `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    let clock = Instant::now();
    let outcome = pool.install(|| dispatch(&cli.command));
    let (mut record, code) = match outcome {
        Ok(pair) => pair,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            return f.code;
        }
    };
    if cli.timing {
        record.runtime_seconds = Some(clock.elapsed().as_secs_f64());
    }
    match serde_json::to_string_pretty(&record) {
        Ok(text) => {
            let _ = writeln!(out, "{text}");
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    }
    code
}

fn dispatch(command: &Command) -> CliResult<(RunRecord, i32)> {
    match command {
        Command::Exact { kind, model, eval } => cmd_exact(*kind, model, eval),
        Command::Simulate { model, sim, event } => cmd_simulate(*event, model, sim),
        Command::Verify(args) => cmd_verify(args),
        Command::Compare { kind, model, eval, sim, sigma } => cmd_compare(*kind, model, eval, sim, *sigma),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn record(command: String, parameters: Value, method: Option<String>, result: Value) -> RunRecord {
    RunRecord { command, parameters, method, result, error_estimate: None, seed: None, version: VERSION, runtime_seconds: None }
}

/// `a..b` inclusive.
pub fn parse_range(s: &str) -> CliResult<(i64, i64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| Failure::usage(format!("range {s:?} is not of the form a..b")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<i64>()
            .map_err(|_| Failure::usage(format!("cannot parse {v:?} in range {s:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(Failure::usage(format!("empty range {s:?}")));
    }
    Ok((a, b))
}

fn positions_requested(model: &ModelArgs) -> CliResult<Vec<i64>> {
    match (model.position, &model.sweep) {
        (Some(x), None) => Ok(vec![x]),
        (None, Some(r)) => {
            let (a, b) = parse_range(r)?;
            Ok((a..=b).collect())
        }
        _ => Err(Failure::usage("give --position or --sweep")),
    }
}

fn method_of(eval: &EvalArgs) -> CliResult<Method> {
    Ok(match eval.method {
        MethodArg::Residue => Method::Residue,
        MethodArg::Determinant => Method::Determinant,
        MethodArg::Quadrature => {
            let spec = QuadratureSpec::default()
                .with_radius(eval.radius)
                .with_tolerance(eval.tol)
                .with_points(eval.quad_points);
            spec.validate()?;
            Method::Quadrature(spec)
        }
    })
}

fn check_n(model: &ModelArgs, found: usize) -> CliResult<()> {
    match model.n {
        Some(n) if n != found => Err(Failure::usage(format!("--n {n} but {found} initial positions"))),
        _ => Ok(()),
    }
}

/// The initial configuration from `--initial`/`--step-l` and `--species`.
fn initial_configuration(model: &ModelArgs, default_species: impl Fn(usize) -> Vec<u8>) -> CliResult<Configuration> {
    let positions = match (&model.initial, model.step_l) {
        (Some(p), None) => parse_positions(p)?,
        (None, Some(l)) => {
            let n = model.n.ok_or_else(|| Failure::usage("--step-l needs --n"))?;
            StepInitial::new(l).positions(n)
        }
        _ => return Err(Failure::usage("give --initial or --step-l")),
    };
    check_n(model, positions.len())?;
    let n = positions.len();
    let species = match &model.species {
        Some(s) => parse_species(s)?,
        None => default_species(n),
    };
    Configuration::new(positions, species).map_err(|e| Failure::usage(e.to_string()))
}

fn final_configuration(model: &ModelArgs) -> CliResult<Configuration> {
    let positions = parse_positions(
        model.r#final.as_deref().ok_or_else(|| Failure::usage("transition needs --final"))?,
    )?;
    let species = match &model.final_species {
        Some(s) => parse_species(s)?,
        None => head_word(positions.len()),
    };
    Configuration::new(positions, species).map_err(|e| Failure::usage(e.to_string()))
}

fn check_time(t: f64) -> CliResult<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Failure::usage(format!("--time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// The evaluated formula at each requested point.
struct Exact {
    initial: Configuration,
    target: Option<Configuration>,
    xs: Vec<i64>,
    evaluations: Vec<Evaluation>,
}

fn evaluate(kind: Formula, model: &ModelArgs, eval: &EvalArgs) -> CliResult<Exact> {
    check_time(model.time)?;
    let method = method_of(eval)?;
    let t = model.time;
    match kind {
        Formula::Transition => {
            if model.position.is_some() || model.sweep.is_some() {
                return Err(Failure::usage("transition takes --final, not --position/--sweep"));
            }
            let y = initial_configuration(model, head_word)?;
            let x = final_configuration(model)?;
            let e = transition_probability(&y, &x, t, &method)?;
            Ok(Exact { initial: y, target: Some(x), xs: Vec::new(), evaluations: vec![e] })
        }
        Formula::Leftmost | Formula::Shifted | Formula::Tasep => {
            let xs = positions_requested(model)?;
            let y = match kind {
                Formula::Tasep => initial_configuration(model, |n| vec![SECOND_CLASS; n])?,
                Formula::Shifted => {
                    if model.initial.is_some() || model.species.is_some() {
                        return Err(Failure::usage("shifted takes --step-l and --n only"));
                    }
                    initial_configuration(model, head_word)?
                }
                _ => initial_configuration(model, head_word)?,
            };
            let mut evaluations = Vec::with_capacity(xs.len());
            for &x in &xs {
                evaluations.push(match kind {
                    Formula::Leftmost => leftmost_probability(&y, x, t, &method)?,
                    Formula::Tasep => tasep_leftmost_probability(&y, x, t, &method)?,
                    _ => {
                        let l = model.step_l.expect("checked by initial_configuration");
                        leftmost_probability_shifted_step(l, y.n(), x, t, &method)?
                    }
                });
            }
            Ok(Exact { initial: y, target: None, xs, evaluations })
        }
    }
}

fn largest_error(evaluations: &[Evaluation]) -> Option<f64> {
    evaluations.iter().filter_map(|e| e.error_estimate).reduce(f64::max)
}

fn write_csv(path: &PathBuf, exact: &Exact, t: f64) -> CliResult<()> {
    let io = |e: std::io::Error| Failure::usage(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Failure::usage(format!("cannot write {}: {e}", path.display()));
    w.write_record(["x", "value", "method", "t", "n"]).map_err(csv_err)?;
    for (x, e) in exact.xs.iter().zip(&exact.evaluations) {
        w.write_record([x.to_string(), e.value.to_string(), e.method.to_string(), t.to_string(), exact.initial.n().to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

fn cmd_exact(kind: Formula, model: &ModelArgs, eval: &EvalArgs) -> CliResult<(RunRecord, i32)> {
    let exact = evaluate(kind, model, eval)?;
    if let Some(path) = &eval.csv {
        if exact.xs.is_empty() {
            return Err(Failure::usage("--csv needs --position or --sweep"));
        }
        write_csv(path, &exact, model.time)?;
    }
    let method = exact.evaluations[0].method.to_string();
    let result = if let Some(x) = &exact.target {
        json!({ "initial": exact.initial.to_string(), "final": x.to_string(), "value": exact.evaluations[0].value })
    } else {
        let values: Vec<Value> = exact
            .xs
            .iter()
            .zip(&exact.evaluations)
            .map(|(x, e)| json!({ "x": x, "value": e.value, "error_estimate": e.error_estimate, "points": e.points }))
            .collect();
        json!({ "initial": exact.initial.to_string(), "values": values })
    };
    let mut rec = record(
        format!("exact {}", to_value(&kind).as_str().unwrap_or_default()),
        json!({ "model": to_value(model), "evaluation": to_value(eval) }),
        Some(method),
        result,
    );
    rec.error_estimate = largest_error(&exact.evaluations);
    Ok((rec, EXIT_OK))
}

/// Monte Carlo counterpart of `kind` over the requested positions.
fn simulate_event(
    y: &Configuration,
    target: Option<&Configuration>,
    xs: &[i64],
    t: f64,
    sim: &SimArgs,
) -> CliResult<Vec<SimulationEstimate>> {
    if sim.runs == 0 {
        return Err(Failure::usage("--runs must be at least 1"));
    }
    if let Some(x) = target {
        return Ok(vec![estimate_transition(y, x, t, sim.runs, sim.seed)?]);
    }
    let uniform = y.is_uniform();
    let accept = move |s: &State| uniform || s.is_head_at(s.positions[0]);
    if let [x] = xs {
        let x = *x;
        return Ok(vec![estimate_event(y, |s| s.positions[0] == x && accept(s), t, sim.runs, sim.seed)?]);
    }
    let (from, to) = (xs[0], xs[xs.len() - 1]);
    Ok(estimate_position_sweep(y, from, to, t, sim.runs, sim.seed, accept)?)
}

fn cmd_simulate(event: Event, model: &ModelArgs, sim: &SimArgs) -> CliResult<(RunRecord, i32)> {
    check_time(model.time)?;
    let y = initial_configuration(model, head_word)?;
    let (target, xs) = match event {
        Event::Transition => (Some(final_configuration(model)?), Vec::new()),
        Event::Leftmost => (None, positions_requested(model)?),
    };
    let estimates = simulate_event(&y, target.as_ref(), &xs, model.time, sim)?;
    let result = match &target {
        Some(x) => json!({ "initial": y.to_string(), "final": x.to_string(), "estimate": to_value(&estimates[0]) }),
        None => {
            let values: Vec<Value> =
                xs.iter().zip(&estimates).map(|(x, e)| json!({ "x": x, "estimate": to_value(e) })).collect();
            json!({ "initial": y.to_string(), "values": values })
        }
    };
    let mut rec = record(
        "simulate".into(),
        json!({ "event": to_value(&event), "model": to_value(model), "simulation": to_value(sim) }),
        Some("monte-carlo".into()),
        result,
    );
    rec.error_estimate = estimates.iter().map(|e| e.std_error).reduce(f64::max);
    rec.seed = Some(sim.seed);
    Ok((rec, EXIT_OK))
}

fn cmd_compare(kind: Formula, model: &ModelArgs, eval: &EvalArgs, sim: &SimArgs, sigma: f64) -> CliResult<(RunRecord, i32)> {
    if !(sigma > 0.0) {
        return Err(Failure::usage("--sigma must be positive"));
    }
    if sim.runs == 0 {
        return Err(Failure::usage("--runs must be at least 1"));
    }
    let exact = evaluate(kind, model, eval)?;
    let y = exact.initial.clone();
    let estimates = simulate_event(&y, exact.target.as_ref(), &exact.xs, model.time, sim)?;
    let mut pass = true;
    let mut rows = Vec::new();
    for (i, (e, mc)) in exact.evaluations.iter().zip(&estimates).enumerate() {
        let z = z_score(e.value, mc);
        let ok = z.abs() <= sigma;
        pass &= ok;
        let mut row = json!({ "exact": e.value, "estimate": to_value(mc), "z": finite_or_string(z), "pass": ok });
        if let Some(x) = exact.xs.get(i) {
            row["x"] = json!(x);
        }
        rows.push(row);
    }
    let mut rec = record(
        format!("compare {}", to_value(&kind).as_str().unwrap_or_default()),
        json!({ "model": to_value(model), "evaluation": to_value(eval), "simulation": to_value(sim), "sigma": sigma }),
        Some(exact.evaluations[0].method.to_string()),
        json!({ "initial": y.to_string(), "values": rows, "pass": pass }),
    );
    rec.error_estimate = largest_error(&exact.evaluations);
    rec.seed = Some(sim.seed);
    Ok((rec, if pass { EXIT_OK } else { EXIT_VERIFICATION }))
}

/// JSON has no infinities.
fn finite_or_string(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<(RunRecord, i32)> {
    let kinds: Vec<IdentityKind> = if args.identity.eq_ignore_ascii_case("all") {
        IdentityKind::ALL.to_vec()
    } else {
        vec![args.identity.parse::<IdentityKind>()?]
    };
    let k = args
        .k
        .as_deref()
        .map(|s| {
            s.split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|_| Failure::usage(format!("cannot parse --k entry {v:?}"))))
                .collect::<CliResult<Vec<_>>>()
        })
        .transpose()?;
    let options = CheckOptions { l: args.l, k };
    let parameters = to_value(args);
    if let Some(p) = &args.point {
        let point = RationalPoint::parse(p)?;
        let reports = kinds
            .iter()
            .map(|&kind| evaluate_at(kind, &point, &options).map(|r| to_value(&r)))
            .collect::<crate::Result<Vec<_>>>()?;
        let pass = reports.iter().all(|r| r["pass"] == json!(true));
        let rec = record("verify".into(), parameters, Some("exact-rational".into()), json!({ "lines": reports, "pass": pass }));
        return Ok((rec, if pass { EXIT_OK } else { EXIT_VERIFICATION }));
    }
    if args.points == 0 {
        return Err(Failure::usage("--points must be at least 1"));
    }
    let (a, b) = parse_range(&args.n_range)?;
    if a < 2 {
        return Err(Failure::usage("identities need N ≥ 2"));
    }
    let lines = run_suite(&kinds, a as usize..=b as usize, args.points, args.seed, &options);
    let pass = lines.iter().all(|l| l.pass);
    let mut rec = record("verify".into(), parameters, Some("exact-rational".into()), json!({ "lines": to_value(&lines), "pass": pass }));
    rec.seed = Some(args.seed);
    Ok((rec, if pass { EXIT_OK } else { EXIT_VERIFICATION }))
}

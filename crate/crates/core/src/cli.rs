//! Command-line front end.
//!
//! Exit codes: 0 success or pass, 1 a check failed, 2 usage or
//! configuration error, 3 numeric failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inversion::{run_check, Check, InversionGrid};
use crate::models::{model_from_config, Domain, ModelConfig, ProcessModel, State};
use crate::simulate::{parse_grid_spec, simulate, DEFAULT_SUBSTEPS};
use crate::suite::{run_suite, McConfig, Suite};
use crate::symmat::SymMatrix;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "timeinv", version, about = "Transition densities, time-inversion checks and path simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the transition density p_t(x, y).
    Density(DensityArgs),
    /// Run one time-inversion check.
    Check(CheckArgs),
    /// Simulate paths and write them as CSV.
    Simulate(SimulateArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct DensityArgs {
    /// Model config: a JSON file, or inline JSON.
    #[arg(long)]
    model: String,
    #[arg(long)]
    t: f64,
    /// Start point: a number, a JSON array, or `I2`-style identity shorthand.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long, allow_hyphen_values = true)]
    y: String,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    check: String,
    /// Evaluation grid as JSON (file or inline).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Second model for `h-invariance`.
    #[arg(long)]
    against: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    paths: usize,
    #[arg(long)]
    seed: u64,
    /// `log:<min>:<max>:<count>`.
    #[arg(long)]
    grid: String,
    #[arg(long)]
    out: PathBuf,
    /// Start point; defaults to the model's reference point.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Sub-steps per grid interval used for the path functionals.
    #[arg(long, default_value_t = DEFAULT_SUBSTEPS)]
    substeps: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit timestamps and durations so reports are reproducible byte for byte.
    #[arg(long)]
    no_timestamp: bool,
}

/// Fully resolved run settings, echoed into every artifact.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Density { model: Option<ModelConfig>, t: f64, x: State, y: State },
    Check {
        model: Option<ModelConfig>,
        check: String,
        grid: InversionGrid,
        tolerance: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        against: Option<ModelConfig>,
    },
    Simulate { model: Option<ModelConfig>, x0: State, paths: usize, seed: u64, times: Vec<f64>, substeps: usize },
    Verify { suite: Suite, monte_carlo: McConfig },
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    result: &'a T,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_usage() || matches!(e, Error::Io(_)) {
        EXIT_USAGE
    } else {
        EXIT_NUMERIC
    }
}

/// Parses `argv` (including the program name), runs one subcommand and
/// returns the exit code. Never panics on bad input.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Density(a) => density(a),
        Command::Check(a) => check(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(pass) => {
            if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Reads a JSON document given inline (starting with `{`) or as a path.
fn read_json(arg: &str) -> Result<serde_json::Value> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Error::config(format!("cannot read {arg}: {e}")))?
    };
    let mut v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::config(format!("{arg} is not valid JSON: {e}")))?;
    expand_identity(&mut v);
    Ok(v)
}

fn load_model(arg: &str) -> Result<ProcessModel> {
    model_from_config(&read_json(arg)?)
}

/// `I3` or `-I3`.
fn identity_shorthand(s: &str) -> Option<SymMatrix> {
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, s),
    };
    let m: usize = rest.strip_prefix('I')?.parse().ok()?;
    (m > 0).then(|| SymMatrix::identity(m).scale(sign))
}

/// Replaces `"I2"`-style strings inside a JSON document by nested arrays.
fn expand_identity(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::String(s) => {
            if let Some(m) = identity_shorthand(s) {
                *v = serde_json::to_value(m.rows()).expect("rows serialize");
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(expand_identity),
        serde_json::Value::Object(o) => o.values_mut().for_each(expand_identity),
        _ => {}
    }
}

/// Parses a state for `domain`: a number, a JSON array (flat for vectors,
/// nested rows for matrices) or identity shorthand.
pub fn parse_state(text: &str, domain: &Domain) -> Result<State> {
    let matrix_domain = matches!(domain, Domain::PositiveDefinite { .. } | Domain::SignedDefinite { .. });
    let bad = |why: String| Error::config(format!("cannot read state '{text}': {why}"));
    if let Some(m) = identity_shorthand(text.trim()) {
        return if matrix_domain { Ok(State::Matrix(m)) } else { Err(bad("identity shorthand needs a matrix model".into())) };
    }
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    match v {
        serde_json::Value::Number(n) => {
            let x = n.as_f64().ok_or_else(|| bad("not a float".into()))?;
            Ok(if matrix_domain { State::Matrix(SymMatrix::diag(&[x])) } else { State::scalar(x) })
        }
        serde_json::Value::Array(_) if matrix_domain => {
            let rows: Vec<Vec<f64>> = serde_json::from_value(v).map_err(|e| bad(e.to_string()))?;
            Ok(State::Matrix(SymMatrix::from_rows(&rows)?))
        }
        serde_json::Value::Array(_) => {
            let xs: Vec<f64> = serde_json::from_value(v).map_err(|e| bad(e.to_string()))?;
            Ok(State::Vector(xs))
        }
        _ => Err(bad("expected a number or an array".into())),
    }
}

fn write_artifact<T: Serialize>(path: &Path, config: &RunConfig, result: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(&Artifact { config, result })?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn density(a: DensityArgs) -> Result<bool> {
    let model = load_model(&a.model)?;
    let x = parse_state(&a.x, model.domain())?;
    let y = parse_state(&a.y, model.domain())?;
    let config = RunConfig::Density { model: model.config().cloned(), t: a.t, x: x.clone(), y: y.clone() };
    let log_p = model.log_density(a.t, &x, &y)?;
    println!("{}", serde_json::to_string(&config)?);
    println!("p_{}({x}, {y}) = {:.16e} (log {:.16e})", a.t, log_p.exp(), log_p);
    Ok(true)
}

fn check(a: CheckArgs) -> Result<bool> {
    let model = load_model(&a.model)?;
    let kind: Check = a.check.parse()?;
    let against = a.against.as_deref().map(load_model).transpose()?;
    let grid = match &a.grid {
        Some(g) => {
            let grid: InversionGrid = serde_json::from_value(read_json(g)?)
                .map_err(|e| Error::config(format!("grid rejected: {e}")))?;
            grid.validate(model.domain())?;
            grid
        }
        None => InversionGrid::standard(model.domain()),
    };
    let tolerance = a.tol.unwrap_or(kind.default_tolerance());
    if !(tolerance > 0.0) {
        return Err(Error::config("--tol must be positive"));
    }
    let config = RunConfig::Check {
        model: model.config().cloned(),
        check: kind.to_string(),
        grid: grid.clone(),
        tolerance,
        against: against.as_ref().and_then(|m| m.config().cloned()),
    };
    let report = run_check(kind, &model, against.as_ref(), Some(&grid), Some(tolerance))?;
    println!("{}", report.summary());
    if let Some(out) = &a.out {
        write_artifact(out, &config, &report)?;
    }
    Ok(report.pass)
}

fn simulate_cmd(a: SimulateArgs) -> Result<bool> {
    let model = load_model(&a.model)?;
    let times = parse_grid_spec(&a.grid)?;
    let x0 = match &a.x0 {
        Some(s) => parse_state(s, model.domain())?,
        None => model.domain().default_start(),
    };
    if a.paths == 0 || a.substeps == 0 {
        return Err(Error::config("--paths and --substeps must be positive"));
    }
    let config = RunConfig::Simulate {
        model: model.config().cloned(),
        x0: x0.clone(),
        paths: a.paths,
        seed: a.seed,
        times: times.clone(),
        substeps: a.substeps,
    };
    let mut ens = simulate(&model, &x0, &times, a.substeps, a.paths, a.seed)?;
    if let Some(obj) = ens.parameters.as_object_mut() {
        obj.insert("run".into(), serde_json::to_value(&config)?);
    } else {
        ens.parameters = serde_json::json!({ "model": ens.parameters, "run": config });
    }
    let meta = ens.save(&a.out)?;
    println!(
        "{} paths of {} on {} times ({}), written to {} and {}",
        ens.len(),
        model.name(),
        times.len(),
        ens.scheme,
        a.out.display(),
        meta.display()
    );
    for w in &ens.quality.warnings {
        println!("warning: {w}");
    }
    Ok(true)
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let suite: Suite = a.suite.parse()?;
    let mut mc = McConfig::default();
    if let Some(p) = a.paths {
        mc.paths = p;
    }
    if let Some(s) = a.seed {
        mc.seed = s;
    }
    let config = RunConfig::Verify { suite, monte_carlo: mc };
    let report = run_suite(suite, &mc, !a.no_timestamp);
    for c in &report.criteria {
        println!("{}", c.line());
    }
    println!("{}", if report.pass { "all criteria passed" } else { "some criteria FAILED" });
    if let Some(out) = &a.out {
        write_artifact(out, &config, &report)?;
    }
    Ok(report.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_forms() {
        let d = Domain::PositiveDefinite { m: 2 };
        assert_eq!(parse_state("I2", &d).unwrap(), State::Matrix(SymMatrix::identity(2)));
        assert_eq!(parse_state("-I2", &d).unwrap(), State::Matrix(SymMatrix::identity(2).scale(-1.0)));
        assert_eq!(parse_state("[[2,0.5],[0.5,1]]", &d).unwrap().components(), vec![2.0, 0.5, 1.0]);
        assert!(parse_state("I2", &Domain::HalfLine).is_err());
        assert!(parse_state("J2", &d).is_err());
    }

    #[test]
    fn scalars_and_vectors() {
        assert_eq!(parse_state("1.5", &Domain::HalfLine).unwrap(), State::scalar(1.5));
        assert_eq!(parse_state("[1,2]", &Domain::RealLine { n: 2 }).unwrap(), State::vector(&[1.0, 2.0]));
        assert!(parse_state("\"x\"", &Domain::HalfLine).is_err());
    }

    #[test]
    fn shorthand_inside_documents() {
        let mut v = serde_json::json!({"x": "I2", "a": ["-I1", 3]});
        expand_identity(&mut v);
        assert_eq!(v, serde_json::json!({"x": [[1.0, 0.0], [0.0, 1.0]], "a": [[[-1.0]], 3]}));
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::config("x")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::numeric("x")), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::NoConvergence { value: 0.0, error: 1.0 }), EXIT_NUMERIC);
        assert_eq!(run(["timeinv", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["timeinv", "verify", "--suite", "nope"]), EXIT_USAGE);
    }
}

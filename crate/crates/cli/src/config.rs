//! Run configuration: a JSON document with unknown keys rejected, defaults
//! filled in, and every cross-field rule of the library re-checked up front.

use std::path::PathBuf;

use nrlimit::grid::SOBOLEV_ORDER_RANGE;
use nrlimit::limit_lab::{DEFAULT_C_VALUES, DEFAULT_C_VALUES_3D, DEFAULT_ORDERS};
use nrlimit::{
    Grid, InitialGuess, Method, NonlinearityKind, NonlinearitySpec, OperatorKind, OperatorSpec, SnapshotFormat,
    SolverConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Sweep,
    Nondeg,
    VerifySymbols,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Nondeg => "nondeg",
            Command::VerifySymbols => "verify-symbols",
            Command::Report => "report",
        }
    }
}

// Raw document. Every section and field is optional.

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    problem: RawProblem,
    grid: RawGrid,
    operator: RawOperator,
    solver: RawSolver,
    analysis: RawAnalysis,
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawProblem {
    n: Option<usize>,
    nonlinearity: Option<NonlinearityKind>,
    p: Option<u32>,
    dealias: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "L")]
    length: Option<f64>,
    #[serde(rename = "N")]
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawOperator {
    kind: Option<OperatorKind>,
    c: Option<f64>,
    c_list: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSolver {
    method: Option<Method>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    time_step: Option<f64>,
    initial_width: Option<f64>,
    stabilization: Option<f64>,
    fallback: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawAnalysis {
    s_list: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    snapshot_format: Option<SnapshotFormat>,
}

/// Validated configuration with all defaults resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub nonlinearity: NonlinearitySpec,
    pub grid: Grid,
    pub operator: OperatorSpec,
    /// Values of `c` for sweeps and symbol checks, ascending.
    pub c_list: Vec<f64>,
    pub solver: SolverConfig,
    pub s_list: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    pub snapshot_format: SnapshotFormat,
}

fn default_grid(n: usize) -> (f64, usize) {
    match n {
        1 => (32.0, 1024),
        2 => (32.0, 256),
        _ => (16.0, 64),
    }
}

/// Symbol checks run over `c = 1, 2, 4, ..., 128` unless told otherwise.
pub fn default_symbol_c_values() -> Vec<f64> {
    (0..=7).map(|k| 2f64.powi(k)).collect()
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text)?;
    resolve(raw)
}

/// Like [`parse_config`], after applying `key.path=value` overrides. Values are
/// read as JSON and fall back to plain strings.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    // report errors in the document itself with its own line numbers
    let raw: RawConfig = serde_json::from_str(text)?;
    if overrides.is_empty() {
        return resolve(raw);
    }
    let mut doc: Value = serde_json::from_str(text)?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    resolve(serde_json::from_value(doc)?)
}

/// Configuration for running `command`. A `command` key in the document must
/// agree with it.
pub fn parse_for_command(text: &str, overrides: &[String], command: Command) -> Result<RunConfig, CliError> {
    let mut all = overrides.to_vec();
    let doc: Value = serde_json::from_str(text)?;
    match doc.get("command") {
        Some(Value::String(name)) if name != command.name() => {
            return Err(CliError::Invalid(vec![format!(
                "command: the document is for `{name}` but `{}` was requested",
                command.name()
            )]))
        }
        _ => all.insert(0, format!("command=\"{}\"", command.name())),
    }
    parse_config_with_overrides(text, &all)
}

fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Invalid(vec![format!("override `{spec}`: expected key=value")]))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Invalid(vec![format!("override `{spec}`: malformed key path")]));
    }
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Invalid(vec![format!("override `{spec}`: `{key}` is not inside a section")]))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Invalid(vec![format!("override `{spec}`: parent is not a section")]))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn resolve(raw: RawConfig) -> Result<RunConfig, CliError> {
    let mut errors = Vec::new();

    let n = raw.problem.n.unwrap_or(1);
    // the only admissible choices in three dimensions, resp. the cubic case in one
    let kind = raw.problem.nonlinearity.unwrap_or(if n == 3 {
        NonlinearityKind::Hartree
    } else {
        NonlinearityKind::Power
    });
    let nonlinearity = match kind {
        NonlinearityKind::Hartree => {
            if raw.problem.p.is_some_and(|p| p != 4) {
                errors.push("problem.p: the Hartree nonlinearity has no free exponent; omit p".to_string());
            }
            NonlinearitySpec::hartree(n)
                .map_err(|e| errors.push(format!("problem.nonlinearity: {e}")))
                .ok()
        }
        NonlinearityKind::Power => NonlinearitySpec::power(raw.problem.p.unwrap_or(if n == 1 { 4 } else { 3 }), n)
            .map_err(|e| errors.push(format!("problem: {e}")))
            .ok(),
    }
    .map(|nl| nl.with_dealiasing(raw.problem.dealias.unwrap_or(false)));

    let (dl, dn) = default_grid(n);
    let grid = Grid::new(n, raw.grid.length.unwrap_or(dl), raw.grid.points.unwrap_or(dn))
        .map_err(|e| errors.push(format!("grid: {e}")))
        .ok();

    let op_kind = raw.operator.kind.unwrap_or(if raw.operator.c.is_some() {
        OperatorKind::PseudoRelativistic
    } else {
        OperatorKind::Nonrelativistic
    });
    let operator = match op_kind {
        OperatorKind::Nonrelativistic => {
            if raw.operator.c.is_some() {
                errors.push("operator.c: the nonrelativistic operator takes no c".to_string());
            }
            Some(OperatorSpec::nonrelativistic())
        }
        OperatorKind::PseudoRelativistic => match raw.operator.c {
            None => {
                errors.push("operator.c: required for the pseudo_relativistic operator".to_string());
                None
            }
            Some(c) => OperatorSpec::pseudo_relativistic(c)
                .map_err(|e| errors.push(format!("operator.c: {e}")))
                .ok(),
        },
    };

    let c_list = raw.operator.c_list.unwrap_or_else(|| match raw.command {
        Some(Command::VerifySymbols) => default_symbol_c_values(),
        _ if n == 3 => DEFAULT_C_VALUES_3D.to_vec(),
        _ => DEFAULT_C_VALUES.to_vec(),
    });
    if c_list.is_empty() {
        errors.push("operator.c_list: must not be empty".to_string());
    }
    if let Some(c) = c_list.iter().find(|c| !(**c >= 1.0 && c.is_finite())) {
        errors.push(format!("operator.c_list: every c must be finite and >= 1 (got {c})"));
    }
    if c_list.windows(2).any(|w| w[0] >= w[1]) {
        errors.push("operator.c_list: values must be strictly ascending".to_string());
    }

    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        method: raw.solver.method.unwrap_or(defaults.method),
        tolerance: raw.solver.tolerance.unwrap_or(defaults.tolerance),
        max_iterations: raw.solver.max_iterations.unwrap_or(defaults.max_iterations),
        time_step: raw.solver.time_step.unwrap_or(defaults.time_step),
        initial_guess: match raw.solver.initial_width {
            Some(width) => InitialGuess::Gaussian { width },
            None => defaults.initial_guess.clone(),
        },
        stabilization: raw.solver.stabilization.or(defaults.stabilization),
        fallback: raw.solver.fallback.unwrap_or(defaults.fallback),
    };
    if let Err(e) = solver.validate() {
        errors.push(format!("solver: {e}"));
    }

    let s_list = raw.analysis.s_list.unwrap_or_else(|| DEFAULT_ORDERS.to_vec());
    if s_list.is_empty() {
        errors.push("analysis.s_list: must not be empty".to_string());
    }
    let (lo, hi) = SOBOLEV_ORDER_RANGE;
    if let Some(s) = s_list.iter().find(|s| !(lo..=hi).contains(*s)) {
        errors.push(format!("analysis.s_list: order {s} outside [{lo}, {hi}]"));
    }
    if s_list.windows(2).any(|w| w[0] >= w[1]) {
        errors.push("analysis.s_list: orders must be strictly ascending".to_string());
    }

    match (nonlinearity, grid, operator) {
        (Some(nonlinearity), Some(grid), Some(operator)) if errors.is_empty() => Ok(RunConfig {
            command: raw.command,
            nonlinearity,
            grid,
            operator,
            c_list,
            solver,
            s_list,
            output_dir: raw.output.dir,
            snapshot_format: raw.output.snapshot_format.unwrap_or_default(),
        }),
        _ => Err(CliError::Invalid(errors)),
    }
}

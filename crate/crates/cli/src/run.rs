use nrlimit::limit_lab::{linearized_identity_residual, write_sweep_csv};
use nrlimit::operators::{dense_symbol_scan, symbol_gap_ratio, taylor_residual};
use nrlimit::snapshot::write_snapshot;
use nrlimit::{
    nondegeneracy_gap, solve, sweep, Error, Method, NonlinearityKind, OperatorKind, OperatorSpec, SweepSummary,
};
use serde::{Deserialize, Serialize};

use crate::artifacts::Artifacts;
use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::report;

/// Upper end of the off-lattice symbol scan.
pub const SYMBOL_SCAN_MAX: f64 = 1e3;
pub const SYMBOL_SCAN_SAMPLES: usize = 1_000_000;
/// `|xi| <= TAYLOR_CUTOFF * c` for the Taylor residual.
pub const TAYLOR_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub operator: OperatorKind,
    pub c: Option<f64>,
    pub nonlinearity: NonlinearityKind,
    pub p: u32,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub residual: f64,
    pub action: f64,
    pub iterations: usize,
    pub method: Method,
    pub stabilizing_factor: f64,
    pub snapshot: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegRecord {
    pub nonlinearity: NonlinearityKind,
    pub p: u32,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub d: f64,
    pub kappa: f64,
    pub ritz_residual: f64,
    pub steps: usize,
    pub identity_residual: f64,
    pub reference_residual: f64,
    pub mode_snapshot: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolCheck {
    pub c: f64,
    /// Minimum of `P_c / <xi>` on the lattice.
    pub lattice_ratio: f64,
    /// Same over a dense scan of `|xi|` up to [`SYMBOL_SCAN_MAX`].
    pub dense_ratio: f64,
    /// `None` when no lattice frequency falls inside the Taylor window.
    pub taylor_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolReport {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub scan_max: f64,
    pub scan_samples: usize,
    pub taylor_cutoff: f64,
    pub checks: Vec<SymbolCheck>,
    pub min_ratio: f64,
}

pub const SOLVE_JSON: &str = "solve.json";
pub const HISTORY_CSV: &str = "residual_history.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const NONDEG_JSON: &str = "nondeg.json";
pub const SYMBOLS_JSON: &str = "symbols.json";
pub const REPORT_MD: &str = "report.md";

/// Runs one command. The returned artifacts still have to be committed; the
/// error, if any, is returned alongside whatever should be written anyway
/// (the report of a failed acceptance run).
pub fn run(command: Command, cfg: &RunConfig, out: &std::path::Path) -> Result<Artifacts, (CliError, Artifacts)> {
    let fail = |e: CliError| (e, Artifacts::default());
    match command {
        Command::Solve => run_solve(cfg).map_err(fail),
        Command::Sweep => run_sweep(cfg).map_err(fail),
        Command::Nondeg => run_nondeg(cfg).map_err(fail),
        Command::VerifySymbols => run_symbols(cfg).map_err(fail),
        Command::Report => report::run_report(out),
    }
}

fn snapshot_bytes(field: &nrlimit::SpectralField, cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    write_snapshot(&mut bytes, field, cfg.snapshot_format)?;
    Ok(bytes)
}

fn run_solve(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let res = solve(&cfg.operator, &cfg.nonlinearity, &cfg.grid, &cfg.solver)?.into_converged()?;
    let snapshot = format!("state.{}", cfg.snapshot_format.extension());
    let record = SolveRecord {
        operator: cfg.operator.kind(),
        c: cfg.operator.c(),
        nonlinearity: cfg.nonlinearity.kind(),
        p: cfg.nonlinearity.exponent(),
        n: cfg.grid.dim(),
        length: cfg.grid.length(),
        points: cfg.grid.points(),
        residual: res.residual,
        action: res.action,
        iterations: res.iterations,
        method: res.method,
        stabilizing_factor: res.stabilizing_factor,
        snapshot: snapshot.clone(),
    };
    let mut history = String::from("iteration,residual\n");
    for (i, r) in res.history.iter().enumerate() {
        history.push_str(&format!("{},{r:e}\n", i + 1));
    }
    let mut art = Artifacts::default();
    art.add(snapshot, snapshot_bytes(&res.field, cfg)?);
    art.add_json(SOLVE_JSON, &record)?;
    art.add(HISTORY_CSV, history.into_bytes());
    Ok(art)
}

fn run_sweep(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let nl = &cfg.nonlinearity;
    let s = sweep(&cfg.c_list, &cfg.s_list, nl, &cfg.grid, &cfg.solver)?;
    let identity = linearized_identity_residual(nl, &s.reference.field)?;
    let gap = match nondegeneracy_gap(&s.reference.field, nl) {
        Ok(g) => Some(g),
        Err(e @ Error::NonPositiveGap(_)) => {
            eprintln!("warning: {e}; summary records no gap");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let summary = SweepSummary::build(&s, nl, &cfg.grid, cfg.solver.tolerance, gap.as_ref().map(|g| (g, identity)))?;
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &s.records)?;
    let mut art = Artifacts::default();
    art.add(SWEEP_CSV, csv);
    art.add_json(SUMMARY_JSON, &summary)?;
    Ok(art)
}

fn run_nondeg(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let nl = &cfg.nonlinearity;
    let reference = solve(&OperatorSpec::nonrelativistic(), nl, &cfg.grid, &cfg.solver)?.into_converged()?;
    let identity = linearized_identity_residual(nl, &reference.field)?;
    let gap = nondegeneracy_gap(&reference.field, nl)?;
    let mode_snapshot = format!("mode.{}", cfg.snapshot_format.extension());
    let record = NondegRecord {
        nonlinearity: nl.kind(),
        p: nl.exponent(),
        n: cfg.grid.dim(),
        length: cfg.grid.length(),
        points: cfg.grid.points(),
        d: gap.d,
        kappa: gap.kappa,
        ritz_residual: gap.ritz_residual,
        steps: gap.steps,
        identity_residual: identity,
        reference_residual: reference.residual,
        mode_snapshot: mode_snapshot.clone(),
    };
    let mut art = Artifacts::default();
    art.add(mode_snapshot, snapshot_bytes(&gap.mode, cfg)?);
    art.add_json(NONDEG_JSON, &record)?;
    Ok(art)
}

fn run_symbols(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mut checks = Vec::with_capacity(cfg.c_list.len());
    for &c in &cfg.c_list {
        let op = OperatorSpec::pseudo_relativistic(c)?;
        let taylor = match taylor_residual(&op, &cfg.grid, TAYLOR_CUTOFF) {
            Ok(t) => Some(t),
            Err(Error::EmptyWindow(_)) => None,
            Err(e) => return Err(e.into()),
        };
        checks.push(SymbolCheck {
            c,
            lattice_ratio: symbol_gap_ratio(&op, &cfg.grid),
            dense_ratio: dense_symbol_scan(&op, SYMBOL_SCAN_MAX, SYMBOL_SCAN_SAMPLES),
            taylor_residual: taylor,
        });
    }
    let min_ratio = checks
        .iter()
        .flat_map(|k| [k.lattice_ratio, k.dense_ratio])
        .fold(f64::INFINITY, f64::min);
    let report = SymbolReport {
        n: cfg.grid.dim(),
        length: cfg.grid.length(),
        points: cfg.grid.points(),
        scan_max: SYMBOL_SCAN_MAX,
        scan_samples: SYMBOL_SCAN_SAMPLES,
        taylor_cutoff: TAYLOR_CUTOFF,
        checks,
        min_ratio,
    };
    let mut art = Artifacts::default();
    art.add_json(SYMBOLS_JSON, &report)?;
    Ok(art)
}

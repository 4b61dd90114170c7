//! Markdown summary of the JSON artifacts in an output directory. Every number
//! in the report is read back from those files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nrlimit::{NonlinearityKind, SweepSummary};
use serde::de::DeserializeOwned;

use crate::artifacts::Artifacts;
use crate::error::CliError;
use crate::run::{NondegRecord, SymbolReport, NONDEG_JSON, REPORT_MD, SUMMARY_JSON, SYMBOLS_JSON};

pub const RATE_BAND_1D: (f64, f64) = (-2.15, -1.85);
pub const RATE_BAND: (f64, f64) = (-2.3, -1.7);
pub const MAX_SPREAD: f64 = 3.0;
pub const H_MINUS1_MIN_C: f64 = 16.0;
pub const H_MINUS1_STABILITY: f64 = 1.05;
pub const OPTIMALITY_TOLERANCE: f64 = 0.02;
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
pub const UNIFORM_BOUND: f64 = 1.5;
pub const BOOTSTRAP_VARIATION: f64 = 3.0;
pub const SYMBOL_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: String,
    pub threshold: String,
    pub pass: bool,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>, CliError> {
    match fs::read(path) {
        Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::io(path, e)),
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

pub fn sweep_checks(s: &SweepSummary) -> Vec<Check> {
    let mut out = Vec::new();
    let band = if s.n == 1 && s.nonlinearity == NonlinearityKind::Power {
        RATE_BAND_1D
    } else {
        RATE_BAND
    };
    for fit in &s.fits {
        out.push(Check {
            name: format!("rate, s = {}", fit.s),
            measured: format!("slope {:.4}, B/A {:.3}", fit.slope, fit.spread()),
            threshold: format!("slope in [{}, {}], B/A <= {MAX_SPREAD}", band.0, band.1),
            pass: (band.0..=band.1).contains(&fit.slope) && fit.spread() <= MAX_SPREAD,
        });
    }
    if s.fits.is_empty() {
        out.push(Check {
            name: "rate".into(),
            measured: "no usable fit".into(),
            threshold: "at least one order".into(),
            pass: false,
        });
    }

    let scaled: Vec<f64> = s
        .c_values
        .iter()
        .zip(&s.h_minus1_scaled)
        .filter(|(c, _)| **c >= H_MINUS1_MIN_C)
        .map(|(_, v)| *v)
        .collect();
    if scaled.len() >= 2 {
        let r = spread(&scaled);
        out.push(Check {
            name: "H^-1 residual".into(),
            measured: format!("max/min of c^2 |r|_H^-1 over c >= {H_MINUS1_MIN_C}: {r:.4}"),
            threshold: format!("<= {H_MINUS1_STABILITY}"),
            pass: r <= H_MINUS1_STABILITY,
        });
    }

    let o = &s.optimality;
    let rel = (o.scaled - o.extrapolated).abs() / o.extrapolated.abs();
    out.push(Check {
        name: "optimality constant".into(),
        measured: format!("c^2 A = {:.6} at c = {}, extrapolated {:.6} (rel. {rel:.2e})", o.scaled, o.c, o.extrapolated),
        threshold: format!("rel. <= {OPTIMALITY_TOLERANCE}"),
        pass: rel <= OPTIMALITY_TOLERANCE,
    });

    out.push(match (s.gap, s.identity_residual) {
        (Some(d), Some(id)) => Check {
            name: "nondegeneracy gap".into(),
            measured: format!("d = {d:.8}, identity residual {id:.2e}"),
            threshold: format!("d > 0, identity <= {IDENTITY_TOLERANCE:e}"),
            pass: d > 0.0 && id <= IDENTITY_TOLERANCE,
        },
        _ => Check {
            name: "nondegeneracy gap".into(),
            measured: "not available".into(),
            threshold: "d > 0".into(),
            pass: false,
        },
    });

    let ub = &s.uniform_bounds;
    for (j, order) in ub.orders.iter().enumerate() {
        let ratio = ub.column_max[j] / s.reference_norms[j];
        out.push(Check {
            name: format!("uniform bound, s = {order}"),
            measured: format!("max_c |u_c| / |u_inf| = {ratio:.4}"),
            threshold: format!("<= {UNIFORM_BOUND}"),
            pass: ratio <= UNIFORM_BOUND,
        });
    }

    if let Some((a, b)) = s.bootstrap_orders {
        let r = spread(&s.bootstrap);
        out.push(Check {
            name: format!("bootstrap {a} -> {b}"),
            measured: format!("max/min over c: {r:.3}"),
            threshold: format!("<= {BOOTSTRAP_VARIATION}"),
            pass: r <= BOOTSTRAP_VARIATION,
        });
    }
    out
}

pub fn symbol_check(s: &SymbolReport) -> Check {
    Check {
        name: "symbol lower bound".into(),
        measured: format!("min P_c / <xi> = {:.6}", s.min_ratio),
        threshold: format!(">= {SYMBOL_FLOOR}"),
        pass: s.min_ratio >= SYMBOL_FLOOR,
    }
}

pub fn nondeg_check(r: &NondegRecord) -> Check {
    Check {
        name: "nondegeneracy run".into(),
        measured: format!("d = {:.8}, identity residual {:.2e}", r.d, r.identity_residual),
        threshold: format!("d > 0, identity <= {IDENTITY_TOLERANCE:e}"),
        pass: r.d > 0.0 && r.identity_residual <= IDENTITY_TOLERANCE,
    }
}

fn render(summary: &SweepSummary, symbols: Option<&SymbolReport>, nondeg: Option<&NondegRecord>, checks: &[Check]) -> String {
    let mut md = String::new();
    let passed = checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(md, "# nrlimit report\n");
    let _ = writeln!(
        md,
        "Problem: n = {}, {:?} nonlinearity, p = {}; grid L = {}, N = {}; tolerance {:e}.\n",
        summary.n, summary.nonlinearity, summary.p, summary.length, summary.points, summary.tolerance
    );
    let _ = writeln!(md, "**{passed} of {} checks passed.**\n", checks.len());
    let _ = writeln!(md, "| check | result | measured | threshold |\n|---|---|---|---|");
    for c in checks {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} |",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.measured,
            c.threshold
        );
    }

    let _ = writeln!(md, "\n## Rate fits\n\n| s | slope | intercept | A | B |\n|---|---|---|---|---|");
    for f in &summary.fits {
        let _ = writeln!(
            md,
            "| {} | {:.4} | {:.4} | {:.4e} | {:.4e} |",
            f.s, f.slope, f.intercept, f.a_hat, f.b_hat
        );
    }

    let ub = &summary.uniform_bounds;
    let _ = write!(md, "\n## Sobolev norms of u_c\n\n| c |");
    for s in &ub.orders {
        let _ = write!(md, " s = {s} |");
    }
    let _ = write!(md, "\n|---|{}\n", "---|".repeat(ub.orders.len()));
    for (c, row) in ub.c_values.iter().zip(&ub.norms) {
        let _ = write!(md, "| {c} |");
        for v in row {
            let _ = write!(md, " {v:.6} |");
        }
        md.push('\n');
    }
    let _ = write!(md, "| limit |");
    for v in &summary.reference_norms {
        let _ = write!(md, " {v:.6} |");
    }
    md.push('\n');

    let _ = writeln!(md, "\nSobolev ladder: {:?}", summary.ladder);

    if let Some(s) = symbols {
        let _ = writeln!(md, "\n## Symbol checks\n\n| c | lattice | dense | Taylor residual |\n|---|---|---|---|");
        for k in &s.checks {
            let taylor = k.taylor_residual.map_or("n/a".to_string(), |t| format!("{t:.6}"));
            let _ = writeln!(md, "| {} | {:.6} | {:.6} | {taylor} |", k.c, k.lattice_ratio, k.dense_ratio);
        }
    }
    if let Some(r) = nondeg {
        let _ = writeln!(
            md,
            "\n## Nondegeneracy\n\nd = {:.10} (kappa = {:.10}) after {} Lanczos steps, Ritz residual {:.2e}.",
            r.d, r.kappa, r.steps, r.ritz_residual
        );
    }
    md
}

/// Reads the artifacts in `dir`, writes `report.md`, and fails with the names
/// of the failed checks if there are any.
pub fn run_report(dir: &Path) -> Result<Artifacts, (CliError, Artifacts)> {
    let fail = |e: CliError| (e, Artifacts::default());
    let summary_path = dir.join(SUMMARY_JSON);
    let summary: SweepSummary = read_json(&summary_path).map_err(fail)?.ok_or_else(|| {
        fail(CliError::io(
            &summary_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no sweep summary; run `sweep` first"),
        ))
    })?;
    let symbols: Option<SymbolReport> = read_json(&dir.join(SYMBOLS_JSON)).map_err(fail)?;
    let nondeg: Option<NondegRecord> = read_json(&dir.join(NONDEG_JSON)).map_err(fail)?;

    let mut checks = sweep_checks(&summary);
    checks.extend(symbols.as_ref().map(symbol_check));
    checks.extend(nondeg.as_ref().map(nondeg_check));

    let mut art = Artifacts::default();
    art.add(REPORT_MD, render(&summary, symbols.as_ref(), nondeg.as_ref(), &checks).into_bytes());
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        Ok(art)
    } else {
        Err((CliError::Acceptance(failed), art))
    }
}

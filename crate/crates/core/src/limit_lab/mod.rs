//! Analysis of the limit `u_c -> u_inf` as `c -> inf`: parameter sweeps, rate
//! fits, the `H^{-1}` defect of the operator, the optimality functional, the
//! nondegeneracy gap of the linearization and the Sobolev ladder.

mod gap;
mod ladder;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{inner_product, sobolev_norms, weighted_spectral_sum, Grid, InnerProduct, SpectralField};
use crate::ground_state::{solve, GroundStateResult, SolverConfig};
use crate::nonlinearity::NonlinearitySpec;
use crate::operators::OperatorSpec;

pub use gap::{linearized_identity_residual, linearized_operator, nondegeneracy_gap, GapReport};
pub use ladder::sobolev_ladder;
pub use report::{read_sweep_csv, write_sweep_csv, SweepRow, SweepSummary};

/// Default `c` values for one- and two-dimensional sweeps.
pub const DEFAULT_C_VALUES: [f64; 5] = [4.0, 8.0, 16.0, 32.0, 64.0];
/// Default `c` values for the three-dimensional Hartree sweep.
pub const DEFAULT_C_VALUES_3D: [f64; 4] = [4.0, 8.0, 16.0, 32.0];
pub const DEFAULT_ORDERS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];
/// Points with smaller `c` are preasymptotic and stay out of guarded fits.
pub const MIN_FIT_C: f64 = 4.0;
/// Guarded fits only use differences at least this many solver tolerances large.
pub const FIT_FLOOR_FACTOR: f64 = 100.0;

/// One point of a sweep: how far `u_c` is from `u_inf` and the pieces of the
/// decomposition `w = u_c - u_inf = lambda u_inf + v` with `<v, u_inf>_{H^1} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub c: f64,
    pub orders: Vec<f64>,
    /// `|u_c - u_inf|_{H^s}` for each order.
    pub diff_norms: Vec<f64>,
    /// `|u_c|_{H^s}` for each order.
    pub state_norms: Vec<f64>,
    pub h_minus1_residual: f64,
    pub lambda: f64,
    pub v_norm_h1: f64,
    pub w_norm_h1: f64,
    /// `| |w|^2 - lambda^2 |u_inf|^2 - |v|^2 |` in `H^1`, relative to `|w|^2`.
    pub decomposition_defect: f64,
    pub action_c: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl ConvergenceRecord {
    /// Compares a solved state at parameter `c` (infinite for the
    /// nonrelativistic operator) against the reference `u_inf`.
    pub fn compare(c: f64, state: &GroundStateResult, u_inf: &SpectralField, orders: &[f64]) -> Result<Self> {
        let u_c = &state.field;
        let w = u_c.sub(u_inf)?;
        let diff_norms = sobolev_norms(&w, orders)?;
        let state_norms = sobolev_norms(u_c, orders)?;
        let ref_h1 = inner_product(u_inf, u_inf, InnerProduct::H1)?;
        if ref_h1 == 0.0 {
            return Err(Error::ZeroField);
        }
        let lambda = inner_product(&w, u_inf, InnerProduct::H1)? / ref_h1;
        let v = w.combine(1.0, u_inf, -lambda)?;
        let w2 = inner_product(&w, &w, InnerProduct::H1)?;
        let v2 = inner_product(&v, &v, InnerProduct::H1)?;
        let decomposition_defect = if w2 == 0.0 {
            0.0
        } else {
            (w2 - lambda * lambda * ref_h1 - v2).abs() / w2
        };
        let h_minus1_residual = if c.is_finite() {
            h_minus1_residual(u_c, c)?
        } else {
            0.0
        };
        Ok(Self {
            c,
            orders: orders.to_vec(),
            diff_norms,
            state_norms,
            h_minus1_residual,
            lambda,
            v_norm_h1: v2.sqrt(),
            w_norm_h1: w2.sqrt(),
            decomposition_defect,
            action_c: state.action,
            residual: state.residual,
            iterations: state.iterations,
        })
    }

    pub fn diff_norm(&self, s: f64) -> Option<f64> {
        self.orders.iter().position(|&o| o == s).map(|i| self.diff_norms[i])
    }

    pub fn state_norm(&self, s: f64) -> Option<f64> {
        self.orders.iter().position(|&o| o == s).map(|i| self.state_norms[i])
    }
}

/// Output of [`sweep`].
#[derive(Debug, Clone)]
pub struct Sweep {
    pub reference: GroundStateResult,
    pub orders: Vec<f64>,
    /// `|u_inf|_{H^s}` for each order.
    pub reference_norms: Vec<f64>,
    /// Ascending in `c`.
    pub records: Vec<ConvergenceRecord>,
}

fn check_c_values(c_values: &[f64]) -> Result<()> {
    if c_values.is_empty() {
        return Err(Error::InvalidAnalysis("empty list of c values".into()));
    }
    if let Some(c) = c_values.iter().find(|c| !(**c >= 1.0 && c.is_finite())) {
        return Err(Error::InvalidAnalysis(format!("c values must be finite and >= 1 (got {c})")));
    }
    if c_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidAnalysis("c values must be strictly ascending".into()));
    }
    Ok(())
}

/// Solves the nonrelativistic problem once and the pseudo-relativistic one for
/// each `c` (in parallel), all on `grid`. The first failing `c` aborts the sweep
/// and the error carries the records of the smaller values.
pub fn sweep(
    c_values: &[f64],
    orders: &[f64],
    nl: &NonlinearitySpec,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<Sweep> {
    check_c_values(c_values)?;
    let reference = solve(&OperatorSpec::nonrelativistic(), nl, grid, cfg)?.into_converged()?;
    let reference_norms = sobolev_norms(&reference.field, orders)?;

    let outcomes: Vec<Result<ConvergenceRecord>> = c_values
        .par_iter()
        .map(|&c| {
            let op = OperatorSpec::pseudo_relativistic(c)?;
            let state = solve(&op, nl, grid, cfg)?.into_converged()?;
            ConvergenceRecord::compare(c, &state, &reference.field, orders)
        })
        .collect();

    let mut records = Vec::with_capacity(c_values.len());
    for (&c, outcome) in c_values.iter().zip(outcomes) {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                return Err(Error::SweepAborted {
                    c,
                    completed: records,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(Sweep {
        reference,
        orders: orders.to_vec(),
        reference_norms,
        records,
    })
}

/// Log-log fit of `|u_c - u_inf|_{H^s}` against `c`, with the empirical
/// constants `A_hat = min c^2 |w|` and `B_hat = max c^2 |w|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub s: f64,
    pub slope: f64,
    pub intercept: f64,
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_range: Vec<f64>,
}

impl RateFit {
    pub fn spread(&self) -> f64 {
        self.b_hat / self.a_hat
    }
}

/// Least-squares slope of `log |w|_{H^s}` against `log c` over all records.
pub fn fit_rate(records: &[ConvergenceRecord], s: f64) -> Result<RateFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .map(|r| {
            r.diff_norm(s)
                .map(|n| (r.c, n))
                .ok_or_else(|| Error::InvalidAnalysis(format!("order {s} missing from record at c = {}", r.c)))
        })
        .collect::<Result<_>>()?;
    fit_points(s, &points)
}

/// [`fit_rate`] restricted to `c >= MIN_FIT_C` and to differences at least
/// `FIT_FLOOR_FACTOR * tolerance`.
pub fn fit_rate_guarded(records: &[ConvergenceRecord], s: f64, tolerance: f64) -> Result<RateFit> {
    let kept: Vec<ConvergenceRecord> = records
        .iter()
        .filter(|r| r.c >= MIN_FIT_C && r.diff_norm(s).is_some_and(|n| n >= FIT_FLOOR_FACTOR * tolerance))
        .cloned()
        .collect();
    fit_rate(&kept, s)
}

fn fit_points(s: f64, points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::Degenerate(format!(
            "a rate fit needs at least 4 points (got {})",
            points.len()
        )));
    }
    if let Some((c, n)) = points.iter().find(|(c, n)| !(*n > 0.0 && n.is_finite() && *c > 0.0)) {
        return Err(Error::Degenerate(format!("nonpositive norm {n} at c = {c}")));
    }
    let xs: Vec<f64> = points.iter().map(|(c, _)| c.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, n)| n.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all c values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let scaled = points.iter().map(|(c, n)| c * c * n);
    Ok(RateFit {
        s,
        slope,
        intercept: my - slope * mx,
        a_hat: scaled.clone().fold(f64::INFINITY, f64::min),
        b_hat: scaled.fold(0.0, f64::max),
        c_range: points.iter().map(|(c, _)| *c).collect(),
    })
}

/// `|(-Δ + 1 - P_c(D)) u|_{H^{-1}}`.
pub fn h_minus1_residual(u: &SpectralField, c: f64) -> Result<f64> {
    let op = OperatorSpec::pseudo_relativistic(c)?;
    Ok(weighted_spectral_sum(u, |k2| {
        let d = op.defect(k2);
        d * d / (1.0 + k2)
    })
    .sqrt())
}

/// `A(c) = ∫ |∇u|^2 - u (P_c(D) - 1) u dx`, nonnegative because the symbol
/// lies below `1 + |xi|^2`.
pub fn optimality_functional(u_inf: &SpectralField, c: f64) -> Result<f64> {
    let op = OperatorSpec::pseudo_relativistic(c)?;
    Ok(weighted_spectral_sum(u_inf, |k2| op.defect(k2)))
}

/// `c^2 A(c)` at the two largest `c` values and its Richardson extrapolation,
/// using `c^2 A(c) = A_0 + O(1/c^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityEstimate {
    pub c: f64,
    pub scaled: f64,
    pub extrapolated: f64,
}

pub fn optimality_limit(u_inf: &SpectralField, c_values: &[f64]) -> Result<OptimalityEstimate> {
    check_c_values(c_values)?;
    let scaled = |c: f64| optimality_functional(u_inf, c).map(|a| c * c * a);
    let hi = *c_values.last().expect("nonempty");
    let top = scaled(hi)?;
    let extrapolated = match c_values.len() {
        1 => top,
        len => {
            let lo = c_values[len - 2];
            let r = (hi / lo).powi(2);
            (r * top - scaled(lo)?) / (r - 1.0)
        }
    };
    Ok(OptimalityEstimate {
        c: hi,
        scaled: top,
        extrapolated,
    })
}

/// `|w|_{H^{s_to}} / (|w|_{H^{s_from}} + 1/c^2)` for `w = u_c - u_inf`.
pub fn bootstrap_ratio(u_c: &SpectralField, u_inf: &SpectralField, s_from: f64, s_to: f64, c: f64) -> Result<f64> {
    check_bootstrap_orders(s_from, s_to)?;
    let norms = sobolev_norms(&u_c.sub(u_inf)?, &[s_from, s_to])?;
    Ok(bootstrap_ratio_from_norms(norms[0], norms[1], c))
}

/// [`bootstrap_ratio`] from precomputed norms.
pub fn bootstrap_ratio_from_norms(norm_from: f64, norm_to: f64, c: f64) -> f64 {
    norm_to / (norm_from + 1.0 / (c * c))
}

fn check_bootstrap_orders(s_from: f64, s_to: f64) -> Result<()> {
    if !(s_from >= 0.5 && s_to > s_from) {
        return Err(Error::InvalidAnalysis(format!(
            "bootstrap needs s_to > s_from >= 1/2 (got {s_from} -> {s_to})"
        )));
    }
    Ok(())
}

/// `|u_c|_{H^s}` for every `c` and `s`, with the column maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformBoundTable {
    pub c_values: Vec<f64>,
    pub orders: Vec<f64>,
    /// One row per `c`.
    pub norms: Vec<Vec<f64>>,
    pub column_max: Vec<f64>,
    pub column_min: Vec<f64>,
}

impl UniformBoundTable {
    pub fn from_records(records: &[ConvergenceRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidAnalysis("no records".into()))?;
        let orders = first.orders.clone();
        if records.iter().any(|r| r.orders != orders) {
            return Err(Error::InvalidAnalysis("records use different orders".into()));
        }
        let norms: Vec<Vec<f64>> = records.iter().map(|r| r.state_norms.clone()).collect();
        let column = |fold: fn(f64, f64) -> f64, init: f64| -> Vec<f64> {
            (0..orders.len())
                .map(|j| norms.iter().map(|row| row[j]).fold(init, fold))
                .collect()
        };
        Ok(Self {
            c_values: records.iter().map(|r| r.c).collect(),
            column_max: column(f64::max, 0.0),
            column_min: column(f64::min, f64::INFINITY),
            orders,
            norms,
        })
    }
}

/// Solves for every `c` and tabulates `|u_c|_{H^s}`.
pub fn uniform_bound_table(
    c_values: &[f64],
    orders: &[f64],
    nl: &NonlinearitySpec,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<UniformBoundTable> {
    let sweep = sweep(c_values, orders, nl, grid, cfg)?;
    UniformBoundTable::from_records(&sweep.records)
}

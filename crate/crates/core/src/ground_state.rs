//! Positive, even ground states of `P(D) u = N(u)`.
//!
//! The primary scheme is Petviashvili's iteration
//!
//! ```text
//! u <- M^gamma P(D)^{-1} N(u),     M = <P(D)u, u> / <N(u), u>,
//! ```
//!
//! with `gamma = (p-1)/(p-2)` by default. The fallback is a `P(D)`-preconditioned
//! descent step followed by rescaling onto the Nehari manifold
//! `<P(D)u, u> = <N(u), u>`. Every iterate is recentered (peak to origin) and
//! symmetrized under `x_i -> -x_i`, which removes the translation zero modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    inner_product, recenter_in_place, symmetrize_in_place, Grid, InnerProduct, SpectralField,
};
use crate::nonlinearity::{evaluate, NonlinearitySpec};
use crate::operators::OperatorSpec;

/// Below this L2 norm an iterate counts as collapsed.
const COLLAPSE_NORM: f64 = 1e-8;
/// Petviashvili hands over to descent when the residual drops by less than
/// this fraction over [`STAGNATION_WINDOW`] iterations.
const STAGNATION_DROP: f64 = 0.01;
const STAGNATION_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Petviashvili,
    GradientFlow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `exp(-|x|^2 / width^2)`.
    Gaussian { width: f64 },
    Field(SpectralField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Target for the relative L2 residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step of the descent scheme.
    pub time_step: f64,
    pub initial_guess: InitialGuess,
    /// Petviashvili exponent; `None` selects `(p-1)/(p-2)`.
    pub stabilization: Option<f64>,
    /// Switch from Petviashvili to descent on stagnation.
    pub fallback: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Petviashvili,
            tolerance: 1e-12,
            max_iterations: 5000,
            time_step: 0.8,
            initial_guess: InitialGuess::Gaussian { width: 1.0 },
            stabilization: None,
            fallback: true,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_initial_guess(mut self, guess: InitialGuess) -> Self {
        self.initial_guess = guess;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-4).contains(&self.tolerance) {
            return Err(Error::InvalidSolverConfig(format!(
                "tolerance must lie in [1e-14, 1e-4] (got {:e})",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSolverConfig("max_iterations must be positive".into()));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(Error::InvalidSolverConfig(format!(
                "time_step must be positive (got {})",
                self.time_step
            )));
        }
        if let Some(gamma) = self.stabilization {
            if !(gamma > 1.0 && gamma <= 3.0) {
                return Err(Error::InvalidSolverConfig(format!(
                    "stabilization exponent must lie in (1, 3] (got {gamma})"
                )));
            }
        }
        if let InitialGuess::Gaussian { width } = self.initial_guess {
            if !(width > 0.0 && width.is_finite()) {
                return Err(Error::InvalidSolverConfig(format!(
                    "initial Gaussian width must be positive (got {width})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub field: SpectralField,
    pub residual: f64,
    pub action: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Last Petviashvili factor `M`; 1 at an exact solution.
    pub stabilizing_factor: f64,
    /// Scheme active at termination.
    pub method: Method,
    /// Residual after every iteration.
    pub history: Vec<f64>,
}

impl GroundStateResult {
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                best_residual: self.history.iter().copied().fold(f64::INFINITY, f64::min),
            })
        }
    }
}

fn check_compat(op: &OperatorSpec, nl: &NonlinearitySpec, grid: &Grid) -> Result<()> {
    let _ = op;
    if grid.dim() != nl.dim() {
        if nl.kind() == crate::nonlinearity::NonlinearityKind::Hartree {
            return Err(Error::HartreeDimension(grid.dim()));
        }
        return Err(Error::DimensionMismatch {
            expected: nl.dim(),
            found: grid.dim(),
        });
    }
    Ok(())
}

/// Everything one iteration needs, evaluated at `u`.
struct Evaluation {
    residual: f64,
    /// `<P u, u>`
    quadratic: f64,
    /// `<N(u), u>`
    nonlinear: f64,
    u_norm: f64,
    /// spectrum of `N(u)`
    nonlinear_hat: Vec<num_complex::Complex64>,
    /// spectrum of `u`
    u_hat: Vec<num_complex::Complex64>,
    symbol: Vec<f64>,
}

fn evaluate_state(u: &SpectralField, op: &OperatorSpec, nl: &NonlinearitySpec) -> Result<Evaluation> {
    let grid = *u.grid();
    let n_u = evaluate(nl, u)?;
    let u_hat = u.spectrum().into_owned();
    let nonlinear_hat = n_u.spectrum().into_owned();
    let symbol: Vec<f64> = grid
        .frequency_squared()
        .into_iter()
        .map(|k2| op.symbol(k2))
        .collect();
    let scale = 1.0 / grid.length().powi(grid.dim() as i32);
    let mut res2 = 0.0;
    let mut quadratic = 0.0;
    let mut nonlinear = 0.0;
    let mut norm2 = 0.0;
    for ((a, b), &p) in u_hat.iter().zip(&nonlinear_hat).zip(&symbol) {
        res2 += (a * p - b).norm_sqr();
        quadratic += p * a.norm_sqr();
        nonlinear += (b * a.conj()).re;
        norm2 += a.norm_sqr();
    }
    let u_norm = (norm2 * scale).sqrt();
    if u_norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(Evaluation {
        residual: (res2 * scale).sqrt() / u_norm,
        quadratic: quadratic * scale,
        nonlinear: nonlinear * scale,
        u_norm,
        nonlinear_hat,
        u_hat,
        symbol,
    })
}

/// `|P(D)u - N(u)|_{L2} / |u|_{L2}`.
pub fn residual(u: &SpectralField, op: &OperatorSpec, nl: &NonlinearitySpec) -> Result<f64> {
    Ok(evaluate_state(u, op, nl)?.residual)
}

/// `1/2 <P(D)u, u> - 1/p <N(u), u>`, with the full symbol (mass term included).
pub fn action(u: &SpectralField, op: &OperatorSpec, nl: &NonlinearitySpec) -> Result<f64> {
    let quadratic = u.apply_symbol(|k2| op.symbol(k2));
    let n_u = evaluate(nl, u)?;
    let p = nl.exponent() as f64;
    Ok(0.5 * inner_product(&quadratic, u, InnerProduct::L2)?
        - inner_product(&n_u, u, InnerProduct::L2)? / p)
}

fn normalize_iterate(grid: &Grid, mut values: Vec<f64>) -> Result<SpectralField> {
    recenter_in_place(grid, &mut values);
    symmetrize_in_place(grid, &mut values);
    SpectralField::from_real(*grid, values)
}

pub fn solve(
    op: &OperatorSpec,
    nl: &NonlinearitySpec,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<GroundStateResult> {
    cfg.validate()?;
    check_compat(op, nl, grid)?;
    let p = nl.exponent() as f64;
    let gamma = cfg.stabilization.unwrap_or((p - 1.0) / (p - 2.0));
    let start = match &cfg.initial_guess {
        InitialGuess::Gaussian { width } => SpectralField::gaussian(*grid, *width),
        InitialGuess::Field(f) => {
            if f.grid() != grid {
                return Err(Error::GridMismatch);
            }
            f.to_real()
        }
    };
    let mut u = normalize_iterate(grid, start.into_values())?;
    let mut method = cfg.method;
    let mut history = Vec::new();

    for iteration in 0..=cfg.max_iterations {
        let state = evaluate_state(&u, op, nl)?;
        if state.u_norm < COLLAPSE_NORM || !state.residual.is_finite() {
            return Err(Error::Collapse(state.u_norm));
        }
        let factor = state.quadratic / state.nonlinear;
        history.push(state.residual);
        if state.residual <= cfg.tolerance || iteration == cfg.max_iterations {
            let converged = state.residual <= cfg.tolerance;
            let action = action(&u, op, nl)?;
            return Ok(GroundStateResult {
                field: u,
                residual: state.residual,
                action,
                iterations: iteration,
                converged,
                stabilizing_factor: factor,
                method,
                history,
            });
        }
        if method == Method::Petviashvili
            && cfg.fallback
            && iteration >= STAGNATION_WINDOW
            && state.residual > (1.0 - STAGNATION_DROP) * history[iteration - STAGNATION_WINDOW]
        {
            method = Method::GradientFlow;
        }
        if !(factor > 0.0) {
            return Err(Error::Collapse(state.u_norm));
        }
        let next_hat: Vec<num_complex::Complex64> = match method {
            Method::Petviashvili => {
                let scale = factor.powf(gamma);
                state
                    .nonlinear_hat
                    .iter()
                    .zip(&state.symbol)
                    .map(|(b, &s)| b * (scale / s))
                    .collect()
            }
            Method::GradientFlow => {
                // u - tau P^{-1}(P u - N(u)), then rescale onto the Nehari manifold.
                let tau = cfg.time_step;
                state
                    .u_hat
                    .iter()
                    .zip(&state.nonlinear_hat)
                    .zip(&state.symbol)
                    .map(|((a, b), &s)| a * (1.0 - tau) + b * (tau / s))
                    .collect()
            }
        };
        let next = SpectralField::from_spectrum(*grid, next_hat)?;
        u = normalize_iterate(grid, next.into_values())?;
        if method == Method::GradientFlow {
            u = nehari_rescale(&u, op, nl)?;
        }
    }
    unreachable!("loop returns at max_iterations")
}

/// Scales `u` so that `<P(D)u, u> = <N(u), u>`.
fn nehari_rescale(u: &SpectralField, op: &OperatorSpec, nl: &NonlinearitySpec) -> Result<SpectralField> {
    let state = evaluate_state(u, op, nl)?;
    let ratio = state.quadratic / state.nonlinear;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::Collapse(state.u_norm));
    }
    let p = nl.exponent() as f64;
    Ok(u.scaled(ratio.powf(1.0 / (p - 2.0))))
}

/// Largest pairwise H1 distance between the canonical solution and solutions
/// started from three perturbed initial guesses.
pub fn initialization_spread(
    op: &OperatorSpec,
    nl: &NonlinearitySpec,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<f64> {
    let perturbed = [
        SpectralField::gaussian(*grid, 0.8),
        SpectralField::gaussian(*grid, 1.3).scaled(0.5),
        SpectralField::radial(*grid, |r| 2.0 * (-r * r).exp() * (1.0 + 0.2 * (-(r * r) / 4.0).exp())),
    ];
    let mut states = vec![solve(op, nl, grid, cfg)?.into_converged()?.field];
    for guess in perturbed {
        let c = cfg.clone().with_initial_guess(InitialGuess::Field(guess));
        states.push(solve(op, nl, grid, &c)?.into_converged()?.field);
    }
    let mut spread = 0.0_f64;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let d = states[i].sub(&states[j])?;
            spread = spread.max(inner_product(&d, &d, InnerProduct::H1)?.sqrt());
        }
    }
    Ok(spread)
}

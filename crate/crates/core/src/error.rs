use thiserror::Error;

use crate::grid::Representation;
use crate::limit_lab::ConvergenceRecord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected a {expected} field, got a {found} field")]
    Representation {
        expected: Representation,
        found: Representation,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("sample count {found} does not match grid size {expected}")]
    SampleCount { expected: usize, found: usize },

    #[error("Sobolev order {0} outside the supported range [-4, 8]")]
    UnsupportedOrder(f64),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("field has dimension {found}, nonlinearity was set up for n = {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("the Hartree nonlinearity is only defined for n = 3 (got n = {0})")]
    HartreeDimension(usize),

    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),

    #[error("no lattice frequency in the window 0 < |xi| <= {0}")]
    EmptyWindow(f64),

    #[error("no convergence after {iterations} iterations (best residual {best_residual:.3e})")]
    NotConverged { iterations: usize, best_residual: f64 },

    #[error("iterate collapsed to the zero field (|u| = {0:.3e}); check the initial guess")]
    Collapse(f64),

    #[error("zero field where a nonzero one is required")]
    ZeroField,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("nondegeneracy gap is not positive (d = {0:.6e})")]
    NonPositiveGap(f64),

    #[error("invalid analysis input: {0}")]
    InvalidAnalysis(String),

    #[error("sweep aborted at c = {c} after {} completed points: {source}", .completed.len())]
    SweepAborted {
        c: f64,
        /// Records for the values of `c` below the failing one.
        completed: Vec<ConvergenceRecord>,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

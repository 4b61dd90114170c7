//! Spectral ground states of the pseudo-relativistic equation
//! `P_c(D) u = N(u)` and of its nonrelativistic limit `-Δu + u = N(u)`, with the
//! diagnostics needed to measure the `1/c^2` convergence `u_c -> u_inf`.

pub mod error;
pub mod grid;
pub mod ground_state;
pub mod limit_lab;
pub mod nonlinearity;
pub mod operators;
pub mod snapshot;

pub use error::{Error, Result};
pub use grid::{
    inner_product, sobolev_norm, sobolev_norms, symmetrize, Direction, Grid, InnerProduct,
    Representation, SpectralField,
};
pub use ground_state::{action, residual, solve, GroundStateResult, InitialGuess, Method, SolverConfig};
pub use nonlinearity::{NonlinearityKind, NonlinearitySpec};
pub use operators::{apply_multiplier, MultiplierMode, OperatorKind, OperatorSpec};
pub use limit_lab::{
    fit_rate, nondegeneracy_gap, sweep, ConvergenceRecord, GapReport, RateFit, Sweep, SweepSummary,
};
pub use snapshot::{load_snapshot, save_snapshot, SnapshotFormat};

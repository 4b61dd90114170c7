//! Python bindings. Fields cross the boundary as flat lists of real-space
//! samples in storage order.

use nrlimit::limit_lab::{linearized_identity_residual, optimality_functional};
use nrlimit::{
    Error, GroundStateResult, InitialGuess, Method, NonlinearitySpec, OperatorSpec, SolverConfig, SpectralField,
    SweepSummary,
};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NotConverged { .. } | Error::Collapse(_) | Error::NonPositiveGap(_) | Error::SweepAborted { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Grid", frozen)]
#[derive(Clone, Copy)]
struct PyGrid(nrlimit::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dim: usize, length: f64, points: usize) -> PyResult<Self> {
        nrlimit::Grid::new(dim, length, points).map(Self).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.length()
    }

    #[getter]
    fn points(&self) -> usize {
        self.0.points()
    }

    /// Coordinates of the samples along one axis.
    fn axis(&self) -> Vec<f64> {
        (0..self.0.points()).map(|i| self.0.coordinate(i)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid(dim={}, length={}, points={})", self.0.dim(), self.0.length(), self.0.points())
    }
}

#[pyclass(name = "Field", frozen)]
#[derive(Clone)]
struct PyField(SpectralField);

#[pymethods]
impl PyField {
    #[staticmethod]
    fn from_values(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        SpectralField::from_real(grid.0, values).map(Self).map_err(py_err)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    fn values(&self) -> Vec<f64> {
        self.0.real_values().into_owned()
    }

    fn sobolev_norm(&self, s: f64) -> PyResult<f64> {
        nrlimit::sobolev_norm(&self.0, s).map_err(py_err)
    }

    fn sup_norm(&self) -> f64 {
        self.0.sup_norm()
    }

    fn __sub__(&self, other: &PyField) -> PyResult<Self> {
        self.0.sub(&other.0).map(Self).map_err(py_err)
    }
}

#[pyclass(name = "Operator", frozen)]
#[derive(Clone, Copy)]
struct PyOperator(OperatorSpec);

#[pymethods]
impl PyOperator {
    #[staticmethod]
    fn pseudo_relativistic(c: f64) -> PyResult<Self> {
        OperatorSpec::pseudo_relativistic(c).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn nonrelativistic() -> Self {
        Self(OperatorSpec::nonrelativistic())
    }

    /// `None` for the nonrelativistic operator.
    #[getter]
    fn c(&self) -> Option<f64> {
        self.0.c()
    }

    /// Symbol at `|xi|^2 = xi2`.
    fn symbol(&self, xi2: f64) -> f64 {
        self.0.symbol(xi2)
    }

    fn __repr__(&self) -> String {
        match self.0.c() {
            Some(c) => format!("Operator.pseudo_relativistic({c})"),
            None => "Operator.nonrelativistic()".into(),
        }
    }
}

#[pyclass(name = "Nonlinearity", frozen)]
#[derive(Clone, Copy)]
struct PyNonlinearity(NonlinearitySpec);

#[pymethods]
impl PyNonlinearity {
    /// `u^(p-1)` in dimension `dim`.
    #[staticmethod]
    fn power(p: u32, dim: usize) -> PyResult<Self> {
        NonlinearitySpec::power(p, dim).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn hartree() -> PyResult<Self> {
        NonlinearitySpec::hartree(3).map(Self).map_err(py_err)
    }

    #[getter]
    fn p(&self) -> u32 {
        self.0.exponent()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn evaluate(&self, u: &PyField) -> PyResult<PyField> {
        nrlimit::nonlinearity::evaluate(&self.0, &u.0).map(PyField).map_err(py_err)
    }
}

#[pyclass(name = "GroundState", frozen)]
struct PyGroundState(GroundStateResult);

#[pymethods]
impl PyGroundState {
    #[getter]
    fn field(&self) -> PyField {
        PyField(self.0.field.clone())
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn action(&self) -> f64 {
        self.0.action
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    #[getter]
    fn method(&self) -> &'static str {
        match self.0.method {
            Method::Petviashvili => "petviashvili",
            Method::GradientFlow => "gradient_flow",
        }
    }

    #[getter]
    fn history(&self) -> Vec<f64> {
        self.0.history.clone()
    }
}

fn solver_config(tolerance: f64, max_iterations: usize, initial_width: f64) -> SolverConfig {
    SolverConfig {
        tolerance,
        max_iterations,
        initial_guess: InitialGuess::Gaussian { width: initial_width },
        ..SolverConfig::default()
    }
}

/// Ground state of `P(D) u = N(u)`. Does not raise on non-convergence; check
/// `converged`.
#[pyfunction]
#[pyo3(signature = (operator, nonlinearity, grid, tolerance = 1e-12, max_iterations = 5000, initial_width = 1.0))]
fn solve(
    py: Python<'_>,
    operator: &PyOperator,
    nonlinearity: &PyNonlinearity,
    grid: &PyGrid,
    tolerance: f64,
    max_iterations: usize,
    initial_width: f64,
) -> PyResult<PyGroundState> {
    let cfg = solver_config(tolerance, max_iterations, initial_width);
    let (op, nl, g) = (operator.0, nonlinearity.0, grid.0);
    py.allow_threads(|| nrlimit::solve(&op, &nl, &g, &cfg))
        .map(PyGroundState)
        .map_err(py_err)
}

/// Runs a c-sweep and returns its summary as a JSON string (fits, H^-1
/// residuals, optimality estimate, gap, uniform bounds).
#[pyfunction]
#[pyo3(signature = (c_values, orders, nonlinearity, grid, tolerance = 1e-12, with_gap = true))]
fn sweep_summary(
    py: Python<'_>,
    c_values: Vec<f64>,
    orders: Vec<f64>,
    nonlinearity: &PyNonlinearity,
    grid: &PyGrid,
    tolerance: f64,
    with_gap: bool,
) -> PyResult<String> {
    let nl = nonlinearity.0;
    let g = grid.0;
    let cfg = SolverConfig::default().with_tolerance(tolerance);
    let summary = py
        .allow_threads(|| -> nrlimit::Result<SweepSummary> {
            let s = nrlimit::sweep(&c_values, &orders, &nl, &g, &cfg)?;
            if with_gap {
                let identity = linearized_identity_residual(&nl, &s.reference.field)?;
                let gap = nrlimit::nondegeneracy_gap(&s.reference.field, &nl)?;
                SweepSummary::build(&s, &nl, &g, tolerance, Some((&gap, identity)))
            } else {
                SweepSummary::build(&s, &nl, &g, tolerance, None)
            }
        })
        .map_err(py_err)?;
    serde_json::to_string(&summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Gap `d` of the linearized operator at a nonrelativistic ground state.
#[pyfunction]
fn nondegeneracy_gap(py: Python<'_>, u_inf: &PyField, nonlinearity: &PyNonlinearity) -> PyResult<f64> {
    let nl = nonlinearity.0;
    let u = u_inf.0.clone();
    py.allow_threads(|| nrlimit::nondegeneracy_gap(&u, &nl))
        .map(|r| r.d)
        .map_err(py_err)
}

#[pyfunction(name = "optimality_functional")]
fn py_optimality_functional(u_inf: &PyField, c: f64) -> PyResult<f64> {
    optimality_functional(&u_inf.0, c).map_err(py_err)
}

#[pymodule]
fn pynrlimit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyNonlinearity>()?;
    m.add_class::<PyGroundState>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_summary, m)?)?;
    m.add_function(wrap_pyfunction!(nondegeneracy_gap, m)?)?;
    m.add_function(wrap_pyfunction!(py_optimality_functional, m)?)?;
    Ok(())
}

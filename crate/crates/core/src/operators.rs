//! Linear Fourier multipliers: the pseudo-relativistic symbol
//! `P_c(xi) = sqrt(c^2 |xi|^2 + c^4/4) - c^2/2 + 1` and its nonrelativistic
//! limit `1 + |xi|^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    PseudoRelativistic,
    Nonrelativistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    kind: OperatorKind,
    c: f64,
}

impl OperatorSpec {
    pub fn pseudo_relativistic(c: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite()) {
            return Err(Error::InvalidOperator(format!(
                "speed of light must satisfy 1 <= c < inf (got {c})"
            )));
        }
        Ok(Self {
            kind: OperatorKind::PseudoRelativistic,
            c,
        })
    }

    pub fn nonrelativistic() -> Self {
        Self {
            kind: OperatorKind::Nonrelativistic,
            c: f64::INFINITY,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Speed of light; `None` for the nonrelativistic operator.
    pub fn c(&self) -> Option<f64> {
        match self.kind {
            OperatorKind::PseudoRelativistic => Some(self.c),
            OperatorKind::Nonrelativistic => None,
        }
    }

    /// Symbol at `|xi|^2 = xi2`.
    pub fn symbol(&self, xi2: f64) -> f64 {
        match self.kind {
            OperatorKind::Nonrelativistic => 1.0 + xi2,
            OperatorKind::PseudoRelativistic => {
                // rationalized: sqrt(a + b^2) - b = a / (sqrt(a + b^2) + b)
                let c2 = self.c * self.c;
                let root = (c2 * xi2 + 0.25 * c2 * c2).sqrt();
                c2 * xi2 / (root + 0.5 * c2) + 1.0
            }
        }
    }

    /// `1 + |xi|^2 - symbol(xi2)`, evaluated without cancellation. Zero for the
    /// nonrelativistic operator, nonnegative otherwise.
    pub fn defect(&self, xi2: f64) -> f64 {
        match self.kind {
            OperatorKind::Nonrelativistic => 0.0,
            OperatorKind::PseudoRelativistic => {
                // xi^2 - c^2 xi^2 / (S + c^2/2) = c^2 xi^4 / (S + c^2/2)^2
                let c2 = self.c * self.c;
                let denom = (c2 * xi2 + 0.25 * c2 * c2).sqrt() + 0.5 * c2;
                c2 * xi2 * xi2 / (denom * denom)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierMode {
    Forward,
    InverseOfSymbol,
}

/// `P(D) f` or `P(D)^{-1} f`. The symbol is at least 1, so the inverse always exists.
pub fn apply_multiplier(f: &SpectralField, spec: &OperatorSpec, mode: MultiplierMode) -> SpectralField {
    match mode {
        MultiplierMode::Forward => f.apply_symbol(|k2| spec.symbol(k2)),
        MultiplierMode::InverseOfSymbol => f.apply_symbol(|k2| 1.0 / spec.symbol(k2)),
    }
}

/// `min_xi P(xi) / <xi>` over the lattice of `grid`.
pub fn symbol_gap_ratio(spec: &OperatorSpec, grid: &Grid) -> f64 {
    lattice_shells(grid)
        .into_iter()
        .map(|k2| spec.symbol(k2) / (1.0 + k2).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// `min P(xi) / <xi>` over `samples` equally spaced `|xi|` in `[0, xi_max]`.
pub fn dense_symbol_scan(spec: &OperatorSpec, xi_max: f64, samples: usize) -> f64 {
    (0..=samples)
        .map(|i| {
            let xi = xi_max * i as f64 / samples as f64;
            spec.symbol(xi * xi) / (1.0 + xi * xi).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `max c^2 |1 + |xi|^2 - P_c(xi)| / |xi|^4` over nonzero lattice frequencies
/// with `|xi| <= cutoff_fraction * c`.
pub fn taylor_residual(spec: &OperatorSpec, grid: &Grid, cutoff_fraction: f64) -> Result<f64> {
    let c = spec.c().ok_or_else(|| {
        Error::InvalidOperator("taylor_residual needs a pseudo-relativistic operator".into())
    })?;
    if !(cutoff_fraction > 0.0 && cutoff_fraction <= 0.5) {
        return Err(Error::InvalidOperator(format!(
            "cutoff fraction must lie in (0, 1/2] (got {cutoff_fraction})"
        )));
    }
    let cutoff = cutoff_fraction * c;
    let window: Vec<f64> = lattice_shells(grid)
        .into_iter()
        .filter(|&k2| k2 > 0.0 && k2.sqrt() <= cutoff)
        .collect();
    if window.is_empty() {
        return Err(Error::EmptyWindow(cutoff));
    }
    Ok(window
        .into_iter()
        .map(|k2| c * c * spec.defect(k2) / (k2 * k2))
        .fold(0.0, f64::max))
}

/// Distinct values of `|xi|^2` on the lattice.
fn lattice_shells(grid: &Grid) -> Vec<f64> {
    let mut shells = grid.frequency_squared();
    shells.sort_by(f64::total_cmp);
    shells.dedup();
    shells
}

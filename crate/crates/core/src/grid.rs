//! Periodic-box discretization of `R^n`.
//!
//! A [`Grid`] holds `N` points per axis on `[-L/2, L/2)^n` with the origin on
//! a grid point, so the reflections `x_i -> -x_i` map the lattice onto itself.
//! A [`SpectralField`] stores samples either in real space or as
//! continuum-normalized Fourier coefficients
//!
//! ```text
//! u_hat(xi) ~ \int u(x) e^{-i xi.x} dx,   xi in (2 pi / L) Z^n,
//! ```
//!
//! i.e. the discrete transform scaled by `dx^n` with the phase of the shifted
//! origin removed. With that normalization the `H^s` norm reads
//! `(2 pi)^{-n} sum (1 + |xi|^2)^s |u_hat|^2 (2 pi / L)^n`, exactly the
//! continuum Plancherel formula with the integral replaced by a lattice sum.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest supported number of points per axis.
pub const MIN_POINTS: usize = 16;

/// Supported range of Sobolev orders; larger weights amplify lattice-tail round-off.
pub const SOBOLEV_ORDER_RANGE: (f64, f64) = (-4.0, 8.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    length: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, length: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive (got {length})"
            )));
        }
        if points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even (got {points})"
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be at least {MIN_POINTS} (got {points})"
            )));
        }
        Ok(Self {
            dim,
            length,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of stored samples, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// `dx^n`, the quadrature weight of one sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `(2 pi / L)^n`, the spectral measure of one mode.
    pub fn mode_volume(&self) -> f64 {
        (2.0 * PI / self.length).powi(self.dim as i32)
    }

    /// Lattice spacing in frequency, `2 pi / L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest per-axis frequency magnitude, `pi N / L` (the Nyquist row).
    pub fn max_frequency(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    /// Coordinate of per-axis index `i`.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.points / 2) as f64) * self.spacing()
    }

    /// Signed wavenumber index of per-axis storage index `i` (FFT ordering).
    pub fn wavenumber_index(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.frequency_step() * self.wavenumber_index(i) as f64
    }

    /// Index of the origin `x = 0` along each axis.
    pub fn origin_index(&self) -> usize {
        self.points / 2
    }

    /// Per-axis indices of flat index `flat`.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0, |acc, &i| acc * self.points + i)
    }

    /// `|xi|^2` for every mode in storage order.
    pub fn frequency_squared(&self) -> Vec<f64> {
        let per_axis: Vec<f64> = (0..self.points)
            .map(|i| self.frequency(i).powi(2))
            .collect();
        let mut out = vec![0.0; self.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = self.unravel(flat);
            *slot = idx[..self.dim].iter().map(|&i| per_axis[i]).sum();
        }
        out
    }

    /// Real-space coordinates of every sample in storage order.
    pub fn coordinates(&self) -> Vec<[f64; 3]> {
        (0..self.len())
            .map(|flat| {
                let idx = self.unravel(flat);
                let mut x = [0.0; 3];
                for axis in 0..self.dim {
                    x[axis] = self.coordinate(idx[axis]);
                }
                x
            })
            .collect()
    }

    /// Same grid with the box doubled at fixed spacing.
    pub fn doubled_box(&self) -> Result<Self> {
        Self::new(self.dim, 2.0 * self.length, 2 * self.points)
    }

    /// Same box with twice as many points per axis.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, self.length, 2 * self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    RealSpace,
    FrequencySpace,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::RealSpace => f.write_str("real-space"),
            Representation::FrequencySpace => f.write_str("frequency-space"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
enum Samples {
    Real(Vec<f64>),
    Frequency(Vec<Complex64>),
}

/// Samples of a real function on a [`Grid`], in one of two representations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    samples: Samples,
}

impl SpectralField {
    pub fn from_real(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            samples: Samples::Real(values),
        })
    }

    pub fn from_spectrum(grid: Grid, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                found: coefficients.len(),
            });
        }
        Ok(Self {
            grid,
            samples: Samples::Frequency(coefficients),
        })
    }

    /// Samples `f` at every grid point; `f` receives the first `n` coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid
            .coordinates()
            .iter()
            .map(|x| f(&x[..grid.dim()]))
            .collect();
        Self {
            grid,
            samples: Samples::Real(values),
        }
    }

    /// Radial profile `f(|x|)`.
    pub fn radial(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| f(x.iter().map(|v| v * v).sum::<f64>().sqrt()))
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            samples: Samples::Real(vec![0.0; grid.len()]),
        }
    }

    /// Centered Gaussian `exp(-|x|^2 / width^2)`.
    pub fn gaussian(grid: Grid, width: f64) -> Self {
        Self::radial(grid, |r| (-(r / width).powi(2)).exp())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match self.samples {
            Samples::Real(_) => Representation::RealSpace,
            Samples::Frequency(_) => Representation::FrequencySpace,
        }
    }

    pub fn values(&self) -> Result<&[f64]> {
        match &self.samples {
            Samples::Real(v) => Ok(v),
            Samples::Frequency(_) => Err(Error::Representation {
                expected: Representation::RealSpace,
                found: Representation::FrequencySpace,
            }),
        }
    }

    pub fn coefficients(&self) -> Result<&[Complex64]> {
        match &self.samples {
            Samples::Frequency(c) => Ok(c),
            Samples::Real(_) => Err(Error::Representation {
                expected: Representation::FrequencySpace,
                found: Representation::RealSpace,
            }),
        }
    }

    pub fn transform(&self, direction: Direction) -> Result<Self> {
        match (direction, &self.samples) {
            (Direction::Forward, Samples::Real(v)) => Ok(Self {
                grid: self.grid,
                samples: Samples::Frequency(forward(&self.grid, v)),
            }),
            (Direction::Inverse, Samples::Frequency(c)) => Ok(Self {
                grid: self.grid,
                samples: Samples::Real(inverse(&self.grid, c.clone())),
            }),
            (Direction::Forward, Samples::Frequency(_)) => Err(Error::Representation {
                expected: Representation::RealSpace,
                found: Representation::FrequencySpace,
            }),
            (Direction::Inverse, Samples::Real(_)) => Err(Error::Representation {
                expected: Representation::FrequencySpace,
                found: Representation::RealSpace,
            }),
        }
    }

    /// Real-space samples, transforming if needed.
    pub fn real_values(&self) -> std::borrow::Cow<'_, [f64]> {
        match &self.samples {
            Samples::Real(v) => std::borrow::Cow::Borrowed(v),
            Samples::Frequency(c) => std::borrow::Cow::Owned(inverse(&self.grid, c.clone())),
        }
    }

    /// Spectral coefficients, transforming if needed.
    pub fn spectrum(&self) -> std::borrow::Cow<'_, [Complex64]> {
        match &self.samples {
            Samples::Frequency(c) => std::borrow::Cow::Borrowed(c),
            Samples::Real(v) => std::borrow::Cow::Owned(forward(&self.grid, v)),
        }
    }

    pub fn to_real(&self) -> Self {
        Self {
            grid: self.grid,
            samples: Samples::Real(self.real_values().into_owned()),
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        match self.samples {
            Samples::Real(v) => v,
            Samples::Frequency(c) => inverse(&self.grid, c),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let samples = match &self.samples {
            Samples::Real(v) => Samples::Real(v.iter().map(|x| alpha * x).collect()),
            Samples::Frequency(c) => Samples::Frequency(c.iter().map(|x| x * alpha).collect()),
        };
        Self {
            grid: self.grid,
            samples,
        }
    }

    /// `alpha * self + beta * other`, in real space.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.zip_real(other, |a, b| alpha * a + beta * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_real(other, |a, b| a * b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.real_values().iter().map(|&x| f(x)).collect();
        Self {
            grid: self.grid,
            samples: Samples::Real(values),
        }
    }

    pub fn zip_real(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_same_grid(self, other)?;
        let a = self.real_values();
        let b = other.real_values();
        let values = a.iter().zip(b.iter()).map(|(&x, &y)| f(x, y)).collect();
        Ok(Self {
            grid: self.grid,
            samples: Samples::Real(values),
        })
    }

    /// Multiplies every spectral coefficient by `symbol(|xi|^2)`; keeps the
    /// input representation.
    pub fn apply_symbol(&self, symbol: impl Fn(f64) -> f64) -> Self {
        let xi2 = self.grid.frequency_squared();
        let mut coeffs = self.spectrum().into_owned();
        for (c, &k2) in coeffs.iter_mut().zip(&xi2) {
            *c *= symbol(k2);
        }
        let samples = match self.samples {
            Samples::Real(_) => Samples::Real(inverse(&self.grid, coeffs)),
            Samples::Frequency(_) => Samples::Frequency(coeffs),
        };
        Self {
            grid: self.grid,
            samples,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.real_values()
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// `(\int |u|^q)^{1/q}` by the rectangle rule.
    pub fn lebesgue_norm(&self, q: f64) -> f64 {
        let sum: f64 = self.real_values().iter().map(|x| x.abs().powf(q)).sum();
        (sum * self.grid.cell_volume()).powf(1.0 / q)
    }

    /// `\int u` by the rectangle rule (spectrally exact for band-limited fields).
    pub fn integral(&self) -> f64 {
        self.real_values().iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Value at the origin.
    pub fn value_at_origin(&self) -> f64 {
        let o = self.grid.origin_index();
        let flat = self.grid.ravel(&[o, o, o]);
        self.real_values()[flat]
    }
}

pub(crate) fn check_same_grid(a: &SpectralField, b: &SpectralField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerProduct {
    L2,
    H1,
}

/// `{(2 pi)^{-n} sum (1+|xi|^2)^s |u_hat|^2 (2 pi/L)^n}^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(weighted_spectral_sum(f, |k2| (1.0 + k2).powf(s)).sqrt())
}

/// Sobolev norm for several orders from a single transform.
pub fn sobolev_norms(f: &SpectralField, orders: &[f64]) -> Result<Vec<f64>> {
    for &s in orders {
        check_order(s)?;
    }
    let coeffs = f.spectrum();
    let xi2 = f.grid().frequency_squared();
    let scale = 1.0 / f.grid().length().powi(f.grid().dim() as i32);
    Ok(orders
        .iter()
        .map(|&s| {
            let sum: f64 = coeffs
                .iter()
                .zip(&xi2)
                .map(|(c, &k2)| (1.0 + k2).powf(s) * c.norm_sqr())
                .sum();
            (sum * scale).sqrt()
        })
        .collect())
}

fn check_order(s: f64) -> Result<()> {
    let (lo, hi) = SOBOLEV_ORDER_RANGE;
    if !(lo..=hi).contains(&s) {
        return Err(Error::UnsupportedOrder(s));
    }
    Ok(())
}

/// `(2 pi)^{-n} (2 pi / L)^n sum weight(|xi|^2) |u_hat|^2`, which is
/// `L^{-n} sum weight |u_hat|^2`.
pub fn weighted_spectral_sum(f: &SpectralField, weight: impl Fn(f64) -> f64) -> f64 {
    let coeffs = f.spectrum();
    let xi2 = f.grid().frequency_squared();
    let sum: f64 = coeffs
        .iter()
        .zip(&xi2)
        .map(|(c, &k2)| weight(k2) * c.norm_sqr())
        .sum();
    sum / f.grid().length().powi(f.grid().dim() as i32)
}

pub fn inner_product(f: &SpectralField, g: &SpectralField, weight: InnerProduct) -> Result<f64> {
    check_same_grid(f, g)?;
    match weight {
        InnerProduct::L2 => {
            let a = f.real_values();
            let b = g.real_values();
            let sum: f64 = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
            Ok(sum * f.grid().cell_volume())
        }
        InnerProduct::H1 => {
            let a = f.spectrum();
            let b = g.spectrum();
            let xi2 = f.grid().frequency_squared();
            let sum: f64 = a
                .iter()
                .zip(b.iter())
                .zip(&xi2)
                .map(|((x, y), &k2)| (1.0 + k2) * (x * y.conj()).re)
                .sum();
            Ok(sum / f.grid().length().powi(f.grid().dim() as i32))
        }
    }
}

/// Average of `f` over the reflections `x_i -> -x_i`. Real-space in, real-space out.
pub fn symmetrize(f: &SpectralField) -> Result<SpectralField> {
    let mut values = f.values()?.to_vec();
    symmetrize_in_place(f.grid(), &mut values);
    SpectralField::from_real(*f.grid(), values)
}

pub(crate) fn symmetrize_in_place(grid: &Grid, values: &mut [f64]) {
    let n = grid.points();
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        let outer = grid.len() / (n * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                // i and n - i are partners; 0 and n/2 are fixed points.
                for i in 1..n / 2 {
                    let a = base + i * stride;
                    let b = base + (n - i) * stride;
                    let mean = 0.5 * (values[a] + values[b]);
                    values[a] = mean;
                    values[b] = mean;
                }
            }
        }
    }
}

/// Circularly shifts `values` so that the largest-magnitude sample sits at the origin.
pub(crate) fn recenter_in_place(grid: &Grid, values: &mut Vec<f64>) {
    let (peak, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v.abs() > bv {
                (i, v.abs())
            } else {
                (bi, bv)
            }
        });
    let idx = grid.unravel(peak);
    let n = grid.points();
    let origin = grid.origin_index();
    let shifts: Vec<usize> = idx[..grid.dim()]
        .iter()
        .map(|&i| (origin + n - i) % n)
        .collect();
    if shifts.iter().all(|&s| s == 0) {
        return;
    }
    let mut out = vec![0.0; values.len()];
    for (flat, &v) in values.iter().enumerate() {
        let mut idx = grid.unravel(flat);
        for axis in 0..grid.dim() {
            idx[axis] = (idx[axis] + shifts[axis]) % n;
        }
        out[grid.ravel(&idx)] = v;
    }
    *values = out;
}

thread_local! {
    static PLANNER: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|cell| {
        let mut cell = cell.borrow_mut();
        let key = (len, direction == FftDirection::Forward);
        if let Some(p) = cell.1.get(&key) {
            return Arc::clone(p);
        }
        let p = cell.0.plan_fft(len, direction);
        cell.1.insert(key, Arc::clone(&p));
        p
    })
}

/// Unnormalized n-dimensional DFT in place, axis by axis.
fn fft_nd(grid: &Grid, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.points();
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::default(); n];
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let outer = grid.len() / (n * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, value) in line.iter().enumerate() {
                    data[base + k * stride] = *value;
                }
            }
        }
    }
}

/// `(-1)^{sum k_i}`: the phase of the origin sitting at index `N/2`.
fn origin_phase(grid: &Grid, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let parity: usize = idx[..grid.dim()].iter().sum();
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn forward(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(grid, &mut data, FftDirection::Forward);
    let dv = grid.cell_volume();
    for (flat, c) in data.iter_mut().enumerate() {
        *c *= dv * origin_phase(grid, flat);
    }
    data
}

pub(crate) fn inverse(grid: &Grid, mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let scale = 1.0 / (grid.cell_volume() * grid.len() as f64);
    for (flat, c) in coeffs.iter_mut().enumerate() {
        *c *= scale * origin_phase(grid, flat);
    }
    fft_nd(grid, &mut coeffs, FftDirection::Inverse);
    coeffs.into_iter().map(|c| c.re).collect()
}

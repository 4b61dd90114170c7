//! The nonlinear terms `N(u) = u^{p-1}` (power type) and
//! `N(u) = (|x|^{-1} * u^2) u` (Hartree type, three dimensions only), their
//! linearizations and second-order Taylor remainders.
//!
//! The free-space Coulomb convolution is realized on the periodic box with the
//! spherically truncated kernel `|x|^{-1} 1_{|x| < R}`, `R = L/2`, whose
//! transform is `4 pi (1 - cos(R |xi|)) / |xi|^2` (value `2 pi R^2` at
//! `xi = 0`). For densities supported in the ball of radius `R/2` this
//! reproduces the free-space potential there with no periodic-image error.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sobolev_norm, Grid, SpectralField};

/// Offset used wherever an order sitting exactly at `n/2` is nudged down.
pub const CRITICAL_ORDER_OFFSET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    Power,
    Hartree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    exponent: u32,
    dim: usize,
    dealias: bool,
}

impl NonlinearitySpec {
    /// `u^{p-1}` in dimension `dim`; requires an integer `p >= 3` below the
    /// `H^{1/2}`-critical exponent `2n/(n-1)`.
    pub fn power(p: u32, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidNonlinearity(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        if p < 3 {
            return Err(Error::InvalidNonlinearity(format!(
                "power exponent must be an integer p >= 3 (got {p})"
            )));
        }
        if dim >= 2 && (p as f64) >= 2.0 * dim as f64 / (dim as f64 - 1.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "p = {p} is not H^1/2-subcritical in n = {dim}: need p < 2n/(n-1) = {}",
                2.0 * dim as f64 / (dim as f64 - 1.0)
            )));
        }
        Ok(Self {
            kind: NonlinearityKind::Power,
            exponent: p,
            dim,
            dealias: false,
        })
    }

    /// `(|x|^{-1} * u^2) u`; defined for `dim = 3` only. Its effective exponent is 4.
    pub fn hartree(dim: usize) -> Result<Self> {
        if dim != 3 {
            return Err(Error::HartreeDimension(dim));
        }
        Ok(Self {
            kind: NonlinearityKind::Hartree,
            exponent: 4,
            dim,
            dealias: false,
        })
    }

    /// Enables 2/3-rule filtering of every product.
    pub fn with_dealiasing(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    /// `p`; 4 for Hartree. `N` is homogeneous of degree `p - 1`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        let found = f.grid().dim();
        if found != self.dim {
            if self.kind == NonlinearityKind::Hartree {
                return Err(Error::HartreeDimension(found));
            }
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    fn filter(&self, f: SpectralField) -> SpectralField {
        if self.dealias {
            two_thirds_filter(&f)
        } else {
            f
        }
    }
}

/// `N(u)`.
pub fn evaluate(spec: &NonlinearitySpec, u: &SpectralField) -> Result<SpectralField> {
    spec.check(u)?;
    let out = match spec.kind {
        NonlinearityKind::Power => {
            let k = (spec.exponent - 1) as i32;
            u.map(|x| x.powi(k))
        }
        NonlinearityKind::Hartree => {
            let density = spec.filter(u.map(|x| x * x));
            coulomb_convolution(&density)?.mul(u)?
        }
    };
    Ok(spec.filter(out))
}

/// `|x|^{-1} * u^2` with the truncated kernel.
pub fn hartree_potential(u: &SpectralField) -> Result<SpectralField> {
    coulomb_convolution(&u.map(|x| x * x))
}

/// `|x|^{-1} * rho` on a three-dimensional box, kernel truncated at `R = L/2`.
pub fn coulomb_convolution(rho: &SpectralField) -> Result<SpectralField> {
    if rho.grid().dim() != 3 {
        return Err(Error::HartreeDimension(rho.grid().dim()));
    }
    let radius = 0.5 * rho.grid().length();
    Ok(rho.to_real().apply_symbol(|k2| truncated_coulomb_symbol(k2, radius)))
}

/// Transform of `|x|^{-1} 1_{|x| < R}` at `|xi|^2 = k2`.
pub fn truncated_coulomb_symbol(k2: f64, radius: f64) -> f64 {
    if k2 == 0.0 {
        return 2.0 * PI * radius * radius;
    }
    let k = k2.sqrt();
    // 1 - cos(kR) = 2 sin^2(kR/2) avoids cancellation at small kR
    let half = (0.5 * k * radius).sin();
    8.0 * PI * half * half / k2
}

/// `N'(u0) v`.
pub fn linearize(spec: &NonlinearitySpec, u0: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    spec.check(u0)?;
    spec.check(v)?;
    let out = match spec.kind {
        NonlinearityKind::Power => {
            let p = spec.exponent as f64;
            let k = (spec.exponent - 2) as i32;
            u0.zip_real(v, |a, b| (p - 1.0) * a.powi(k) * b)?
        }
        NonlinearityKind::Hartree => {
            let potential = coulomb_convolution(&spec.filter(u0.map(|x| x * x)))?;
            let exchange = coulomb_convolution(&spec.filter(u0.mul(v)?))?;
            potential.mul(v)?.combine(1.0, &u0.mul(&exchange)?, 2.0)?
        }
    };
    Ok(spec.filter(out))
}

/// `N(u0 + w) - N(u0) - N'(u0) w`, expanded so that nothing cancels:
/// binomial terms of degree >= 2 in `w` for the power case, and
/// `(|x|^{-1}*w^2) u0 + 2 (|x|^{-1}*(u0 w)) w + (|x|^{-1}*w^2) w` for Hartree.
pub fn taylor_remainder(spec: &NonlinearitySpec, u0: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    spec.check(u0)?;
    spec.check(w)?;
    let out = match spec.kind {
        NonlinearityKind::Power => {
            let m = spec.exponent - 1;
            u0.zip_real(w, |a, b| {
                (0..=m - 2)
                    .map(|k| binomial(m, k) * a.powi(k as i32) * b.powi((m - k) as i32))
                    .sum()
            })?
        }
        NonlinearityKind::Hartree => {
            let w_potential = coulomb_convolution(&spec.filter(w.map(|x| x * x)))?;
            let cross = coulomb_convolution(&spec.filter(u0.mul(w)?))?;
            let a = w_potential.mul(u0)?;
            let b = cross.mul(w)?;
            let c = w_potential.mul(w)?;
            a.combine(1.0, &b, 2.0)?.add(&c)?
        }
    };
    Ok(spec.filter(out))
}

/// Same quantity as [`taylor_remainder`], by direct subtraction.
pub fn taylor_remainder_subtractive(
    spec: &NonlinearitySpec,
    u0: &SpectralField,
    w: &SpectralField,
) -> Result<SpectralField> {
    let shifted = evaluate(spec, &u0.add(w)?)?;
    let base = evaluate(spec, u0)?;
    let linear = linearize(spec, u0, w)?;
    shifted.sub(&base)?.sub(&linear)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Zeroes every mode with some `|k_axis| > N/3`.
pub fn two_thirds_filter(f: &SpectralField) -> SpectralField {
    let grid = *f.grid();
    let cutoff = grid.points() as i64 / 3;
    let mut coeffs = f.spectrum().into_owned();
    for (flat, c) in coeffs.iter_mut().enumerate() {
        let idx = grid.unravel(flat);
        if idx[..grid.dim()]
            .iter()
            .any(|&i| grid.wavenumber_index(i).abs() > cutoff)
        {
            *c = Default::default();
        }
    }
    let filtered = SpectralField::from_spectrum(grid, coeffs).expect("same grid");
    filtered.to_real()
}

/// Order of the norm on the left of the multilinear estimate for the power
/// nonlinearity, given inputs in `H^s`.
pub fn multilinear_target_order(dim: usize, p: u32, s: f64) -> f64 {
    let half = dim as f64 / 2.0;
    let p = p as f64;
    if s < half {
        (p - 1.0) * s - dim as f64 * (p - 2.0) / 2.0
    } else if s == half {
        (dim as f64 - CRITICAL_ORDER_OFFSET) / 2.0
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub count: usize,
}

/// Empirical ratio `|multilinear form|_{H^target} / prod |v_j|_{H^s}` over
/// `samples`. Each sample holds 3 fields for Hartree (`v1, v2, v3` in
/// `(|x|^{-1}*(v1 v2)) v3`) and `p - 1` fields for the power nonlinearity.
pub fn multilinear_ratio(spec: &NonlinearitySpec, s: f64, samples: &[Vec<SpectralField>]) -> Result<RatioStats> {
    if s < 0.5 {
        return Err(Error::InvalidNonlinearity(format!(
            "multilinear estimates need s >= 1/2 (got {s})"
        )));
    }
    if samples.is_empty() {
        return Err(Error::Degenerate("no samples".into()));
    }
    let arity = match spec.kind {
        NonlinearityKind::Hartree => 3,
        NonlinearityKind::Power => (spec.exponent - 1) as usize,
    };
    let mut ratios = Vec::with_capacity(samples.len());
    for tuple in samples {
        if tuple.len() != arity {
            return Err(Error::Degenerate(format!(
                "expected {arity} fields per sample, got {}",
                tuple.len()
            )));
        }
        let mut denom = 1.0;
        for v in tuple {
            spec.check(v)?;
            let norm = sobolev_norm(v, s)?;
            if norm == 0.0 {
                return Err(Error::ZeroField);
            }
            denom *= norm;
        }
        let numer = match spec.kind {
            NonlinearityKind::Hartree => {
                let form = coulomb_convolution(&tuple[0].mul(&tuple[1])?)?.mul(&tuple[2])?;
                sobolev_norm(&form, s)?
            }
            NonlinearityKind::Power => {
                let mut product = tuple[0].to_real();
                for v in &tuple[1..] {
                    product = product.mul(v)?;
                }
                sobolev_norm(&product, multilinear_target_order(spec.dim, spec.exponent, s))?
            }
        };
        ratios.push(numer / denom);
    }
    ratios.sort_by(f64::total_cmp);
    let count = ratios.len();
    let median = if count % 2 == 1 {
        ratios[count / 2]
    } else {
        0.5 * (ratios[count / 2 - 1] + ratios[count / 2])
    };
    Ok(RatioStats {
        max: ratios[count - 1],
        mean: ratios.iter().sum::<f64>() / count as f64,
        median,
        min: ratios[0],
        count,
    })
}

/// `count` tuples of random Gaussian bumps (centers in `[-2, 2]^n`, widths in
/// `[0.5, 2]`, amplitudes in `[0.5, 2]`), each passed through the 2/3 filter so
/// the samples are band-limited. Deterministic for a given `seed`.
pub fn random_bandlimited_samples(spec: &NonlinearitySpec, grid: &Grid, count: usize, seed: u64) -> Vec<Vec<SpectralField>> {
    let arity = match spec.kind {
        NonlinearityKind::Hartree => 3,
        NonlinearityKind::Power => (spec.exponent - 1) as usize,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..arity)
                .map(|_| {
                    let mut center = [0.0; 3];
                    for c in center.iter_mut().take(grid.dim()) {
                        *c = rng.random_range(-2.0..=2.0);
                    }
                    let width: f64 = rng.random_range(0.5..=2.0);
                    let amplitude: f64 = rng.random_range(0.5..=2.0);
                    let bump = SpectralField::from_fn(*grid, |x| {
                        let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
                        amplitude * (-r2 / (width * width)).exp()
                    });
                    two_thirds_filter(&bump)
                })
                .collect()
        })
        .collect()
}

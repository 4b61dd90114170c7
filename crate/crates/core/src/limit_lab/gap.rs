//! Nondegeneracy gap of `L = -Δ + 1 - N'(u_inf)` on even fields
//! `H^1`-orthogonal to `u_inf`.
//!
//! With `S = (1 - Δ)^{-1/2}` and `v = S q`, the constrained quotient
//! `<L v, v> / |v|_{H^1}^2` becomes `1 - <K q, q> / |q|^2` for the compact
//! operator `K = S N'(u_inf) S`, and the constraint becomes `q ⊥ S^{-1} u_inf`.
//! The gap is therefore `1 - (largest eigenvalue of K on that subspace)`,
//! computed by Lanczos with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{sobolev_norm, symmetrize_in_place, SpectralField};
use crate::nonlinearity::{evaluate, linearize, NonlinearitySpec};

const MAX_STEPS: usize = 300;
const RITZ_TOLERANCE: f64 = 1e-12;
const START_SEED: u64 = 0x5eed;

#[derive(Debug, Clone)]
pub struct GapReport {
    /// `1 - kappa`; positive for a nondegenerate ground state.
    pub d: f64,
    /// Largest eigenvalue `kappa` of the constrained `K`.
    pub kappa: f64,
    /// `|K q - kappa q|` for the returned Ritz vector (unit `q`).
    pub ritz_residual: f64,
    pub steps: usize,
    /// Minimizing direction `v = S q`, normalized in `H^1`.
    pub mode: SpectralField,
}

/// `(-Δ + 1) v - N'(u_inf) v`.
pub fn linearized_operator(nl: &NonlinearitySpec, u_inf: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    let free = v.apply_symbol(|k2| 1.0 + k2);
    free.sub(&linearize(nl, u_inf, v)?)
}

/// `|L u + (p - 2)(-Δ + 1) u|_{L^2} / |u|_{H^2}`. The combination vanishes
/// identically at a solution because `N'(u) u = (p - 1) N(u)`.
pub fn linearized_identity_residual(nl: &NonlinearitySpec, u_inf: &SpectralField) -> Result<f64> {
    let p = nl.exponent() as f64;
    let lu = linearized_operator(nl, u_inf, u_inf)?;
    let free = u_inf.apply_symbol(|k2| 1.0 + k2);
    let combo = lu.combine(1.0, &free, p - 2.0)?;
    let scale = sobolev_norm(u_inf, 2.0)?;
    if scale == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(sobolev_norm(&combo, 0.0)? / scale)
}

struct Constrained<'a> {
    nl: &'a NonlinearitySpec,
    u_inf: &'a SpectralField,
    /// unit vector along `S^{-1} u_inf`
    normal: Vec<f64>,
}

impl Constrained<'_> {
    fn project(&self, q: &mut [f64]) {
        symmetrize_in_place(self.u_inf.grid(), q);
        let a = dot(q, &self.normal);
        q.iter_mut().zip(&self.normal).for_each(|(x, n)| *x -= a * n);
    }

    fn half_smooth(&self, q: Vec<f64>) -> Result<SpectralField> {
        Ok(SpectralField::from_real(*self.u_inf.grid(), q)?.apply_symbol(|k2| (1.0 + k2).powf(-0.5)))
    }

    fn apply(&self, q: &[f64]) -> Result<Vec<f64>> {
        let v = self.half_smooth(q.to_vec())?;
        let kv = linearize(self.nl, self.u_inf, &v)?.apply_symbol(|k2| (1.0 + k2).powf(-0.5));
        let mut out = kv.into_values();
        self.project(&mut out);
        Ok(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(q: &mut [f64]) -> f64 {
    let n = dot(q, q).sqrt();
    if n > 0.0 {
        q.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// `min <L v, v> / |v|_{H^1}^2` over even `v` with `<v, u_inf>_{H^1} = 0`.
/// Fails with [`Error::NonPositiveGap`] when the minimum is not positive.
pub fn nondegeneracy_gap(u_inf: &SpectralField, nl: &NonlinearitySpec) -> Result<GapReport> {
    let grid = *u_inf.grid();
    evaluate(nl, u_inf)?; // dimension check
    let mut normal = u_inf.apply_symbol(|k2| (1.0 + k2).sqrt()).into_values();
    if normalize(&mut normal) == 0.0 {
        return Err(Error::ZeroField);
    }
    let op = Constrained { nl, u_inf, normal };

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut q: Vec<f64> = u_inf
        .real_values()
        .iter()
        .map(|&x| x.abs().sqrt() * (1.0 + 0.1 * rng.random_range(-1.0..1.0)))
        .collect();
    op.project(&mut q);
    if normalize(&mut q) == 0.0 {
        return Err(Error::Degenerate("empty constrained subspace".into()));
    }

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let limit = MAX_STEPS.min(grid.len() / 2);
    let mut best: Option<(f64, f64, Vec<f64>)> = None;

    for step in 0..limit {
        let current = &basis[step];
        let mut r = op.apply(current)?;
        let alpha = dot(&r, current);
        alphas.push(alpha);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let a = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= a * y);
            }
        }
        let beta = dot(&r, &r).sqrt();

        let m = alphas.len();
        let check = m % 5 == 0 || beta < 1e-14 || step + 1 == limit;
        if check {
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (top, &kappa) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty tridiagonal");
            let y = eig.eigenvectors.column(top);
            let estimate = beta * y[m - 1].abs();
            best = Some((kappa, estimate, y.iter().copied().collect()));
            if estimate <= RITZ_TOLERANCE * kappa.abs().max(1.0) || beta < 1e-14 {
                break;
            }
        }
        betas.push(beta);
        r.iter_mut().for_each(|x| *x /= beta);
        basis.push(r);
    }

    let (kappa, _, y) = best.expect("at least one Ritz check");
    let mut q = vec![0.0; grid.len()];
    for (coef, b) in y.iter().zip(&basis) {
        q.iter_mut().zip(b).for_each(|(x, v)| *x += coef * v);
    }
    normalize(&mut q);
    let kq = op.apply(&q)?;
    let ritz_residual = kq.iter().zip(&q).map(|(a, b)| (a - kappa * b).powi(2)).sum::<f64>().sqrt();
    let mode = op.half_smooth(q)?;
    let d = 1.0 - kappa;
    if !(d > 0.0) {
        return Err(Error::NonPositiveGap(d));
    }
    Ok(GapReport {
        d,
        kappa,
        ritz_residual,
        steps: y.len(),
        mode,
    })
}

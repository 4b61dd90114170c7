#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nrlimit::{Grid, NonlinearitySpec, SpectralField};

pub fn cubic_1d() -> NonlinearitySpec {
    NonlinearitySpec::power(4, 1).unwrap()
}

/// `sqrt(2) sech(x)`, the ground state of `-u'' + u = u^3`.
pub fn soliton(g: Grid) -> SpectralField {
    SpectralField::from_fn(g, |x| 2f64.sqrt() / x[0].cosh())
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Radial profile of the positive solution of `-Δu + u = u^{q}` in `dim`
/// dimensions by shooting on `u(0)`, integrated with classical RK4.
pub struct RadialProfile {
    pub dr: f64,
    pub values: Vec<f64>,
    pub center: f64,
}

impl RadialProfile {
    pub fn shoot(dim: usize, q: i32, lo: f64, hi: f64, r_max: f64) -> Self {
        let dr = 1e-3;
        let m = (dim - 1) as f64;
        // returns (+1 if the trajectory crosses zero, -1 if it turns up), profile
        let run = |a: f64| -> (i32, Vec<f64>) {
            let rhs = |r: f64, u: f64, du: f64| -> (f64, f64) {
                let lap = if r == 0.0 { 0.0 } else { m * du / r };
                (du, u - u.powi(q) - lap)
            };
            // start slightly off the origin using the series u = a + (a - a^q) r^2 / (2n)
            let r0 = dr;
            let k = (a - a.powi(q)) / (2.0 * dim as f64);
            let mut r = r0;
            let mut u = a + k * r0 * r0;
            let mut du = 2.0 * k * r0;
            let mut out = vec![a, u];
            while r < r_max {
                let (k1u, k1v) = rhs(r, u, du);
                let (k2u, k2v) = rhs(r + dr / 2.0, u + dr / 2.0 * k1u, du + dr / 2.0 * k1v);
                let (k3u, k3v) = rhs(r + dr / 2.0, u + dr / 2.0 * k2u, du + dr / 2.0 * k2v);
                let (k4u, k4v) = rhs(r + dr, u + dr * k3u, du + dr * k3v);
                u += dr / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
                du += dr / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                r += dr;
                if u < 0.0 {
                    return (1, out);
                }
                if du > 0.0 {
                    return (-1, out);
                }
                out.push(u);
            }
            (0, out)
        };
        let (mut lo, mut hi) = (lo, hi);
        assert_eq!(run(lo).0, -1, "lower shooting bracket");
        assert_eq!(run(hi).0, 1, "upper shooting bracket");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            match run(mid).0 {
                1 => hi = mid,
                _ => lo = mid,
            }
        }
        let center = 0.5 * (lo + hi);
        let (_, values) = run(center);
        Self { dr, values, center }
    }

    /// Linear interpolation; `None` past the reliable range.
    pub fn at(&self, r: f64) -> Option<f64> {
        let t = r / self.dr;
        let i = t.floor() as usize;
        if i + 1 >= self.values.len() {
            return None;
        }
        let f = t - i as f64;
        Some(self.values[i] * (1.0 - f) + self.values[i + 1] * f)
    }
}

/// Gap of `-∂² + 1 - 3u²` (the cubic linearization at `u = sqrt(2) sech`) on
/// even functions `H^1`-orthogonal to `u`, from an eighth-order finite-difference
/// discretization with `points` samples on the periodic box `[-L/2, L/2)`.
/// Only the half line is stored; even symmetry folds the stencil.
pub fn dense_gap_oracle(length: f64, points: usize) -> f64 {
    let m = points / 2;
    let size = m + 1;
    let dx = length / points as f64;
    let stencil = [
        -205.0 / 72.0,
        8.0 / 5.0,
        -1.0 / 5.0,
        8.0 / 315.0,
        -1.0 / 560.0,
    ];
    let fold = |j: i64| -> usize {
        let period = points as i64;
        let mut j = j.rem_euclid(period);
        if j > m as i64 {
            j = period - j;
        }
        j as usize
    };
    // folded second derivative acting on half-line samples
    let mut d2 = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        for (k, &w) in stencil.iter().enumerate() {
            if k == 0 {
                d2[(i, i)] += w;
            } else {
                d2[(i, fold(i as i64 + k as i64))] += w;
                d2[(i, fold(i as i64 - k as i64))] += w;
            }
        }
    }
    d2 /= dx * dx;
    // quadrature weights of the folded inner product
    let weight = |i: usize| -> f64 { if i == 0 || i == m { 1.0 } else { 2.0 } };
    let sq: Vec<f64> = (0..size).map(|i| weight(i).sqrt()).collect();
    let mut b = DMatrix::<f64>::identity(size, size) - d2;
    for i in 0..size {
        for j in 0..size {
            b[(i, j)] *= sq[i] / sq[j];
        }
    }
    let b = 0.5 * (&b + b.transpose());
    let u: Vec<f64> = (0..size).map(|i| 2f64.sqrt() / (i as f64 * dx).cosh()).collect();
    let potential = DVector::from_iterator(size, u.iter().map(|v| 3.0 * v * v));

    let chol = b.clone().cholesky().expect("1 - d2 is positive definite");
    let l = chol.l();
    // K = L^{-1} V L^{-T}
    let mut lt_inv = l.transpose();
    assert!(lt_inv.try_inverse_mut());
    let l_inv = lt_inv.transpose();
    let mut k = &l_inv * DMatrix::from_diagonal(&potential) * &lt_inv;
    k = 0.5 * (&k + k.transpose());
    // constraint q ⊥ L^T u (scaled coordinates)
    let u_scaled = DVector::from_iterator(size, u.iter().zip(&sq).map(|(v, s)| v * s));
    let mut z = l.transpose() * u_scaled;
    z /= z.norm();
    let proj = DMatrix::<f64>::identity(size, size) - &z * z.transpose();
    let kp = &proj * k * &proj;
    let kappa = kp.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    1.0 - kappa
}

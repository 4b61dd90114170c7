use crate::error::{Error, Result};
use crate::nonlinearity::{NonlinearityKind, CRITICAL_ORDER_OFFSET};

/// Orders `s_0 = 1/2, s_1, ..., s_count` along which regularity is bootstrapped.
///
/// Hartree: `s_k = k + 1/2`. Power: `s_{k+1} = 1 - n(p-2)/2 + (p-1) s_k` until
/// the first order above `n/2`, then steps of 1. A computed order landing
/// exactly on `n/2` is lowered by [`CRITICAL_ORDER_OFFSET`] before the next
/// step; the starting order `1/2` is never moved.
pub fn sobolev_ladder(dim: usize, p: u32, kind: NonlinearityKind, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidAnalysis("ladder needs count >= 1".into()));
    }
    if kind == NonlinearityKind::Hartree {
        if dim != 3 {
            return Err(Error::HartreeDimension(dim));
        }
        return Ok((0..=count).map(|k| k as f64 + 0.5).collect());
    }
    let n = dim as f64;
    let pf = p as f64;
    if !(1..=3).contains(&dim) || p < 3 || 1.0 / (pf - 2.0) - (n - 1.0) / 2.0 <= 0.0 {
        return Err(Error::InvalidNonlinearity(format!(
            "p = {p} is outside the subcritical range for n = {dim}"
        )));
    }
    let half = n / 2.0;
    let mut ladder = vec![0.5];
    let mut above = false;
    while ladder.len() <= count {
        let k = ladder.len() - 1;
        let s = ladder[k];
        let next = if above {
            s + 1.0
        } else {
            1.0 - n * (pf - 2.0) / 2.0 + (pf - 1.0) * s
        };
        ladder.push(next);
        let k = k + 1;
        if !above && (ladder[k] - half).abs() < 1e-12 {
            ladder[k] = half - CRITICAL_ORDER_OFFSET;
        }
        above = ladder[k] > half;
    }
    Ok(ladder)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn hartree_ladder() {
        let l = sobolev_ladder(3, 4, NonlinearityKind::Hartree, 4).unwrap();
        assert_eq!(l, vec![0.5, 1.5, 2.5, 3.5, 4.5]);
        assert!(sobolev_ladder(2, 4, NonlinearityKind::Hartree, 4).is_err());
    }

    #[test]
    fn one_dimensional_quadratic_crosses_at_once() {
        let l = sobolev_ladder(1, 3, NonlinearityKind::Power, 4).unwrap();
        assert!(close(&l, &[0.5, 1.5, 2.5, 3.5, 4.5]));
    }

    #[test]
    fn two_dimensional_quadratic_is_perturbed() {
        let l = sobolev_ladder(2, 3, NonlinearityKind::Power, 4).unwrap();
        let d = CRITICAL_ORDER_OFFSET;
        assert!(close(&l, &[0.5, 1.0 - d, 2.0 - 2.0 * d, 3.0 - 2.0 * d, 4.0 - 2.0 * d]));
    }

    #[test]
    fn slow_ladder_and_errors() {
        // n = 3, p = 3 is critical; n = 2, p = 4 as well
        assert!(sobolev_ladder(3, 3, NonlinearityKind::Power, 3).is_err());
        assert!(sobolev_ladder(2, 4, NonlinearityKind::Power, 3).is_err());
        assert!(sobolev_ladder(1, 3, NonlinearityKind::Power, 0).is_err());
        // n = 1, p = 6: s -> 5 s - 1, first step 1.5
        let l = sobolev_ladder(1, 6, NonlinearityKind::Power, 2).unwrap();
        assert!(close(&l, &[0.5, 1.5, 2.5]));
    }
}

mod common;

use approx::assert_relative_eq;
use nrlimit::grid::{symmetrize, Direction};
use nrlimit::snapshot::{load_snapshot, save_snapshot, SnapshotFormat};
use nrlimit::{inner_product, sobolev_norm, sobolev_norms, Error, Grid, InnerProduct, SpectralField};
use proptest::prelude::*;

use common::{simpson, soliton};

#[test]
fn grid_examples() {
    let g = Grid::new(1, 32.0, 1024).unwrap();
    assert_eq!(g.spacing(), 0.03125);
    assert_relative_eq!(g.max_frequency(), 2.0 * std::f64::consts::PI * 512.0 / 32.0, epsilon = 1e-12);
    assert_relative_eq!(g.max_frequency(), 100.53, epsilon = 5e-3);
    assert_eq!(Grid::new(3, 16.0, 64).unwrap().len(), 262_144);
    assert!(matches!(Grid::new(1, 32.0, 1023), Err(Error::InvalidGrid(_))));
    assert!(Grid::new(1, -1.0, 64).is_err());
    assert!(Grid::new(4, 1.0, 64).is_err());
    assert!(Grid::new(1, 1.0, 14).is_err());
}

#[test]
fn soliton_norms_match_quadrature() {
    // quadrature of the analytic integrands, independent of the spectral code
    let mass = simpson(|x| 2.0 / x.cosh().powi(2), -40.0, 40.0, 400_000);
    let kinetic = simpson(|x| 2.0 * (x.tanh() / x.cosh()).powi(2), -40.0, 40.0, 400_000);
    assert_relative_eq!(mass, 4.0, epsilon = 1e-12);
    assert_relative_eq!(kinetic, 4.0 / 3.0, epsilon = 1e-12);

    let g = Grid::new(1, 64.0, 2048).unwrap();
    let u = soliton(g);
    let h1 = sobolev_norm(&u, 1.0).unwrap();
    assert_relative_eq!(h1, (mass + kinetic).sqrt(), max_relative = 1e-11);
    assert_relative_eq!(h1, 2.309401, epsilon = 1e-6);
    assert_relative_eq!(
        inner_product(&u, &u, InnerProduct::H1).unwrap(),
        16.0 / 3.0,
        max_relative = 1e-11
    );
}

#[test]
fn box_doubling_leaves_norms_unchanged() {
    let g = Grid::new(1, 32.0, 1024).unwrap();
    let big = g.doubled_box().unwrap();
    assert_eq!(big.spacing(), g.spacing());
    let f = |x: &[f64]| (-x[0] * x[0] / 2.0).exp() * (1.0 + 0.3 * x[0] * x[0]);
    let a = sobolev_norms(&SpectralField::from_fn(g, f), &[0.0, 1.0, 2.0, 3.0]).unwrap();
    let b = sobolev_norms(&SpectralField::from_fn(big, f), &[0.0, 1.0, 2.0, 3.0]).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn unsupported_orders_are_rejected() {
    let g = Grid::new(1, 8.0, 32).unwrap();
    let f = SpectralField::gaussian(g, 1.0);
    assert!(matches!(sobolev_norm(&f, 9.0), Err(Error::UnsupportedOrder(_))));
    assert!(sobolev_norm(&f, -4.0).is_ok());
    let other = SpectralField::gaussian(Grid::new(1, 8.0, 64).unwrap(), 1.0);
    assert!(matches!(inner_product(&f, &other, InnerProduct::L2), Err(Error::GridMismatch)));
}

#[test]
fn snapshot_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(2, 10.0, 32).unwrap();
    let f = SpectralField::from_fn(g, |x| (x[0] - 0.3).sin() * (-x[1] * x[1]).exp());
    for format in [SnapshotFormat::Binary, SnapshotFormat::Csv] {
        let path = dir.path().join(format!("u.{}", format.extension()));
        save_snapshot(&path, &f, format).unwrap();
        let back = load_snapshot(&path).unwrap();
        assert_eq!(back.grid(), f.grid());
        for (a, b) in back.values().unwrap().iter().zip(f.values().unwrap()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=3, 4.0f64..40.0).prop_flat_map(|(dim, len)| {
        let sizes: &[usize] = match dim {
            1 => &[16, 32, 64, 128],
            2 => &[16, 32],
            _ => &[16],
        };
        proptest::sample::select(sizes).prop_map(move |n| Grid::new(dim, len, n).unwrap())
    })
}

fn field_strategy() -> impl Strategy<Value = SpectralField> {
    grid_strategy().prop_flat_map(|g| {
        proptest::collection::vec(-1.0f64..1.0, g.len())
            .prop_map(move |v| SpectralField::from_real(g, v).unwrap())
    })
}

fn field_pair() -> impl Strategy<Value = (SpectralField, SpectralField)> {
    grid_strategy().prop_flat_map(|g| {
        (
            proptest::collection::vec(-1.0f64..1.0, g.len()),
            proptest::collection::vec(-1.0f64..1.0, g.len()),
        )
            .prop_map(move |(a, b)| {
                (SpectralField::from_real(g, a).unwrap(), SpectralField::from_real(g, b).unwrap())
            })
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parseval(f in field_strategy()) {
        let direct: f64 = f.values().unwrap().iter().map(|v| v * v).sum::<f64>() * f.grid().cell_volume();
        let spectral = sobolev_norm(&f, 0.0).unwrap().powi(2);
        prop_assert!(rel_close(direct, spectral, 1e-12));
    }

    #[test]
    fn norms_increase_with_order(f in field_strategy()) {
        let n = sobolev_norms(&f, &[0.0, 0.5, 1.0, 2.0, 3.0]).unwrap();
        for w in n.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-14));
        }
    }

    #[test]
    fn transform_is_linear((f, g) in field_pair(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let lhs = f.combine(a, &g, b).unwrap().transform(Direction::Forward).unwrap();
        let ff = f.transform(Direction::Forward).unwrap();
        let gf = g.transform(Direction::Forward).unwrap();
        let lhs = lhs.coefficients().unwrap();
        let scale = lhs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        for ((l, x), y) in lhs.iter().zip(ff.coefficients().unwrap()).zip(gf.coefficients().unwrap()) {
            prop_assert!((l - (x * a + y * b)).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn round_trip(f in field_strategy()) {
        let back = f.transform(Direction::Forward).unwrap().transform(Direction::Inverse).unwrap();
        let scale = f.sup_norm();
        for (a, b) in back.values().unwrap().iter().zip(f.values().unwrap()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        // wrong representation in either direction
        prop_assert!(f.transform(Direction::Inverse).is_err());
    }

    #[test]
    fn spectrum_is_hermitian(f in field_strategy()) {
        let g = *f.grid();
        let c = f.spectrum();
        let n = g.points();
        let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        for flat in 0..g.len() {
            let idx = g.unravel(flat);
            let mut mirror = [0usize; 3];
            for d in 0..g.dim() {
                mirror[d] = (n - idx[d]) % n;
            }
            let m = g.ravel(&mirror[..g.dim()]);
            prop_assert!((c[flat] - c[m].conj()).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn symmetrize_is_an_even_projection(f in field_strategy()) {
        let s = symmetrize(&f).unwrap();
        let twice = symmetrize(&s).unwrap();
        for (a, b) in s.values().unwrap().iter().zip(twice.values().unwrap()) {
            prop_assert!((a - b).abs() <= 1e-15 * (1.0 + a.abs()));
        }
        // even fields are L2-orthogonal to the odd part f - s along each axis
        let odd = f.sub(&s).unwrap();
        let ip = inner_product(&s, &odd, InnerProduct::L2).unwrap();
        let scale = sobolev_norm(&f, 0.0).unwrap().powi(2);
        prop_assert!(ip.abs() <= 1e-12 * scale.max(1e-300));
    }
}

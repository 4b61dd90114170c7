mod common;

use std::f64::consts::PI;

use nrlimit::operators::{dense_symbol_scan, symbol_gap_ratio, taylor_residual};
use nrlimit::{apply_multiplier, sobolev_norm, Grid, MultiplierMode, OperatorSpec, SpectralField};
use proptest::prelude::*;

use common::{simpson, soliton};

const C_VALUES: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

#[test]
fn symbol_ordering_on_the_lattice() {
    let g = Grid::new(1, 32.0, 1024).unwrap();
    let shells = g.frequency_squared();
    for c in C_VALUES {
        let p = OperatorSpec::pseudo_relativistic(c).unwrap();
        for &k2 in &shells {
            let s = p.symbol(k2);
            assert!(1.0 + k2 >= s, "upper ordering at c = {c}, xi^2 = {k2}");
            assert!(s >= 0.5 * (1.0 + k2).sqrt(), "lower bound at c = {c}, xi^2 = {k2}");
        }
        assert!(symbol_gap_ratio(&p, &g) >= 0.5);
        assert!(dense_symbol_scan(&p, 1e3, 200_000) >= 0.5);
    }
}

#[test]
fn symbol_is_strictly_increasing() {
    let nr = OperatorSpec::nonrelativistic();
    for c in C_VALUES {
        let p = OperatorSpec::pseudo_relativistic(c).unwrap();
        let mut prev = (p.symbol(0.0), nr.symbol(0.0));
        for i in 1..5000 {
            let k2 = (i as f64 * 0.01).powi(2);
            let now = (p.symbol(k2), nr.symbol(k2));
            assert!(now.0 > prev.0 && now.1 > prev.1);
            prev = now;
        }
    }
}

#[test]
fn pointwise_limit_bound() {
    for c in [10.0, 40.0, 128.0] {
        let p = OperatorSpec::pseudo_relativistic(c).unwrap();
        for i in 1..=100 {
            let xi = c / 10.0 * i as f64 / 100.0;
            let gap = (p.symbol(xi * xi) - (1.0 + xi * xi)).abs();
            assert!(gap <= 1.01 * xi.powi(4) / (c * c));
        }
    }
}

#[test]
fn taylor_residual_tends_to_one() {
    // c^2 (1 + xi^2 - P_c) / xi^4 = (1 + t - t^2 + 2 t^3 - 5 t^4 + ...)^{-2}, t = xi^2 / c^2,
    // from the binomial series of sqrt(1 + 4t)
    let series = |t: f64| (1.0 + t - t * t + 2.0 * t.powi(3) - 5.0 * t.powi(4)).powi(-2);
    let g = Grid::new(1, 2.0 * PI, 64).unwrap();
    for c in [10.0, 30.0, 100.0, 1000.0] {
        let p = OperatorSpec::pseudo_relativistic(c).unwrap();
        // xi = 1 is the largest ratio in the window
        let r = taylor_residual(&p, &g, 0.1).unwrap();
        assert!((r - series(1.0 / (c * c))).abs() < 1e-7, "c = {c}");
    }
    let p = OperatorSpec::pseudo_relativistic(1e4).unwrap();
    assert!((taylor_residual(&p, &g, 0.1).unwrap() - 1.0).abs() < 1e-7);
}

#[test]
fn multiplier_on_soliton_matches_quadrature() {
    let c = 10.0;
    let p = OperatorSpec::pseudo_relativistic(c).unwrap();
    let g = Grid::new(1, 64.0, 2048).unwrap();
    let u = soliton(g);
    let pu = apply_multiplier(&u, &p, MultiplierMode::Forward);

    // (P u)(x) = (1/pi) ∫_0^∞ P(xi) sqrt(2) pi sech(pi xi / 2) cos(xi x) d xi
    let reference = |x: f64| {
        simpson(
            |xi| p.symbol(xi * xi) * 2f64.sqrt() * PI / (PI * xi / 2.0).cosh() * (xi * x).cos(),
            0.0,
            40.0,
            40_000,
        ) / PI
    };
    let values = pu.values().unwrap();
    for x in [0.0, 0.5, 1.25, 3.0, 6.0] {
        let i = (x / g.spacing()).round() as usize + g.origin_index();
        assert!((values[i] - reference(x)).abs() < 1e-9, "x = {x}");
    }

    let free = apply_multiplier(&u, &OperatorSpec::nonrelativistic(), MultiplierMode::Forward);
    let distance = sobolev_norm(&pu.sub(&free).unwrap(), 0.0).unwrap();
    let fourth = u.apply_symbol(|k2| k2 * k2);
    assert!(distance <= sobolev_norm(&fourth, 0.0).unwrap() / (c * c));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inverse_undoes_forward(
        values in proptest::collection::vec(-1.0f64..1.0, 128),
        c in 1.0f64..200.0,
        relativistic in any::<bool>(),
    ) {
        let g = Grid::new(1, 20.0, 128).unwrap();
        let f = SpectralField::from_real(g, values).unwrap();
        let op = if relativistic {
            OperatorSpec::pseudo_relativistic(c).unwrap()
        } else {
            OperatorSpec::nonrelativistic()
        };
        let back = apply_multiplier(
            &apply_multiplier(&f, &op, MultiplierMode::Forward),
            &op,
            MultiplierMode::InverseOfSymbol,
        );
        for (a, b) in back.values().unwrap().iter().zip(f.values().unwrap()) {
            prop_assert!((a - b).abs() <= 1e-12 * f.sup_norm().max(1.0));
        }
    }

    #[test]
    fn quadratic_forms_are_ordered(
        values in proptest::collection::vec(-1.0f64..1.0, 256),
        c in 1.0f64..200.0,
    ) {
        let g = Grid::new(2, 12.0, 16).unwrap();
        let f = SpectralField::from_real(g, values).unwrap();
        let p = OperatorSpec::pseudo_relativistic(c).unwrap();
        let rel = nrlimit::inner_product(&apply_multiplier(&f, &p, MultiplierMode::Forward), &f, nrlimit::InnerProduct::L2).unwrap();
        let free = nrlimit::inner_product(&f, &f, nrlimit::InnerProduct::H1).unwrap();
        prop_assert!(rel <= free * (1.0 + 1e-13));
    }
}

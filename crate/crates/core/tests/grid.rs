//! Quarter-grid storage and symmetry behaviour seen from outside the crate.

use bcpatch_core::grid::{GridFunction, Parity, QuarterGrid, SymmetricField};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn grid(n: usize) -> QuarterGrid {
    QuarterGrid::new(n).unwrap()
}

fn mode_field(g: QuarterGrid, m: usize, k: usize) -> SymmetricField {
    SymmetricField::from_fn(g, move |x, y| {
        (TAU * m as f64 * x).sin() * (TAU * k as f64 * y).sin()
    })
}

#[test]
fn grid_parameters_are_consistent() {
    let g = grid(16);
    assert_eq!(g.nodes(), 17);
    assert_eq!(g.h(), 1.0 / 32.0);
    assert_eq!(g.coord(16), 0.5);
    assert_eq!(g.idx(1, 2), 2 * 17 + 1);
    assert!((g.radius(3, 4) - 5.0 * g.h()).abs() < 1e-16);
    for bad in [0usize, 4, 7, 12, 100] {
        assert!(QuarterGrid::new(bad).is_err(), "n = {bad} must be rejected");
    }
}

#[test]
fn torus_extension_has_odd_odd_symmetry() {
    let g = grid(8);
    // Diagonal symmetry is a property of the stored data, not of the class,
    // so feed a diagonally symmetric combination.
    let f = SymmetricField::from_fn(g, |x, y| {
        (TAU * x).sin() * (2.0 * TAU * y).sin() + (2.0 * TAU * x).sin() * (TAU * y).sin()
    });
    let full = f.extend_to_torus();
    let m = 2 * g.n();
    for j in 0..m {
        for i in 0..m {
            // Reflection through x -> -x on the torus: index i -> m - i.
            let ri = (m - i) % m;
            let rj = (m - j) % m;
            assert_eq!(full[j * m + i], -full[j * m + ri], "odd in x at ({i},{j})");
            assert_eq!(full[j * m + i], -full[rj * m + i], "odd in y at ({i},{j})");
            assert_eq!(full[j * m + i], full[i * m + j], "diagonal at ({i},{j})");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn torus_round_trip_recovers_every_field(raw in proptest::collection::vec(-1.0f64..1.0, 49)) {
        let g = grid(8);
        // Embed arbitrary interior data (7 x 7 nodes) into a valid field.
        let mut values = vec![0.0; g.nodes() * g.nodes()];
        for j in 1..8 {
            for i in 1..8 {
                values[g.idx(i, j)] = raw[(j - 1) * 7 + (i - 1)];
            }
        }
        let f = SymmetricField::from_values(g, values).unwrap();
        let back = SymmetricField::restrict_from_torus(g, &f.extend_to_torus()).unwrap();
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn diagonal_symmetrization_is_idempotent_and_bounded(raw in proptest::collection::vec(-1.0f64..1.0, 49)) {
        let g = grid(8);
        let mut values = vec![0.0; g.nodes() * g.nodes()];
        for j in 1..8 {
            for i in 1..8 {
                values[g.idx(i, j)] = raw[(j - 1) * 7 + (i - 1)];
            }
        }
        let mut f = SymmetricField::from_values(g, values).unwrap();
        let before = f.sup_norm();
        f.symmetrize_diagonal();
        prop_assert!(f.diagonal_asymmetry() == 0.0);
        prop_assert!(f.sup_norm() <= before + 1e-15);
        let once = f.values().to_vec();
        f.symmetrize_diagonal();
        prop_assert_eq!(f.values(), &once[..]);
    }
}

#[test]
fn quadrature_carries_the_euler_maclaurin_constant() {
    // int over the quarter cell of sin(2 pi x) sin(2 pi y) is 1/pi^2. The
    // half-period integrand is not periodic on the cell, so the trapezoid
    // error per axis is (h^2/12)(f'(1/2) - f'(0)) = -pi h^2/3; the product
    // rule doubles it: T - I = -2 h^2/3 + O(h^4).
    let expect = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let mut errs = Vec::new();
    for n in [64usize, 128] {
        let g = grid(n);
        let f = mode_field(g, 1, 1);
        let one = GridFunction::from_fn(g, (Parity::Even, Parity::Even), |_, _| 1.0);
        let got = f.weighted_integral(&one, 1.0).unwrap();
        let err = got - expect;
        let model = -2.0 * g.h() * g.h() / 3.0;
        assert!(
            (err - model).abs() < 2e-8,
            "n = {n}: error {err:.6e} vs Euler-Maclaurin model {model:.6e}"
        );
        errs.push(err);
    }
    let ratio = errs[0] / errs[1];
    assert!((3.9..4.1).contains(&ratio), "second order: ratio {ratio:.3}");

    // Mismatched grids must be rejected.
    let g = grid(64);
    let f = mode_field(g, 1, 1);
    let wrong = GridFunction::from_fn(grid(32), (Parity::Even, Parity::Even), |_, _| 1.0);
    assert!(f.weighted_integral(&wrong, 1.0).is_err());
}

#[test]
fn bicubic_sampling_is_node_exact_and_fourth_order() {
    let f64_mode = |x: f64, y: f64| (TAU * x).sin() * (TAU * y).sin();
    let mut errors = Vec::new();
    for n in [32usize, 64] {
        let g = grid(n);
        let f = mode_field(g, 1, 1);
        for (i, j) in [(3usize, 5usize), (n / 2, n / 3), (1, n - 1)] {
            assert_eq!(f.value(i, j), f.sample(g.coord(i), g.coord(j)));
        }
        // Off-node error on a fixed probe set.
        let mut worst = 0.0f64;
        for k in 1..40 {
            let x = 0.5 * k as f64 / 41.0;
            let y = 0.5 * (41 - k) as f64 / 41.0;
            worst = worst.max((f.sample(x, y) - f64_mode(x, y)).abs());
        }
        errors.push(worst);
    }
    // Halving h must shrink the error by roughly 2^4; allow a loose factor.
    assert!(errors[1] * 8.0 < errors[0], "orders: {errors:?}");
    assert!(errors[0] < 1e-4);
}

#[test]
fn sampling_respects_odd_parity_across_axes() {
    let g = grid(16);
    let f = mode_field(g, 1, 2);
    let (x, y) = (0.137, 0.291);
    let v = f.sample(x, y);
    assert!((f.sample(-x, y) + v).abs() < 1e-15);
    assert!((f.sample(x, -y) + v).abs() < 1e-15);
    assert!((f.sample(-x, -y) - v).abs() < 1e-15);
    // Periodic images.
    assert!((f.sample(x + 1.0, y - 1.0) - v).abs() < 1e-12);
}

#[test]
fn spectral_gradient_matches_analytic_derivatives() {
    let g = grid(64);
    let f = mode_field(g, 2, 3);
    let (dx, dy) = f.gradient();
    assert_eq!(dx.parity(), (Parity::Even, Parity::Odd));
    assert_eq!(dy.parity(), (Parity::Odd, Parity::Even));
    let mut worst = 0.0f64;
    for j in 0..=g.n() {
        for i in 0..=g.n() {
            let (x, y) = (g.coord(i), g.coord(j));
            let ax = TAU * 2.0 * (TAU * 2.0 * x).cos() * (TAU * 3.0 * y).sin();
            let ay = TAU * 3.0 * (TAU * 2.0 * x).sin() * (TAU * 3.0 * y).cos();
            worst = worst.max((dx.value(i, j) - ax).abs().max((dy.value(i, j) - ay).abs()));
        }
    }
    assert!(worst < 1e-11, "gradient error {worst:.3e}");
}

#[test]
fn polar_sampling_validates_the_domain() {
    let g = grid(16);
    let f = mode_field(g, 1, 1);
    assert!(f.sample_polar(0.1, 0.3).is_ok());
    assert!(f.sample_polar(-0.1, 0.3).is_err());
    assert!(f.sample_polar(0.1, 2.0).is_err());
    assert!(f.sample_polar(0.9, 0.1).is_err());
    // Polar and Cartesian sampling agree where both are defined.
    let (r, th) = (0.21f64, 0.7f64);
    let cart = f.sample(r * th.cos(), r * th.sin());
    assert!((f.sample_polar(r, th).unwrap() - cart).abs() < 1e-15);
}

#[test]
fn from_values_enforces_the_boundary_ring() {
    let g = grid(8);
    let mut values = vec![0.0; g.nodes() * g.nodes()];
    values[g.idx(0, 3)] = 1e-16;
    assert!(SymmetricField::from_values(g, values.clone()).is_err());
    values[g.idx(0, 3)] = 0.0;
    values[g.idx(8, 2)] = -1.0;
    assert!(SymmetricField::from_values(g, values.clone()).is_err());
    values[g.idx(8, 2)] = 0.0;
    assert!(SymmetricField::from_values(g, values).is_ok());
    assert!(SymmetricField::from_values(g, vec![0.0; 7]).is_err());
}

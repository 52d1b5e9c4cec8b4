//! Barrier profile against an independent oracle, plus frozen regressions
//! and the exact scaling identities.

mod common;

use bcpatch_core::barrier::{barrier_field, eval_barrier, solve_profile};
use bcpatch_core::grid::QuarterGrid;

/// Values produced by `oracle_profile` and `solve_profile` on first honest
/// runs; the two implementations agreed to 8e-14 at s = 0.5.
const ORACLE_MID_S05: f64 = 7.4856359533049166e-1;
const LIB_MID_S05: f64 = 7.4856359533055183e-1;

#[test]
fn profile_matches_the_independent_oracle() {
    let p = solve_profile(0.5, 2048, 1e-12).unwrap();
    let (_, oracle_mid) = common::oracle_profile(0.5, 1_000_000);
    assert!(
        (oracle_mid - ORACLE_MID_S05).abs() <= 1e-12,
        "oracle drifted: {oracle_mid:.16e}"
    );
    let rel = ((p.midpoint() - oracle_mid) / oracle_mid).abs();
    assert!(rel <= 2e-9, "solver vs oracle relative gap {rel:.3e}");
}

#[test]
fn frozen_profile_regressions() {
    // (s, g(pi/4), a) from the first honest solves; deterministic pipeline.
    let table = [
        (0.1, 1.7736441643523122, 3.7578326758228715),
        (0.3, 8.7309896953701127e-1, 2.0982105316629314),
        (0.5, LIB_MID_S05, 2.1111504080283767),
        (0.7, 7.2508873430138010e-1, 2.6041235001727747),
        (0.9, 7.3104384242947162e-1, 4.4681824962862349),
    ];
    for (s, mid, a) in table {
        let p = solve_profile(s, 2048, 1e-12).unwrap();
        assert!(
            ((p.midpoint() - mid) / mid).abs() < 1e-12,
            "s = {s}: midpoint {:.16e} vs frozen {mid:.16e}",
            p.midpoint()
        );
        assert!(
            ((p.a() - a) / a).abs() < 1e-10,
            "s = {s}: a {:.16e} vs frozen {a:.16e}",
            p.a()
        );
    }
}

#[test]
fn certified_residual_is_under_the_gate() {
    for s in [0.1, 0.5, 0.9] {
        let p = solve_profile(s, 2048, 1e-12).unwrap();
        let res = p.ode_residual_sup();
        assert!(res <= 1e-8, "s = {s}: certified residual {res:.3e}");
    }
}

#[test]
fn scaling_and_homogeneity_identities() {
    let p = solve_profile(0.5, 2048, 1e-12).unwrap();
    let pts = [(0.31, 0.11), (0.05, 0.44), (0.2, 0.2), (0.47, 0.01)];
    for eps in [1e-2f64, 1e-4] {
        let rt = eps.sqrt();
        for &(x, y) in &pts {
            // psi_eps(sqrt(eps) y) = eps * psi_1(y), exactly the self-similar law.
            let lhs = eval_barrier(&p, eps, (rt * x, rt * y)).unwrap();
            let rhs = eps * eval_barrier(&p, 1.0, (x, y)).unwrap();
            assert!(
                ((lhs - rhs) / rhs).abs() < 1e-12,
                "eps = {eps}, point ({x},{y}): {lhs:.16e} vs {rhs:.16e}"
            );
        }
    }
    // r^beta homogeneity at fixed angle.
    for &(r1, r2, th) in &[(0.4f64, 0.04f64, 0.6f64), (0.3, 0.003, 1.1)] {
        let v1 = eval_barrier(&p, 1.0, (r1 * th.cos(), r1 * th.sin())).unwrap();
        let v2 = eval_barrier(&p, 1.0, (r2 * th.cos(), r2 * th.sin())).unwrap();
        let expect = (r1 / r2).powf(p.beta());
        assert!(
            ((v1 / v2 - expect) / expect).abs() < 1e-12,
            "homogeneity at theta = {th}"
        );
    }
}

#[test]
fn field_nodes_agree_with_pointwise_evaluation() {
    let p = solve_profile(0.5, 512, 1e-10).unwrap();
    let grid = QuarterGrid::new(64).unwrap();
    let eps = 1e-2;
    let f = barrier_field(&p, eps, grid).unwrap();
    for j in 1..grid.n() {
        for i in 1..grid.n() {
            let direct = eval_barrier(&p, eps, (grid.coord(i), grid.coord(j))).unwrap();
            let stored = f.value(i, j);
            assert!(
                (stored - direct).abs() <= 1e-15 * direct.abs().max(1.0),
                "node ({i},{j})"
            );
        }
    }
    // Axes are genuinely zero.
    for k in 0..=grid.n() {
        assert_eq!(f.value(k, 0), 0.0);
        assert_eq!(f.value(0, k), 0.0);
    }
}

//! Spectral operators, the reference stream function, and the Green split,
//! exercised through the public API.

use bcpatch_core::grid::QuarterGrid;
use bcpatch_core::poisson::{
    apply_laplacian, compute_psi0, invert_laplacian, prolong, psi0_spectrum, torus_green,
    transform_forward, transform_inverse, SineSpectrum,
};
use std::f64::consts::PI;

fn grid(n: usize) -> QuarterGrid {
    QuarterGrid::new(n).unwrap()
}

/// Deterministic dense band-limited spectrum for identity checks.
fn test_spectrum(g: QuarterGrid, band: usize) -> SineSpectrum {
    let mut s = SineSpectrum::zeros(g);
    for k in 1..=band {
        for m in 1..=band {
            let v = ((5 * m + 3 * k) % 17) as f64 / 17.0 - 0.45;
            s.set(m, k, v);
        }
    }
    s
}

#[test]
fn laplacian_inverse_identity_holds_through_node_space() {
    // Spectrum -> nodes -> spectrum -> invert -> apply -> compare: the whole
    // pipeline, not just the diagonal scaling.
    let g = grid(256);
    let s = test_spectrum(g, 100);
    let nodes = transform_inverse(&s);
    let lap = transform_inverse(&apply_laplacian(&transform_forward(&nodes)));
    let back = transform_inverse(&invert_laplacian(&transform_forward(&lap)));
    let mut worst = 0.0f64;
    for (a, b) in back.values().iter().zip(nodes.values()) {
        worst = worst.max((a - b).abs());
    }
    let scale = nodes.sup_norm();
    assert!(worst / scale < 1e-12, "relative identity error {:.3e}", worst / scale);
}

#[test]
fn laplacian_of_psi0_reproduces_the_square_wave_coefficients() {
    // Delta psi_0 = -sgn(x1) sgn(x2); its double sine coefficients are
    // -16/(pi^2 m k) for odd m, k and zero otherwise. Checking the low modes
    // of the synthesized field closes the loop psi0 -> nodes -> spectrum.
    let g = grid(512);
    let psi0 = compute_psi0(g);
    let lap = apply_laplacian(&transform_forward(&psi0));
    for k in 1..=7 {
        for m in 1..=7 {
            let expect = if m % 2 == 1 && k % 2 == 1 {
                -16.0 / (PI * PI * (m * k) as f64)
            } else {
                0.0
            };
            let got = lap.get(m, k);
            assert!(
                (got - expect).abs() < 1e-11,
                "mode ({m},{k}): got {got}, expect {expect}"
            );
        }
    }
}

#[test]
fn psi0_is_positive_and_peaks_at_the_cell_center() {
    let g = grid(128);
    let psi0 = compute_psi0(g);
    assert!(psi0.interior_min() > 0.0);
    assert_eq!(psi0.diagonal_asymmetry(), 0.0);
    let mut best = (0usize, 0usize, 0.0f64);
    for j in 1..g.n() {
        for i in 1..g.n() {
            if psi0.value(i, j) > best.2 {
                best = (i, j, psi0.value(i, j));
            }
        }
    }
    assert_eq!((best.0, best.1), (g.n() / 2, g.n() / 2), "peak at (1/4, 1/4)");
}

#[test]
fn mode_cutoff_only_trims_the_tail() {
    let g = grid(64);
    let full = psi0_spectrum(g, 64);
    let cut = psi0_spectrum(g, 9);
    for k in 1..=9 {
        for m in 1..=9 {
            assert_eq!(full.get(m, k), cut.get(m, k));
        }
    }
    assert_eq!(cut.get(11, 1), 0.0);
    assert!(full.get(11, 1) > 0.0);
}

#[test]
fn prolongation_warm_start_matches_direct_fine_synthesis() {
    // psi0 prolonged from n = 128 differs from the n = 512 synthesis only by
    // the spectral tail above mode 127, which the coefficient decay
    // 4/(pi^4 m k (m^2+k^2)) makes tiny.
    let coarse = compute_psi0(grid(128));
    let fine = compute_psi0(grid(512));
    let lifted = prolong(&coarse, 512).unwrap();
    let mut worst = 0.0f64;
    for (a, b) in lifted.values().iter().zip(fine.values()) {
        worst = worst.max((a - b).abs());
    }
    assert!(worst < 1e-6, "tail mismatch {worst:.3e}");
    assert!(worst > 0.0, "truncation must be visible, else the test is vacuous");
}

#[test]
fn green_split_is_smooth_near_coincidence() {
    // The log part absorbs the singularity: along a shrinking offset the
    // regular part must approach a finite limit with small spread.
    let x = (0.173, 0.294);
    let dir = (0.6f64, 0.8f64);
    let mut values = Vec::new();
    let mut d = 1e-2;
    while d > 0.9e-4 {
        let y = (x.0 + d * dir.0, x.1 + d * dir.1);
        values.push(torus_green(x, y, 64).unwrap().regular_part);
        d *= 0.5;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    assert!(var < 1e-3, "regular part variance {var:.3e}");
    // The total must meanwhile blow up logarithmically (sanity that the
    // split is not hiding the singularity in the wrong term).
    let near = torus_green(x, (x.0 + 1e-6, x.1), 64).unwrap();
    let far = torus_green(x, (x.0 + 1e-2, x.1), 64).unwrap();
    assert!(near.total < far.total - 1.0);
    assert_eq!(near.regular_part, near.total - near.log_part);
}

#[test]
fn green_term_count_has_converged_at_the_default() {
    let x = (0.05, 0.41);
    let y = (-0.33, 0.12);
    let a = torus_green(x, y, 48).unwrap().total;
    let b = torus_green(x, y, 96).unwrap().total;
    assert!((a - b).abs() < 1e-14, "series not converged: {:.3e}", (a - b).abs());
}

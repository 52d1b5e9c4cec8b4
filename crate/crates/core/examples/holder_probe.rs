//! Scratch probe: calibration quality of origin_holder_fit on synthetic
//! power-law ratio fields pushed through the real ratio_field pipeline.

use bcpatch_core::analysis::{origin_holder_fit, ratio_field, ratio_l2_check};
use bcpatch_core::barrier::{eval_barrier, solve_profile};
use bcpatch_core::grid::{QuarterGrid, SymmetricField};

fn main() {
    let profile = solve_profile(0.5, 2048, 1e-12).unwrap();
    let eps = 1e-2f64;
    for &n in &[512usize, 1024] {
        let grid = QuarterGrid::new(n).unwrap();
        let h = grid.h();
        let region = eps.sqrt() / (-f64::ln(eps));
        let radii: Vec<f64> = (0..40)
            .map(|k| {
                let t = k as f64 / 39.0;
                (8.0 * h) * (region / (8.0 * h)).powf(t)
            })
            .collect();
        for &gamma in &[0.1f64, 0.3, 0.5] {
            let p = profile.clone();
            let phi = SymmetricField::from_fn(grid, move |x, y| {
                let r = x.hypot(y);
                let theta = y.atan2(x);
                let bar = eval_barrier(&p, eps, (x, y)).unwrap();
                bar * (1.0 + r.powf(gamma) * (1.0 + 0.3 * (2.0 * theta).sin()))
            });
            let w = ratio_field(&phi, &profile, eps, 4.0 * h).unwrap();
            let fit = origin_holder_fit(&w, &radii).unwrap();
            println!(
                "n={n} gamma={gamma}: exponent {:.6} (err {:+.2e})  R2 {:.6}  pts {}  window [{:.3e}, {:.3e}]",
                fit.exponent,
                fit.exponent - gamma,
                fit.r_squared,
                fit.n_samples,
                fit.fit_window.0,
                fit.fit_window.1
            );
        }
        // Constant ratio: exponent must be ~0.
        let p = profile.clone();
        let phi = SymmetricField::from_fn(grid, move |x, y| {
            eval_barrier(&p, eps, (x, y)).unwrap() * 1.7
        });
        let w = ratio_field(&phi, &profile, eps, 4.0 * h).unwrap();
        let fit = origin_holder_fit(&w, &radii).unwrap();
        println!(
            "n={n} constant: exponent {:.6}  R2 {:.6}  pts {}",
            fit.exponent, fit.r_squared, fit.n_samples
        );
        let l2 = ratio_l2_check(&phi, &profile, eps).unwrap();
        println!("n={n} l2 of (1.7 barrier)/barrier squared: {l2:.8}");
    }
}

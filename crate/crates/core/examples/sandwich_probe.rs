//! Scratch probe: where does the converged solution sit relative to the
//! barrier near the origin, and what does the degenerate residual see?

use bcpatch_core::analysis::{origin_holder_fit, ratio_field, sandwich_check};
use bcpatch_core::barrier::{eval_barrier, solve_profile, AngularProfile};
use bcpatch_core::grid::SymmetricField;
use bcpatch_core::steady::{solve_steady, InitKind, SolveConfig};

fn solve(eps: f64, n: usize) -> SymmetricField {
    let report = solve_steady(&SolveConfig {
        eps,
        s: 0.5,
        n,
        omega: 0.5,
        tol: 1e-8,
        max_iter: 5000,
        init: InitKind::Psi0,
    })
    .expect("solve");
    report.field
}

fn ratio_profile(phi: &SymmetricField, p: &AngularProfile, eps: f64, theta: f64) {
    let h = phi.grid().h();
    let region = eps.sqrt() / (-eps.ln());
    println!("  theta = {theta:.3}  (region = {region:.4e}, h = {h:.4e})");
    let mut r = 2.0 * h;
    while r < 2.5 * region {
        let phi_v = phi.sample_polar(r, theta).unwrap();
        let bar_v = eval_barrier(p, eps, (r * theta.cos(), r * theta.sin())).unwrap();
        println!(
            "    r = {r:.4e} ({:6.2} h, {:5.2} region): phi/barrier = {:.6}",
            r / h,
            r / region,
            phi_v / bar_v
        );
        r *= 1.45;
    }
}

// f(w) continued to w in (-1, 0) through the same expm1/ln_1p route.
fn f_honest(w: f64, s: f64) -> f64 {
    if w.abs() <= 1e-12 {
        return 1.0 + s;
    }
    ((1.0 + s) * w.ln_1p()).exp_m1() / ((1.0 + w).powf(s) * w)
}

fn main() {
    let s = 0.5;
    let p = solve_profile(s, 2048, 1e-12).expect("profile");

    for &(eps, n) in &[(1e-2f64, 1024usize), (1e-2, 2048)] {
        println!("== eps = {eps:.1e}, n = {n} ==");
        let phi = solve(eps, n);
        ratio_profile(&phi, &p, eps, std::f64::consts::FRAC_PI_4);
        ratio_profile(&phi, &p, eps, 0.1);

        let sw = sandwich_check(&phi, &p, eps).expect("sandwich");
        println!(
            "  sandwich: lower_ok {} upper_ok {} worst_lower {:.4e} at {:?} worst_upper {:.4e}",
            sw.lower_ok, sw.upper_ok, sw.worst_lower_margin, sw.worst_lower_location, sw.worst_upper_margin
        );

        let h = phi.grid().h();
        let region = eps.sqrt() / (-eps.ln());
        let w = ratio_field(&phi, &p, eps, 8.0 * h).expect("ratio field");
        let radii: Vec<f64> = (0..40)
            .map(|k| {
                let t = k as f64 / 39.0;
                (8.0 * h) * (region / (8.0 * h)).powf(t)
            })
            .collect();
        match origin_holder_fit(&w, &radii) {
            Ok(fit) => println!(
                "  holder fit: exponent {:.4} r2 {:.4} n {} window ({:.3e}, {:.3e})",
                fit.exponent, fit.r_squared, fit.n_samples, fit.fit_window.0, fit.fit_window.1
            ),
            Err(e) => println!("  holder fit error: {e}"),
        }

        // Degenerate residual: library value, then a manual pass with the
        // honest f on negatives, tracking where the defect concentrates.
        use bcpatch_core::analysis::rescale_solution;
        let ball = rescale_solution(&phi, &p, eps).expect("rescale");
        match bcpatch_core::analysis::degenerate_residual(&ball, &p) {
            Ok(r) => println!("  degenerate residual (library): {r:.4e}"),
            Err(e) => println!("  degenerate residual error: {e}"),
        }

        let hy = ball.h();
        let m = ball.m();
        let lo = 16.0 * hy;
        let mut dev = 0.0f64;
        let mut scale = 0.0f64;
        let mut at = (0usize, 0usize);
        for j in 2..m {
            for i in 2..m {
                let r = f64::hypot(i as f64, j as f64) * hy;
                if r < lo || r > ball.window() {
                    continue;
                }
                let lam = |px: f64, py: f64| {
                    let b = eval_barrier(&p, 1.0, (px, py)).unwrap();
                    b * b
                };
                let (x, y) = (i as f64 * hy, j as f64 * hy);
                let c = ball.value(i, j);
                let lhs = (lam(x + 0.5 * hy, y) * (ball.value(i + 1, j) - c)
                    - lam(x - 0.5 * hy, y) * (c - ball.value(i - 1, j))
                    + lam(x, y + 0.5 * hy) * (ball.value(i, j + 1) - c)
                    - lam(x, y - 0.5 * hy) * (c - ball.value(i, j - 1)))
                    / (hy * hy);
                let b1 = eval_barrier(&p, 1.0, (x, y)).unwrap();
                let rhs = b1.powf(1.0 - s) * f_honest(c, s) * c;
                let d = (lhs - rhs).abs();
                if d > dev {
                    dev = d;
                    at = (i, j);
                }
                scale = scale.max(lhs.abs()).max(rhs.abs());
            }
        }
        let (i, j) = at;
        println!(
            "  degenerate residual (honest f): {:.4e}, max defect at (i,j) = ({i},{j}), r = {:.3e}, theta = {:.3}",
            dev / scale,
            f64::hypot(i as f64, j as f64) * hy,
            (j as f64).atan2(i as f64)
        );
        println!(
            "  ball: m = {m}, hy = {hy:.4e}, window = {:.4e}, w range on annulus see above",
            ball.window()
        );
    }
}

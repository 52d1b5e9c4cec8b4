//! Shared fixtures for the integration suites: an independent angular
//! profile oracle and synthetic ratio fields with known Hoelder exponents.
#![allow(dead_code)]

use bcpatch_core::barrier::{eval_barrier, AngularProfile};
use bcpatch_core::grid::{QuarterGrid, SymmetricField};
use std::f64::consts::FRAC_PI_4;

/// Endpoint series g = a t + b t^{2-s} + c t^{3-2s} used to step off the
/// singular endpoint before Runge-Kutta takes over.
fn series(a: f64, s: f64, t: f64) -> (f64, f64) {
    let d = (2.0 - s) * (1.0 - s);
    let b = -a.powf(-s) / d;
    let c = -s * a.powf(-1.0 - 2.0 * s) / (d * (3.0 - 2.0 * s) * (2.0 - 2.0 * s));
    (
        a * t + b * t.powf(2.0 - s) + c * t.powf(3.0 - 2.0 * s),
        a + (2.0 - s) * b * t.powf(1.0 - s) + (3.0 - 2.0 * s) * c * t.powf(2.0 - 2.0 * s),
    )
}

/// Integrate g'' = -beta^2 g - g^{-s} upward from one step off theta = 0
/// with fixed-step RK4, returning (g, g') at pi/4, or -inf markers if g
/// crossed zero on the way.
fn shoot(a: f64, s: f64, steps: usize) -> (f64, f64) {
    let beta = 2.0 / (1.0 + s);
    let b2 = beta * beta;
    let t0 = FRAC_PI_4 / steps as f64;
    let (mut g, mut gp) = series(a, s, t0);
    let h = (FRAC_PI_4 - t0) / steps as f64;
    let f = |g: f64| -> f64 { -b2 * g - g.powf(-s) };
    for _ in 0..steps {
        let k1g = gp;
        let k1p = f(g);
        let g2 = g + 0.5 * h * k1g;
        if g2 <= 0.0 {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        let k2g = gp + 0.5 * h * k1p;
        let k2p = f(g2);
        let g3 = g + 0.5 * h * k2g;
        if g3 <= 0.0 {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        let k3g = gp + 0.5 * h * k2p;
        let k3p = f(g3);
        let g4 = g + h * k3g;
        if g4 <= 0.0 {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        let k4g = gp + h * k3p;
        let k4p = f(g4);
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        gp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if g <= 0.0 || !g.is_finite() {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
    }
    (g, gp)
}

/// Independent profile solve: theta-space upward integration bisecting on
/// the arrival slope g'(pi/4) = 0. Deliberately a different formulation
/// from the library (which integrates downward in u = ln theta), so
/// agreement is meaningful. Returns (a, g(pi/4)).
pub fn oracle_profile(s: f64, steps: usize) -> (f64, f64) {
    // Bracket on the endpoint slope parameter a: too small crosses zero
    // before pi/4, too large arrives still rising.
    let mut lo = 0.2f64;
    while shoot(lo, s, 10_000).1 > 0.0 {
        lo /= 1.5;
    }
    let mut hi = 8.0f64;
    while shoot(hi, s, 10_000).1 < 0.0 {
        hi *= 1.5;
    }
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid, s, 10_000).1 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    // Re-expand around the coarse root so the bracket straddles the
    // fine-resolution root, then polish at full resolution.
    let center = 0.5 * (lo + hi);
    lo = center * (1.0 - 3e-5);
    hi = center * (1.0 + 3e-5);
    while shoot(lo, s, steps).1 > 0.0 {
        lo -= center * 3e-5;
    }
    while shoot(hi, s, steps).1 < 0.0 {
        hi += center * 3e-5;
    }
    for _ in 0..45 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid, s, steps).1 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    let (g_mid, _) = shoot(a, s, steps);
    (a, g_mid)
}

/// A field whose barrier ratio is exactly W(r, theta) = r^gamma *
/// (1 + 0.3 sin(2 theta)): phi = barrier * (1 + W). Used to calibrate the
/// origin Hoelder fit against known exponents.
pub fn synthetic_ratio_field(
    profile: &AngularProfile,
    eps: f64,
    gamma: f64,
    grid: QuarterGrid,
) -> SymmetricField {
    let profile = profile.clone();
    SymmetricField::from_fn(grid, move |x, y| {
        let r = x.hypot(y);
        let theta = y.atan2(x);
        let w = r.powf(gamma) * (1.0 + 0.3 * (2.0 * theta).sin());
        eval_barrier(&profile, eps, (x, y)).expect("quarter-cell point") * (1.0 + w)
    })
}

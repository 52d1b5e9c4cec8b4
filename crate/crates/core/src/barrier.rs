//! The self-similar comparison solution and its angular profile.
//!
//! The barrier has the separated form
//!
//!   psi~_eps(r, theta) = eps^{s/(1+s)} r^beta g(theta),  beta = 2/(1+s),
//!
//! where g solves the singular two-point problem
//!
//!   g'' + beta^2 g + g^{-s} = 0 on (0, pi/2),  g(0) = g(pi/2) = 0,  g > 0.
//!
//! Because beta(1+s) = 2, the field satisfies lap(psi~) = -eps^s / psi~^s
//! pointwise away from the axes, and the exact scaling
//! psi~_eps(sqrt(eps) y) = eps psi~_1(y) holds as an algebraic identity.
//!
//! The profile is found by shooting from the symmetric midpoint: integrate
//! g'' = -beta^2 g - g^{-s} from theta = pi/4 with g(pi/4) = c, g'(pi/4) = 0
//! toward the endpoint and bisect on c. Integration runs in u = ln(theta),
//! where the endpoint series g = a*theta + b*theta^{2-s} + ... becomes
//! smooth, down to theta = 1e-8; there the two-term expansion
//!
//!   g(theta) ~ a*theta - a^{-s} theta^{2-s} / ((2-s)(1-s))
//!
//! (the layer expansion, with one more correction term carried internally
//! for evaluation) matches value and slope to ~1e-12 relative, which pins
//! both the shooting mismatch and the endpoint slope a = g'(0).

use crate::error::{Error, Result};
use crate::grid::{QuarterGrid, SymmetricField};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

/// Evaluation switches to the endpoint expansion below this angle; the ODE
/// residual is certified on [THETA_CUT, pi/2 - THETA_CUT].
pub const THETA_CUT: f64 = 1e-3;

/// Shooting matches the endpoint expansion at this angle.
const THETA_TINY: f64 = 1e-8;

/// RK4 step in u = ln(theta).
const H_U: f64 = 2e-3;

/// The positive angular profile g with its endpoint slope.
///
/// `theta`/`g` sample K+1 uniform nodes on [0, pi/2]; `a` is g'(0). The
/// slopes `dg` and the certified ODE residual ride along for evaluation and
/// tests but stay out of the serialized form.
#[derive(Debug, Clone, Serialize)]
pub struct AngularProfile {
    s: f64,
    beta: f64,
    a: f64,
    theta: Vec<f64>,
    g: Vec<f64>,
    #[serde(skip)]
    dg: Vec<f64>,
    #[serde(skip)]
    midpoint: f64,
    #[serde(skip)]
    residual_sup: f64,
}

#[derive(Clone, Copy)]
struct State {
    g: f64,
    /// dG/du = theta * dg/dtheta.
    p: f64,
}

/// Right side of the first-order system in u = ln(theta):
/// G' = P, P' = P - e^{2u} (beta^2 G + G^{-s}).
#[inline]
fn rhs(u: f64, y: State, beta2: f64, s: f64) -> State {
    let theta2 = (2.0 * u).exp();
    State {
        g: y.p,
        p: y.p - theta2 * (beta2 * y.g + y.g.powf(-s)),
    }
}

/// One RK4 step of size `h` (h < 0 integrates toward theta = 0). Returns
/// None when the iterate leaves g > 0, which the caller treats as an early
/// zero crossing of the shot.
fn rk4_step(u: f64, y: State, h: f64, beta2: f64, s: f64) -> Option<State> {
    let k1 = rhs(u, y, beta2, s);
    let y2 = State {
        g: y.g + 0.5 * h * k1.g,
        p: y.p + 0.5 * h * k1.p,
    };
    if y2.g <= 0.0 {
        return None;
    }
    let k2 = rhs(u + 0.5 * h, y2, beta2, s);
    let y3 = State {
        g: y.g + 0.5 * h * k2.g,
        p: y.p + 0.5 * h * k2.p,
    };
    if y3.g <= 0.0 {
        return None;
    }
    let k3 = rhs(u + 0.5 * h, y3, beta2, s);
    let y4 = State {
        g: y.g + h * k3.g,
        p: y.p + h * k3.p,
    };
    if y4.g <= 0.0 {
        return None;
    }
    let k4 = rhs(u + h, y4, beta2, s);
    let out = State {
        g: y.g + h / 6.0 * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g),
        p: y.p + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
    };
    if out.g > 0.0 && out.g.is_finite() {
        Some(out)
    } else {
        None
    }
}

/// Integrate from (u_from, y) to u_to < u_from with steps at most H_U.
fn integrate(mut u: f64, mut y: State, u_to: f64, beta2: f64, s: f64) -> Option<State> {
    let span = u - u_to;
    let steps = (span / H_U).ceil().max(1.0) as usize;
    let h = -span / steps as f64;
    for _ in 0..steps {
        y = rk4_step(u, y, h, beta2, s)?;
        u += h;
    }
    Some(y)
}

/// Coefficients of the endpoint series g = a t + b t^{2-s} + c t^{3-2s}.
#[inline]
fn series_coeffs(a: f64, s: f64) -> (f64, f64) {
    let d = (2.0 - s) * (1.0 - s);
    let b = -a.powf(-s) / d;
    let c = -s * a.powf(-1.0 - 2.0 * s) / (d * (3.0 - 2.0 * s) * (2.0 - 2.0 * s));
    (b, c)
}

#[inline]
fn series_value(a: f64, s: f64, t: f64) -> f64 {
    let (b, c) = series_coeffs(a, s);
    a * t + b * t.powf(2.0 - s) + c * t.powf(3.0 - 2.0 * s)
}

#[inline]
fn series_slope(a: f64, s: f64, t: f64) -> f64 {
    let (b, c) = series_coeffs(a, s);
    a + (2.0 - s) * b * t.powf(1.0 - s) + (3.0 - 2.0 * s) * c * t.powf(2.0 - 2.0 * s)
}

/// Fit the endpoint slope a from g'(theta_tiny), then report the value
/// mismatch of the shot against the expansion. Positive mismatch means the
/// shot is still above the zero-hitting branch (c too large).
fn shot_mismatch(c: f64, beta2: f64, s: f64) -> f64 {
    let start = State { g: c, p: 0.0 };
    let end = match integrate(FRAC_PI_4.ln(), start, THETA_TINY.ln(), beta2, s) {
        Some(y) => y,
        // Crossed zero before reaching the matching point.
        None => return -1.0,
    };
    let gp = end.p / THETA_TINY;
    if gp <= 0.0 {
        return -1.0;
    }
    // Newton on a -> series_slope(a) = gp; the correction term is ~1e-4
    // relative at theta = 1e-8, so this converges immediately.
    let mut a = gp;
    for _ in 0..40 {
        let f = series_slope(a, s, THETA_TINY) - gp;
        let df = 1.0 - s * (2.0 - s) * series_coeffs(a, s).0 / a * THETA_TINY.powf(1.0 - s);
        let next = a - f / df;
        if !(next > 0.0) {
            return -1.0;
        }
        let done = (next - a).abs() <= 1e-15 * a;
        a = next;
        if done {
            break;
        }
    }
    end.g - series_value(a, s, THETA_TINY)
}

/// Sorted-descending master angle list with integrated (g, dg) values.
struct Dense {
    theta: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
}

impl Dense {
    /// Integrate once from pi/4, recording the state at every requested
    /// angle in (0, pi/4]. Requests are deduplicated; lookups must hit a
    /// recorded angle.
    fn build(requests: &[f64], c: f64, beta2: f64, s: f64) -> Result<Dense> {
        let mut theta: Vec<f64> = requests
            .iter()
            .copied()
            .filter(|&t| t > THETA_TINY && t <= FRAC_PI_4 * (1.0 + 1e-14))
            .collect();
        theta.push(FRAC_PI_4);
        theta.sort_by(|x, y| y.partial_cmp(x).unwrap());
        theta.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * *y);

        let mut g = Vec::with_capacity(theta.len());
        let mut dg = Vec::with_capacity(theta.len());
        let mut y = State { g: c, p: 0.0 };
        let mut u = FRAC_PI_4.ln();
        for &t in &theta {
            let u_t = t.ln();
            if u_t < u {
                y = integrate(u, y, u_t, beta2, s).ok_or_else(|| {
                    Error::Stabilization {
                        iteration: 0,
                        detail: format!("converged profile crossed zero above theta = {t}"),
                    }
                })?;
                u = u_t;
            }
            g.push(y.g);
            dg.push(y.p / t);
        }
        Ok(Dense { theta, g, dg })
    }

    fn lookup(&self, t: f64) -> (f64, f64) {
        // Descending order; find the recorded angle nearest to t.
        let pos = self
            .theta
            .partition_point(|&x| x > t)
            .min(self.theta.len() - 1);
        let pick = if pos > 0
            && (self.theta[pos - 1] - t).abs() < (self.theta[pos] - t).abs()
        {
            pos - 1
        } else {
            pos
        };
        debug_assert!(
            (self.theta[pick] - t).abs() <= 1e-10 * t.max(1e-6),
            "angle {t} was never recorded"
        );
        (self.g[pick], self.dg[pick])
    }
}

/// Sup of |g'' + beta^2 g + g^{-s}| over graded check angles covering
/// [THETA_CUT, pi/4]; the mirror half carries the same residual by symmetry.
///
/// g'' comes from a 7-point first-derivative stencil applied to the stored
/// slopes (differencing values instead would amplify ulp noise by an extra
/// 1/(h theta^2) and bury the 1e-8 target). Near the endpoint the stencil
/// runs uniformly in ln(theta), where G' = theta g' has bounded derivatives
/// and g'' = (dG'/du - G')/theta^2; near the midpoint it runs in theta.
fn certify_residual(dense: &Dense, beta2: f64, s: f64) -> f64 {
    // 6th-order central weights for f' on a uniform 7-point stencil.
    const W1: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -0.75,
        0.0,
        0.75,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];

    let mut worst = 0.0f64;

    // Log-uniform zone: check angles theta_cut .. 0.44.
    let h = LOG_ZONE_STEP;
    let lo = THETA_CUT.ln();
    let count = ((0.44f64.ln() - lo) / h).floor() as i64;
    for j in 0..=count {
        let mut dgp_u = 0.0;
        let mut g0 = 0.0;
        let mut gp0_u = 0.0;
        for (k, off) in (-3..=3).enumerate() {
            let t = (lo + (j + off) as f64 * h).exp();
            let (gv, dgv) = dense.lookup(t);
            dgp_u += W1[k] * (t * dgv);
            if off == 0 {
                g0 = gv;
                gp0_u = t * dgv;
            }
        }
        let theta = (lo + j as f64 * h).exp();
        let gpp = (dgp_u / h - gp0_u) / (theta * theta);
        worst = worst.max((gpp + beta2 * g0 + g0.powf(-s)).abs());
    }

    // Uniform zone: check angles 0.4315 .. pi/4; stencil points past pi/4
    // read the mirror slope -g'(pi/2 - theta).
    let d = MID_ZONE_STEP;
    let steps = ((FRAC_PI_4 - 0.4315) / d).floor() as i64;
    for j in 0..=steps {
        let t0 = 0.4315 + j as f64 * d;
        let mut gpp = 0.0;
        let mut g0 = 0.0;
        for (k, off) in (-3..=3).enumerate() {
            let t = t0 + off as f64 * d;
            let (gv, dgv) = if t > FRAC_PI_4 {
                let (gv, dgv) = dense.lookup(FRAC_PI_2 - t);
                (gv, -dgv)
            } else {
                dense.lookup(t)
            };
            gpp += W1[k] * dgv;
            if off == 0 {
                g0 = gv;
            }
        }
        gpp /= d;
        worst = worst.max((gpp + beta2 * g0 + g0.powf(-s)).abs());
    }

    worst
}

const LOG_ZONE_STEP: f64 = 0.02;
const MID_ZONE_STEP: f64 = 5e-4;

/// Solve the angular profile problem for exponent `s` on K+1 uniform nodes.
///
/// `tol` is the relative bisection target on the midpoint value g(pi/4)
/// (floored near machine precision); the returned profile is certified by
/// an independent finite-difference sweep of the ODE residual.
pub fn solve_profile(s: f64, k_nodes: usize, tol: f64) -> Result<AngularProfile> {
    if !(0.05..=0.95).contains(&s) {
        return Err(Error::InvalidParam(format!(
            "profile exponent s must lie in [0.05, 0.95], got {s}"
        )));
    }
    if k_nodes < 512 {
        return Err(Error::InvalidParam(format!(
            "profile needs at least 512 intervals, got {k_nodes}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParam(format!("tol must be positive, got {tol}")));
    }
    let beta = 2.0 / (1.0 + s);
    let beta2 = beta * beta;

    // Bracket the midpoint value: mismatch is increasing in c.
    let mut c_lo = 0.5;
    let mut f_lo = shot_mismatch(c_lo, beta2, s);
    let mut tries = 0;
    while f_lo > 0.0 {
        c_lo /= 1.5;
        f_lo = shot_mismatch(c_lo, beta2, s);
        tries += 1;
        if tries > 40 {
            return Err(Error::Bracket(format!(
                "no lower shooting bound found; last tried g(pi/4) = {c_lo}"
            )));
        }
    }
    let mut c_hi = c_lo.max(0.5);
    let mut f_hi = shot_mismatch(c_hi, beta2, s);
    tries = 0;
    while f_hi < 0.0 {
        c_hi *= 1.5;
        f_hi = shot_mismatch(c_hi, beta2, s);
        tries += 1;
        if tries > 40 {
            return Err(Error::Bracket(format!(
                "no upper shooting bound found; last tried g(pi/4) = {c_hi}"
            )));
        }
    }
    let _ = (f_lo, f_hi);

    let want = tol.max(4.0 * f64::EPSILON);
    for _ in 0..200 {
        if c_hi - c_lo <= want * c_hi {
            break;
        }
        let mid = 0.5 * (c_lo + c_hi);
        if shot_mismatch(mid, beta2, s) < 0.0 {
            c_lo = mid;
        } else {
            c_hi = mid;
        }
    }
    let c = 0.5 * (c_lo + c_hi);

    // Master list of every angle the assembly needs.
    let h_theta = FRAC_PI_2 / k_nodes as f64;
    let mut requests = Vec::new();
    for i in 1..=k_nodes {
        let t = i as f64 * h_theta;
        requests.push(if t > FRAC_PI_4 { FRAC_PI_2 - t } else { t });
    }
    let lo = THETA_CUT.ln() - 3.5 * LOG_ZONE_STEP;
    let mut u = 0.44f64.ln() + 3.5 * LOG_ZONE_STEP;
    while u >= lo {
        requests.push(u.exp());
        u -= LOG_ZONE_STEP;
    }
    let mut t = 0.4315 - 3.5 * MID_ZONE_STEP;
    while t <= FRAC_PI_4 + 3.5 * MID_ZONE_STEP {
        requests.push(if t > FRAC_PI_4 { FRAC_PI_2 - t } else { t });
        t += MID_ZONE_STEP;
    }
    // Snap request angles onto the stencil lattices exactly as the residual
    // sweep will recompute them.
    let mut snapped = Vec::with_capacity(requests.len());
    for i in 1..=k_nodes {
        let t = i as f64 * h_theta;
        snapped.push(if t > FRAC_PI_4 { FRAC_PI_2 - t } else { t });
    }
    let log_lo = THETA_CUT.ln();
    let count = ((0.44f64.ln() - log_lo) / LOG_ZONE_STEP).floor() as i64;
    for j in -3..=(count + 3) {
        snapped.push((log_lo + j as f64 * LOG_ZONE_STEP).exp());
    }
    let steps = ((FRAC_PI_4 - 0.4315) / MID_ZONE_STEP).floor() as i64;
    for j in -3..=(steps + 3) {
        let t = 0.4315 + j as f64 * MID_ZONE_STEP;
        snapped.push(if t > FRAC_PI_4 { FRAC_PI_2 - t } else { t });
    }

    let dense = Dense::build(&snapped, c, beta2, s)?;

    // Endpoint slope from the converged shot.
    let end = integrate(FRAC_PI_4.ln(), State { g: c, p: 0.0 }, THETA_TINY.ln(), beta2, s)
        .ok_or_else(|| Error::Bracket("converged shot crossed zero".into()))?;
    let gp = end.p / THETA_TINY;
    let mut a = gp;
    for _ in 0..40 {
        let f = series_slope(a, s, THETA_TINY) - gp;
        let df = 1.0 - s * (2.0 - s) * series_coeffs(a, s).0 / a * THETA_TINY.powf(1.0 - s);
        let next = a - f / df;
        let done = (next - a).abs() <= 1e-15 * a;
        a = next;
        if done {
            break;
        }
    }

    // Assemble the uniform output arrays.
    let mut theta = Vec::with_capacity(k_nodes + 1);
    let mut g = Vec::with_capacity(k_nodes + 1);
    let mut dg = Vec::with_capacity(k_nodes + 1);
    for i in 0..=k_nodes {
        let t = i as f64 * h_theta;
        theta.push(t);
        if i == 0 {
            g.push(0.0);
            dg.push(a);
        } else if i == k_nodes {
            g.push(0.0);
            dg.push(-a);
        } else if t <= FRAC_PI_4 {
            let (gv, dgv) = dense.lookup(t);
            g.push(gv);
            dg.push(dgv);
        } else {
            let (gv, dgv) = dense.lookup(FRAC_PI_2 - t);
            g.push(gv);
            dg.push(-dgv);
        }
    }
    if g[1..k_nodes].iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Bracket(
            "assembled profile is not positive on the open interval".into(),
        ));
    }

    let residual_sup = certify_residual(&dense, beta2, s);

    Ok(AngularProfile {
        s,
        beta,
        a,
        theta,
        g,
        dg,
        midpoint: c,
        residual_sup,
    })
}

impl AngularProfile {
    #[inline]
    pub fn s(&self) -> f64 {
        self.s
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Endpoint slope g'(0).
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    /// g(pi/4), the shooting parameter.
    #[inline]
    pub fn midpoint(&self) -> f64 {
        self.midpoint
    }

    #[inline]
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    #[inline]
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Certified sup of the ODE residual on [THETA_CUT, pi/2 - THETA_CUT].
    #[inline]
    pub fn ode_residual_sup(&self) -> f64 {
        self.residual_sup
    }

    /// g at an arbitrary angle in [0, pi/2]: the endpoint series inside the
    /// layers, cubic Hermite interpolation of the stored nodes elsewhere.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_slope(t).0
    }

    /// (g, g') at an arbitrary angle in [0, pi/2].
    pub fn eval_with_slope(&self, t: f64) -> (f64, f64) {
        debug_assert!((-1e-12..=FRAC_PI_2 + 1e-12).contains(&t));
        let t = t.clamp(0.0, FRAC_PI_2);
        // Symmetry fold: data on the upper half mirrors the lower half.
        let (tf, sign) = if t > FRAC_PI_4 {
            (FRAC_PI_2 - t, -1.0)
        } else {
            (t, 1.0)
        };
        if tf < THETA_CUT {
            return (
                series_value(self.a, self.s, tf),
                sign * series_slope(self.a, self.s, tf),
            );
        }
        let k = self.theta.len() - 1;
        let h = FRAC_PI_2 / k as f64;
        let cell = ((tf / h) as usize).min(k - 1);
        let x = (tf - self.theta[cell]) / h;
        let (g0, g1) = (self.g[cell], self.g[cell + 1]);
        let (d0, d1) = (self.dg[cell] * h, self.dg[cell + 1] * h);
        // Cubic Hermite basis on [0, 1].
        let x2 = x * x;
        let x3 = x2 * x;
        let val = g0 * (2.0 * x3 - 3.0 * x2 + 1.0)
            + d0 * (x3 - 2.0 * x2 + x)
            + g1 * (-2.0 * x3 + 3.0 * x2)
            + d1 * (x3 - x2);
        let slope = (g0 * (6.0 * x2 - 6.0 * x)
            + d0 * (3.0 * x2 - 4.0 * x + 1.0)
            + g1 * (6.0 * x - 6.0 * x2)
            + d1 * (3.0 * x2 - 2.0 * x))
            / h;
        (val, sign * slope)
    }
}

/// psi~_eps at a point of the closed quadrant (either coordinate may exceed
/// 1/2; the formula is the global self-similar form, not a torus field).
pub fn eval_barrier(profile: &AngularProfile, eps: f64, x: (f64, f64)) -> Result<f64> {
    check_barrier_args(eps, x)?;
    let r = x.0.hypot(x.1);
    if r == 0.0 {
        return Ok(0.0);
    }
    let theta = x.1.atan2(x.0);
    let amp = eps.powf(profile.s / (1.0 + profile.s));
    Ok(amp * r.powf(profile.beta) * profile.eval(theta))
}

/// Gradient of psi~_eps at a point of the open quadrant; continuous up to
/// the axes and zero at the corner (beta > 1).
pub fn eval_barrier_grad(profile: &AngularProfile, eps: f64, x: (f64, f64)) -> Result<(f64, f64)> {
    check_barrier_args(eps, x)?;
    let r = x.0.hypot(x.1);
    if r == 0.0 {
        return Ok((0.0, 0.0));
    }
    let theta = x.1.atan2(x.0);
    let (g, dg) = profile.eval_with_slope(theta);
    let amp = eps.powf(profile.s / (1.0 + profile.s)) * r.powf(profile.beta - 1.0);
    let (ct, st) = (theta.cos(), theta.sin());
    let b = profile.beta;
    Ok((amp * (b * g * ct - dg * st), amp * (b * g * st + dg * ct)))
}

fn check_barrier_args(eps: f64, x: (f64, f64)) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParam(format!("eps must be positive, got {eps}")));
    }
    if x.0 < 0.0 || x.1 < 0.0 {
        return Err(Error::Domain(format!(
            "barrier evaluation needs the closed quadrant, got ({}, {})",
            x.0, x.1
        )));
    }
    Ok(())
}

/// Sample the barrier on a quarter grid. The axes are genuinely zero; the
/// far edges x = 1/2 are pinned to zero as well because `SymmetricField`
/// carries the odd-periodic class of the solver iterates. No diagnostic
/// reads the barrier there (they use `eval_barrier` directly).
pub fn barrier_field(
    profile: &AngularProfile,
    eps: f64,
    grid: QuarterGrid,
) -> Result<SymmetricField> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParam(format!("eps must be positive, got {eps}")));
    }
    let amp = eps.powf(profile.s / (1.0 + profile.s));
    let beta = profile.beta;
    Ok(SymmetricField::from_fn(grid, |x, y| {
        let r = x.hypot(y);
        amp * r.powf(beta) * profile.eval(y.atan2(x))
    }))
}

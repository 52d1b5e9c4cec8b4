//! Randomized test-function lab for the weighted inequalities.
//!
//! Each inequality is checked on an ensemble of admissible fields over the
//! quarter square with the degenerate weight b1^2, b1 the eps = 1 barrier:
//!
//! - caccioppoli and linf_rescale quantify over nonnegative subsolutions of
//!   div(b1^2 grad w) >= 0. Random smooth fields are not subsolutions, so
//!   each trial manufactures one by solving div(b1^2 grad w) = rho >= 0
//!   directly (banded Cholesky on the face-averaged 5-point stencil) with
//!   zero data on the axes and positive data on the far edges, then
//!   certifies w >= 0 nodewise, shrinking rho on failure.
//! - sobolev_h1 / sobolev_w11 use analytic band-limited bumps compactly
//!   supported inside the quarter, with exact gradients.
//! - isoperimetric uses random smooth fields rescaled between their
//!   delta-quantiles under the weighted measure, certified by recount.
//!
//! Trial parameters are drawn from a per-trial generator seeded by
//! mix(seed, trial) before any grid quantity is touched, so the ensemble is
//! identical at every resolution and the n -> 2n stability factor compares
//! the same mathematical fields.

use crate::barrier::{eval_barrier, solve_profile, AngularProfile};
use crate::error::{Error, Result};
use crate::grid::QuarterGrid;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    Caccioppoli,
    SobolevH1,
    SobolevW11,
    Isoperimetric,
    LinfRescale,
}

impl InequalityId {
    pub const ALL: [InequalityId; 5] = [
        InequalityId::Caccioppoli,
        InequalityId::SobolevH1,
        InequalityId::SobolevW11,
        InequalityId::Isoperimetric,
        InequalityId::LinfRescale,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InequalityId::Caccioppoli => "caccioppoli",
            InequalityId::SobolevH1 => "sobolev_h1",
            InequalityId::SobolevW11 => "sobolev_w11",
            InequalityId::Isoperimetric => "isoperimetric",
            InequalityId::LinfRescale => "linf_rescale",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<InequalityId> {
        InequalityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown inequality id {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LabConfig {
    pub s: f64,
    pub trials: usize,
    pub seed: u64,
    pub grid_n: usize,
    /// Bi-partition mass fraction for the isoperimetric ensemble.
    pub delta: f64,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            s: 0.5,
            trials: 500,
            seed: 0,
            grid_n: 128,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusConstant {
    pub radius: f64,
    pub constant: f64,
}

/// Outcome of one ensemble run. `empirical_constant` is oriented so the
/// underlying inequality reads "observed ratio <= constant" for the three
/// energy inequalities and the rescaled sup bound, and "observed LHS >=
/// constant" (the empirical sigma(delta)) for the isoperimetric one.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub id: InequalityId,
    pub trials: usize,
    pub grid_n: usize,
    pub seed: u64,
    pub delta: Option<f64>,
    pub empirical_constant: f64,
    /// Aggregate over the first 10 trials rerun at 2n, divided by the same
    /// aggregate at n.
    pub stability_factor: f64,
    /// linf_rescale only: the constant at each tested ball radius.
    pub per_radius: Option<Vec<RadiusConstant>>,
}

/// SplitMix64; decouples per-trial streams from the user seed.
fn mix(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, trial as u64))
}

/// Symmetric positive definite band matrix in lower band storage:
/// entry (i, j), i >= j, i - j <= bw, lives at data[j*(bw+1) + (i-j)].
struct BandedCholesky {
    nn: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    fn factor(nn: usize, bw: usize, mut data: Vec<f64>) -> Result<BandedCholesky> {
        assert_eq!(data.len(), nn * (bw + 1));
        let w = bw + 1;
        for j in 0..nn {
            let lo = j.saturating_sub(bw);
            let mut d = data[j * w];
            for k in lo..j {
                let l = data[k * w + (j - k)];
                d -= l * l;
            }
            if !(d > 0.0) {
                return Err(Error::Stabilization {
                    iteration: j,
                    detail: format!("stencil matrix lost positive definiteness (pivot {d:.3e})"),
                });
            }
            let dj = d.sqrt();
            data[j * w] = dj;
            let hi = (j + bw).min(nn - 1);
            for i in (j + 1)..=hi {
                let mut v = data[j * w + (i - j)];
                let klo = lo.max(i.saturating_sub(bw));
                for k in klo..j {
                    v -= data[k * w + (i - k)] * data[k * w + (j - k)];
                }
                data[j * w + (i - j)] = v / dj;
            }
        }
        Ok(BandedCholesky { nn, bw, data })
    }

    fn solve(&self, b: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.nn {
            let lo = i.saturating_sub(self.bw);
            let mut v = b[i];
            for k in lo..i {
                v -= self.data[k * w + (i - k)] * b[k];
            }
            b[i] = v / self.data[i * w];
        }
        for i in (0..self.nn).rev() {
            let hi = (i + self.bw).min(self.nn - 1);
            let mut v = b[i];
            for j in (i + 1)..=hi {
                v -= self.data[i * w + (j - i)] * b[j];
            }
            b[i] = v / self.data[i * w];
        }
    }
}

/// Grid-level context shared by all trials at one resolution: the weight at
/// nodes and cell faces, the Caccioppoli cutoff, and (lazily) the factored
/// stencil.
struct LabCtx {
    n: usize,
    h: f64,
    /// b1 at nodes, (n+1)^2, i fastest.
    bar: Vec<f64>,
    /// b1^2 at x-faces ((i+1/2)h, jh): idx j*n + i.
    lam_fx: Vec<f64>,
    /// b1^2 at y-faces (ih, (j+1/2)h): idx j*(n+1) + i.
    lam_fy: Vec<f64>,
    /// Radial cutoff: 1 on r <= 1/8, 0 on r >= 1/4, quintic between.
    eta: Vec<f64>,
    /// |grad eta|^2 at nodes.
    grad_eta_sq: Vec<f64>,
    chol: Option<BandedCholesky>,
}

fn quintic_cut(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

fn quintic_cut_slope(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

impl LabCtx {
    fn new(profile: &AngularProfile, n: usize) -> Result<LabCtx> {
        let grid = QuarterGrid::new(n)?;
        let h = grid.h();
        let nn = n + 1;
        let b1 = |x: f64, y: f64| -> Result<f64> { eval_barrier(profile, 1.0, (x, y)) };

        let mut bar = Vec::with_capacity(nn * nn);
        let mut eta = Vec::with_capacity(nn * nn);
        let mut grad_eta_sq = Vec::with_capacity(nn * nn);
        for j in 0..nn {
            for i in 0..nn {
                let (x, y) = (i as f64 * h, j as f64 * h);
                bar.push(b1(x, y)?);
                let r = f64::hypot(x, y);
                let t = (r - 0.125) * 8.0;
                eta.push(quintic_cut(t));
                let slope = 8.0 * quintic_cut_slope(t);
                grad_eta_sq.push(slope * slope);
            }
        }

        let mut lam_fx = Vec::with_capacity(n * nn);
        for j in 0..nn {
            for i in 0..n {
                let b = b1((i as f64 + 0.5) * h, j as f64 * h)?;
                lam_fx.push(b * b);
            }
        }
        let mut lam_fy = Vec::with_capacity(nn * n);
        for j in 0..n {
            for i in 0..nn {
                let b = b1(i as f64 * h, (j as f64 + 0.5) * h)?;
                lam_fy.push(b * b);
            }
        }

        Ok(LabCtx {
            n,
            h,
            bar,
            lam_fx,
            lam_fy,
            eta,
            grad_eta_sq,
            chol: None,
        })
    }

    #[inline]
    fn node(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    #[inline]
    fn fx(&self, i: usize, j: usize) -> f64 {
        self.lam_fx[j * self.n + i]
    }

    #[inline]
    fn fy(&self, i: usize, j: usize) -> f64 {
        self.lam_fy[j * (self.n + 1) + i]
    }

    fn ensure_factor(&mut self) -> Result<()> {
        if self.chol.is_some() {
            return Ok(());
        }
        let n = self.n;
        let m = n - 1;
        let nn = m * m;
        let bw = m;
        let w = bw + 1;
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut data = vec![0.0; nn * w];
        for j in 1..n {
            for i in 1..n {
                let p = (j - 1) * m + (i - 1);
                let diag =
                    self.fx(i - 1, j) + self.fx(i, j) + self.fy(i, j - 1) + self.fy(i, j);
                data[p * w] = diag * inv_h2;
                if i > 1 {
                    // coupling to the left neighbor p-1
                    data[(p - 1) * w + 1] = -self.fx(i - 1, j) * inv_h2;
                }
                if j > 1 {
                    // coupling to the lower neighbor p-m
                    data[(p - m) * w + bw] = -self.fy(i, j - 1) * inv_h2;
                }
            }
        }
        self.chol = Some(BandedCholesky::factor(nn, bw, data)?);
        Ok(())
    }

    /// Discrete energy int b1^2 |grad v|^2 by face differences.
    fn energy(&self, v: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for j in 0..=n {
            for i in 0..n {
                let d = v[self.node(i + 1, j)] - v[self.node(i, j)];
                acc += self.fx(i, j) * d * d;
            }
        }
        for j in 0..n {
            for i in 0..=n {
                let d = v[self.node(i, j + 1)] - v[self.node(i, j)];
                acc += self.fy(i, j) * d * d;
            }
        }
        acc
    }

    /// Discrete total variation int b1^2 |grad v| by face differences
    /// (anisotropic: |d1 v| + |d2 v|).
    fn weighted_tv(&self, v: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for j in 0..=n {
            for i in 0..n {
                acc += self.fx(i, j) * (v[self.node(i + 1, j)] - v[self.node(i, j)]).abs();
            }
        }
        for j in 0..n {
            for i in 0..=n {
                acc += self.fy(i, j) * (v[self.node(i, j + 1)] - v[self.node(i, j)]).abs();
            }
        }
        acc * self.h
    }
}

/// Grid-independent parameters of one subsolution trial.
struct SubsolutionDraw {
    edge_amps: [f64; 4],
    rho_modes: [(f64, f64, f64, f64, f64); 3],
}

impl SubsolutionDraw {
    fn new(rng: &mut ChaCha8Rng) -> SubsolutionDraw {
        let mut edge_amps = [0.0; 4];
        for a in &mut edge_amps {
            *a = rng.gen_range(-1.0..1.0);
        }
        let mut rho_modes = [(0.0, 0.0, 0.0, 0.0, 0.0); 3];
        for m in &mut rho_modes {
            *m = (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(1..=3) as f64,
                rng.gen_range(1..=3) as f64,
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
            );
        }
        SubsolutionDraw { edge_amps, rho_modes }
    }

    /// Positive far-edge data along the path (1/2,0) -> (1/2,1/2) -> (0,1/2),
    /// parametrized by tau in [0,1]; vanishes at the axis endpoints.
    fn edge(&self, tau: f64) -> f64 {
        let mut mods = 0.0;
        for (k, a) in self.edge_amps.iter().enumerate() {
            mods += a * ((k + 1) as f64 * std::f64::consts::PI * tau).sin();
        }
        (std::f64::consts::PI * tau).sin() * (1.0 + 0.2 * mods)
    }

    /// Smooth nonnegative source (a squared trigonometric polynomial).
    fn rho(&self, x: f64, y: f64) -> f64 {
        let mut q = 0.0;
        for (c, k, l, p, r) in &self.rho_modes {
            q += c * (TAU * k * x + p).cos() * (TAU * l * y + r).cos();
        }
        q * q
    }
}

/// Solve div(b1^2 grad w) = rho with the drawn boundary data and certify
/// w >= 0 at every node, shrinking rho by 4 until the certificate holds.
fn subsolution_trial(ctx: &mut LabCtx, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let draw = SubsolutionDraw::new(rng);
    ctx.ensure_factor()?;
    let n = ctx.n;
    let m = n - 1;
    let h = ctx.h;
    let inv_h2 = 1.0 / (h * h);

    // Boundary values: zero on the axes, drawn data on the far edges.
    let mut w_full = vec![0.0; (n + 1) * (n + 1)];
    for j in 0..=n {
        let tau = j as f64 * h;
        w_full[ctx.node(n, j)] = draw.edge(tau);
    }
    for i in 0..=n {
        let tau = 1.0 - i as f64 * h;
        w_full[ctx.node(i, n)] = draw.edge(tau);
    }
    w_full[ctx.node(0, n)] = 0.0;
    w_full[ctx.node(n, 0)] = 0.0;

    let mut scale = 1e-3;
    for attempt in 0..8 {
        let mut b = vec![0.0; m * m];
        for j in 1..n {
            for i in 1..n {
                let p = (j - 1) * m + (i - 1);
                let mut v = -scale * draw.rho(i as f64 * h, j as f64 * h);
                if i == n - 1 {
                    v += ctx.fx(n - 1, j) * w_full[ctx.node(n, j)] * inv_h2;
                }
                if j == n - 1 {
                    v += ctx.fy(i, n - 1) * w_full[ctx.node(i, n)] * inv_h2;
                }
                b[p] = v;
            }
        }
        ctx.chol.as_ref().expect("factored above").solve(&mut b);

        let mut min = f64::INFINITY;
        let mut sup = 0.0f64;
        for v in &b {
            min = min.min(*v);
            sup = sup.max(v.abs());
        }
        if min >= -1e-13 * sup.max(1.0) {
            for j in 1..n {
                for i in 1..n {
                    w_full[ctx.node(i, j)] = b[(j - 1) * m + (i - 1)].max(0.0);
                }
            }
            return Ok(w_full);
        }
        scale *= 0.25;
        let _ = attempt;
    }
    Err(Error::Stabilization {
        iteration: 8,
        detail: "no nonnegative subsolution after shrinking the source 8 times".into(),
    })
}

fn caccioppoli_ratio(ctx: &mut LabCtx, rng: &mut ChaCha8Rng) -> Result<f64> {
    let w = subsolution_trial(ctx, rng)?;
    let nn = (ctx.n + 1) * (ctx.n + 1);
    let mut v = vec![0.0; nn];
    for k in 0..nn {
        v[k] = ctx.eta[k] * w[k];
    }
    let lhs = ctx.energy(&v);
    let h2 = ctx.h * ctx.h;
    let mut rhs = 0.0;
    for k in 0..nn {
        let lam = ctx.bar[k] * ctx.bar[k];
        rhs += lam * w[k] * w[k] * ctx.grad_eta_sq[k] * h2;
    }
    if !(rhs > 0.0 && rhs.is_finite() && lhs.is_finite()) {
        return Err(Error::Stabilization {
            iteration: 0,
            detail: format!("degenerate Caccioppoli trial: lhs {lhs:.3e}, rhs {rhs:.3e}"),
        });
    }
    Ok(lhs / rhs)
}

fn linf_ratios(ctx: &mut LabCtx, rng: &mut ChaCha8Rng, s: f64) -> Result<[f64; 2]> {
    let w = subsolution_trial(ctx, rng)?;
    let n = ctx.n;
    let h = ctx.h;
    let mut out = [0.0; 2];
    for (slot, radius) in [(0usize, 0.25f64), (1, 0.5)] {
        let mut inner = 0.0f64;
        let mut outer = 0.0f64;
        for j in 0..=n {
            for i in 0..=n {
                let r = f64::hypot(i as f64 * h, j as f64 * h);
                if r > radius {
                    continue;
                }
                let k = ctx.node(i, j);
                outer = outer.max((ctx.bar[k] * w[k]).abs());
                if r <= 0.5 * radius {
                    inner = inner.max(w[k].abs());
                }
            }
        }
        if !(outer > 0.0) {
            return Err(Error::Stabilization {
                iteration: 0,
                detail: "subsolution vanished on the comparison ball".into(),
            });
        }
        out[slot] = inner * radius.powf(2.0 / (1.0 + s)) / outer;
    }
    Ok(out)
}

/// Band-limited bump supported in the disc of radius 3/16 around (1/4, 1/4),
/// with exact gradient.
struct SmoothBump {
    modes: [(f64, f64, f64); 3],
}

const BUMP_CENTER: (f64, f64) = (0.25, 0.25);
const BUMP_RADIUS: f64 = 3.0 / 16.0;

impl SmoothBump {
    fn new(rng: &mut ChaCha8Rng) -> SmoothBump {
        let mut modes = [(0.0, 0.0, 0.0); 3];
        for m in &mut modes {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            *m = (
                sign * rng.gen_range(0.2..1.0),
                rng.gen_range(1..=4) as f64,
                rng.gen_range(1..=4) as f64,
            );
        }
        SmoothBump { modes }
    }

    fn eval(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let dx = x - BUMP_CENTER.0;
        let dy = y - BUMP_CENTER.1;
        let u = (dx * dx + dy * dy) / (BUMP_RADIUS * BUMP_RADIUS);
        if u >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let om = 1.0 - u;
        let cut = om * om * om;
        let dcut = -6.0 * om * om / (BUMP_RADIUS * BUMP_RADIUS);
        let mut base = 0.0;
        let mut bx = 0.0;
        let mut by = 0.0;
        for (c, k, l) in &self.modes {
            let (skx, ckx) = (TAU * k * x).sin_cos();
            let (sly, cly) = (TAU * l * y).sin_cos();
            base += c * skx * sly;
            bx += c * TAU * k * ckx * sly;
            by += c * TAU * l * skx * cly;
        }
        (
            base * cut,
            bx * cut + base * dcut * dx,
            by * cut + base * dcut * dy,
        )
    }
}

/// Nodal integrals entering both Sobolev forms:
/// (int b1^4 w^4, int b1^2 w^2, int b1^2 |grad w|^2, int b1^4 w^2, int b1^2 |grad w|).
fn sobolev_integrals(ctx: &LabCtx, bump: &SmoothBump) -> (f64, f64, f64, f64, f64) {
    let n = ctx.n;
    let h = ctx.h;
    let h2 = h * h;
    let (mut q4, mut q2, mut e2, mut m2, mut e1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..=n {
        for i in 0..=n {
            let (w, wx, wy) = bump.eval(i as f64 * h, j as f64 * h);
            let b = ctx.bar[ctx.node(i, j)];
            let lam = b * b;
            q4 += lam * lam * w * w * w * w * h2;
            q2 += lam * w * w * h2;
            e2 += lam * (wx * wx + wy * wy) * h2;
            m2 += lam * lam * w * w * h2;
            e1 += lam * f64::hypot(wx, wy) * h2;
        }
    }
    (q4, q2, e2, m2, e1)
}

fn sobolev_h1_ratio(ctx: &LabCtx, bump: &SmoothBump) -> Result<f64> {
    let (q4, q2, e2, _, _) = sobolev_integrals(ctx, bump);
    if !(q2 > 0.0 && e2 > 0.0) {
        return Err(Error::Stabilization {
            iteration: 0,
            detail: "bump trial degenerated to zero".into(),
        });
    }
    Ok(q4 / (q2 * e2))
}

fn sobolev_w11_ratio(ctx: &LabCtx, bump: &SmoothBump) -> Result<f64> {
    let (_, _, _, m2, e1) = sobolev_integrals(ctx, bump);
    if !(e1 > 0.0) {
        return Err(Error::Stabilization {
            iteration: 0,
            detail: "bump trial degenerated to zero".into(),
        });
    }
    Ok(m2.sqrt() / e1)
}

/// Grid-independent parameters of one isoperimetric trial.
struct IsoDraw {
    modes: [(f64, f64, f64, f64, f64); 4],
}

impl IsoDraw {
    fn new(rng: &mut ChaCha8Rng) -> IsoDraw {
        let mut modes = [(0.0, 0.0, 0.0, 0.0, 0.0); 4];
        for m in &mut modes {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            *m = (
                sign * rng.gen_range(0.2..1.0),
                rng.gen_range(1..=3) as f64,
                rng.gen_range(1..=3) as f64,
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
            );
        }
        IsoDraw { modes }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let mut u = 0.0;
        for (c, k, l, p, r) in &self.modes {
            u += c * (TAU * k * x + p).cos() * (TAU * l * y + r).cos();
        }
        u
    }
}

/// Weighted TV of the field rescaled between its delta-quantiles under the
/// measure b1^2 dx, with the bi-partition masses recounted as a certificate.
fn isoperimetric_lhs(ctx: &LabCtx, draw: &IsoDraw, delta: f64) -> Result<f64> {
    let n = ctx.n;
    let h = ctx.h;
    let nn = (n + 1) * (n + 1);

    let mut u = vec![0.0; nn];
    for j in 0..=n {
        for i in 0..=n {
            u[ctx.node(i, j)] = draw.eval(i as f64 * h, j as f64 * h);
        }
    }
    let mass: Vec<f64> = ctx.bar.iter().map(|b| b * b * h * h).collect();
    let total: f64 = mass.iter().sum();

    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
    let target = delta * total;
    let mut cum = 0.0;
    let mut q_lo = f64::NAN;
    for &k in &order {
        cum += mass[k];
        if cum >= target {
            q_lo = u[k];
            break;
        }
    }
    cum = 0.0;
    let mut q_hi = f64::NAN;
    for &k in order.iter().rev() {
        cum += mass[k];
        if cum >= target {
            q_hi = u[k];
            break;
        }
    }
    if !(q_hi > q_lo) {
        return Err(Error::Stabilization {
            iteration: 0,
            detail: format!("quantiles collapsed: q_lo {q_lo:.3e}, q_hi {q_hi:.3e}"),
        });
    }

    let span = q_hi - q_lo;
    let w: Vec<f64> = u
        .iter()
        .map(|&v| ((v - q_lo) / span).clamp(0.0, 1.0))
        .collect();

    // Recount certificate: both partition classes must hold >= delta mass.
    let mut low_mass = 0.0;
    let mut high_mass = 0.0;
    for k in 0..nn {
        if w[k] <= 0.0 {
            low_mass += mass[k];
        }
        if w[k] >= 1.0 {
            high_mass += mass[k];
        }
    }
    if low_mass < target * (1.0 - 1e-12) || high_mass < target * (1.0 - 1e-12) {
        return Err(Error::Stabilization {
            iteration: 0,
            detail: format!(
                "partition certificate failed: masses {low_mass:.3e}/{high_mass:.3e} vs {target:.3e}"
            ),
        });
    }
    Ok(ctx.weighted_tv(&w))
}

enum Aggregate {
    Max,
    Min,
}

impl Aggregate {
    fn fold(&self, values: &[f64]) -> f64 {
        match self {
            Aggregate::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregate::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Run one inequality's ensemble and report its empirical constant.
pub fn inequality_lab(id: InequalityId, config: &LabConfig) -> Result<InequalityReport> {
    if config.trials < 100 {
        return Err(Error::InvalidParam(format!(
            "at least 100 trials required, got {}",
            config.trials
        )));
    }
    if !(config.delta > 0.0 && config.delta < 0.5) {
        return Err(Error::InvalidParam(format!(
            "delta must lie in (0, 1/2), got {}",
            config.delta
        )));
    }
    let profile = solve_profile(config.s, 2048, 1e-12)?;
    QuarterGrid::new(config.grid_n)?;

    // Per-trial values on the base grid, then the first 10 on the doubled
    // grid for the stability factor.
    let run = |n: usize, trials: usize| -> Result<(Vec<f64>, Option<Vec<[f64; 2]>>)> {
        let mut ctx = LabCtx::new(&profile, n)?;
        let mut values = Vec::with_capacity(trials);
        let mut radii = None;
        for t in 0..trials {
            let mut rng = trial_rng(config.seed, t);
            let v = match id {
                InequalityId::Caccioppoli => caccioppoli_ratio(&mut ctx, &mut rng)?,
                InequalityId::SobolevH1 => {
                    sobolev_h1_ratio(&ctx, &SmoothBump::new(&mut rng))?
                }
                InequalityId::SobolevW11 => {
                    sobolev_w11_ratio(&ctx, &SmoothBump::new(&mut rng))?
                }
                InequalityId::Isoperimetric => {
                    isoperimetric_lhs(&ctx, &IsoDraw::new(&mut rng), config.delta)?
                }
                InequalityId::LinfRescale => {
                    let pair = linf_ratios(&mut ctx, &mut rng, config.s)?;
                    radii.get_or_insert_with(Vec::new).push(pair);
                    pair[0].max(pair[1])
                }
            };
            if !v.is_finite() {
                return Err(Error::Stabilization {
                    iteration: t,
                    detail: format!("trial produced a non-finite ratio {v}"),
                });
            }
            values.push(v);
        }
        Ok((values, radii))
    };

    let agg = match id {
        InequalityId::Isoperimetric => Aggregate::Min,
        _ => Aggregate::Max,
    };

    let (values, radii) = run(config.grid_n, config.trials)?;
    let empirical_constant = agg.fold(&values);

    let probe = config.trials.min(10);
    let (fine_values, _) = run(2 * config.grid_n, probe)?;
    let coarse_agg = agg.fold(&values[..probe]);
    let stability_factor = agg.fold(&fine_values) / coarse_agg;

    let per_radius = radii.map(|pairs| {
        let fold = |idx: usize| RadiusConstant {
            radius: if idx == 0 { 0.25 } else { 0.5 },
            constant: pairs
                .iter()
                .map(|p| p[idx])
                .fold(f64::NEG_INFINITY, f64::max),
        };
        vec![fold(0), fold(1)]
    });

    Ok(InequalityReport {
        id,
        trials: config.trials,
        grid_n: config.grid_n,
        seed: config.seed,
        delta: (id == InequalityId::Isoperimetric).then_some(config.delta),
        empirical_constant,
        stability_factor,
        per_radius,
    })
}

//! Spectral Poisson machinery for odd-odd fields, the reference stream
//! function of the four-quadrant patch, and the torus Green's function.
//!
//! In the double sine basis sin(2*pi*m*x1) sin(2*pi*k*x2) the Laplacian is
//! diagonal with eigenvalue -4*pi^2*(m^2 + k^2), so inverting it is a
//! coefficient-wise division. Modes run over 1 <= m, k <= n-1: on the grid
//! with spacing 1/(2n) the mode index n samples to identically zero, so
//! n-1 modes per direction are exactly the content of the interior nodes.
//!
//! The Green's function (mean-zero convention, so that lap G = delta - 1)
//! is evaluated by resumming its Fourier series in one variable: for
//! z = (z1, z2) reduced to the minimal image and t = |z2|,
//!
//!   G(z) = -B2(t)/2 + (1/2pi) ln|1 - q| + R(z),
//!   B2(t) = t^2 - t + 1/6,   q = exp(2 pi i (z1 + i t)),
//!   R(z)  = -(1/2pi) sum_{m >= 1} cos(2 pi m z1)/m
//!           * e^{-2 pi m t} (u_m + v_m)/(1 - v_m),
//!   u_m = e^{-2 pi m (1 - 2t)},  v_m = e^{-2 pi m}.
//!
//! The remainder terms decay at least like e^{-pi m} uniformly over the
//! fundamental domain, so a few dozen terms reach machine precision. The
//! logarithmic singularity sits entirely inside ln|1 - q| = ln(2 pi |z|)
//! + O(|z|^2), which is evaluated in a cancellation-free form.

use crate::error::{Error, Result};
use crate::grid::{QuarterGrid, SymmetricField};
use crate::transform;
use serde::Serialize;

/// Double sine coefficients of an odd-odd periodic field.
///
/// Entry (m, k) sits at `(k-1)*(n-1) + (m-1)`: the x1 mode index m runs
/// fastest, mirroring the node layout of `SymmetricField`.
#[derive(Debug, Clone)]
pub struct SineSpectrum {
    grid: QuarterGrid,
    coeffs: Vec<f64>,
}

impl SineSpectrum {
    pub fn zeros(grid: QuarterGrid) -> Self {
        let m = grid.n() - 1;
        SineSpectrum {
            grid,
            coeffs: vec![0.0; m * m],
        }
    }

    #[inline]
    pub fn grid(&self) -> QuarterGrid {
        self.grid
    }

    /// Number of modes per direction, n - 1.
    #[inline]
    pub fn modes(&self) -> usize {
        self.grid.n() - 1
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient a_{mk}; mode indices are 1-based.
    #[inline]
    pub fn get(&self, m: usize, k: usize) -> f64 {
        let mm = self.modes();
        assert!((1..=mm).contains(&m) && (1..=mm).contains(&k));
        self.coeffs[(k - 1) * mm + (m - 1)]
    }

    #[inline]
    pub fn set(&mut self, m: usize, k: usize, v: f64) {
        let mm = self.modes();
        assert!((1..=mm).contains(&m) && (1..=mm).contains(&k));
        self.coeffs[(k - 1) * mm + (m - 1)] = v;
    }

    /// Largest |a_{mk}|.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |w, c| w.max(c.abs()))
    }

    /// Average a_{mk} with a_{km}, making the diagonal swap symmetry exact.
    pub fn symmetrize(&mut self) {
        let mm = self.modes();
        for k in 0..mm {
            for m in (k + 1)..mm {
                let a = k * mm + m;
                let b = m * mm + k;
                let avg = 0.5 * (self.coeffs[a] + self.coeffs[b]);
                self.coeffs[a] = avg;
                self.coeffs[b] = avg;
            }
        }
    }
}

/// Laplacian eigenvalue on mode (m, k).
#[inline]
pub fn eigenvalue(m: usize, k: usize) -> f64 {
    transform::eigenvalue(m, k)
}

/// Exact discrete sine analysis of the interior nodes.
pub fn transform_forward(f: &SymmetricField) -> SineSpectrum {
    SineSpectrum {
        grid: f.grid(),
        coeffs: transform::forward(f.grid().n(), f.values()),
    }
}

/// Synthesis back to node values; inverse of `transform_forward`.
pub fn transform_inverse(s: &SineSpectrum) -> SymmetricField {
    let values = transform::synth(s.grid.n(), &s.coeffs);
    SymmetricField::from_values(s.grid, values)
        .expect("sine synthesis pins the boundary ring to zero")
}

/// Apply the Laplacian mode-by-mode.
pub fn apply_laplacian(s: &SineSpectrum) -> SineSpectrum {
    let mut out = s.clone();
    let mm = out.modes();
    for k in 1..=mm {
        for m in 1..=mm {
            out.coeffs[(k - 1) * mm + (m - 1)] *= transform::eigenvalue(m, k);
        }
    }
    out
}

/// Invert the Laplacian mode-by-mode (sine modes are mean-free, so the
/// inverse is unambiguous).
pub fn invert_laplacian(s: &SineSpectrum) -> SineSpectrum {
    let mut out = s.clone();
    let mm = out.modes();
    for k in 1..=mm {
        for m in 1..=mm {
            out.coeffs[(k - 1) * mm + (m - 1)] /= transform::eigenvalue(m, k);
        }
    }
    out
}

/// Spectrum of the inverse Laplacian of the four-quadrant sign pattern
/// -sgn(x1) sgn(x2): a_{mk} = 4 / (pi^4 m k (m^2 + k^2)) for odd m, k.
///
/// The square wave sgn(x) on the unit period has sine coefficients 4/(pi k)
/// for odd k, so the product data carries -16/(pi^2 m k); dividing by the
/// eigenvalue -4 pi^2 (m^2 + k^2) gives the formula. Modes are truncated to
/// min(max_mode, n-1); mode n is identically zero at the nodes, so cutting
/// there loses nothing on the grid.
pub fn psi0_spectrum(grid: QuarterGrid, max_mode: usize) -> SineSpectrum {
    let mut s = SineSpectrum::zeros(grid);
    let mm = s.modes();
    let cut = max_mode.min(mm);
    let c = 4.0 / std::f64::consts::PI.powi(4);
    for k in (1..=cut).step_by(2) {
        for m in (1..=cut).step_by(2) {
            s.set(m, k, c / ((m * k * (m * m + k * k)) as f64));
        }
    }
    s
}

/// The reference stream function: inverse Laplacian of -sgn(x1) sgn(x2),
/// synthesized from its closed-form coefficients (never from sampled sign
/// data, which would alias the jumps). Positive at every interior node and
/// exactly diagonal-symmetric.
pub fn compute_psi0(grid: QuarterGrid) -> SymmetricField {
    compute_psi0_modes(grid, grid.n())
}

/// `compute_psi0` with an explicit mode cutoff (used by the CLI).
pub fn compute_psi0_modes(grid: QuarterGrid, max_mode: usize) -> SymmetricField {
    let spectrum = psi0_spectrum(grid, max_mode);
    let mut field = transform_inverse(&spectrum);
    // The coefficients are symmetric in (m, k) by construction, but the
    // synthesis passes sweep the two directions in different orders, so the
    // node values can drift apart by a few ulps; average them back.
    field.symmetrize_diagonal();
    field
}

/// Exact spectral prolongation onto a finer grid: the sine polynomial the
/// coarse nodes determine is resampled at the fine nodes by zero-padding the
/// spectrum. Used to warm-start fine solves from converged coarse ones.
pub fn prolong(field: &SymmetricField, target_n: usize) -> Result<SymmetricField> {
    let n = field.grid().n();
    let fine_grid = QuarterGrid::new(target_n)?;
    if target_n < n {
        return Err(Error::InvalidParam(format!(
            "prolongation target {target_n} is coarser than the source {n}"
        )));
    }
    if target_n == n {
        return Ok(field.clone());
    }
    let coarse = transform_forward(field);
    let mm = coarse.modes();
    let mut fine = SineSpectrum::zeros(fine_grid);
    let fine_mm = fine.modes();
    {
        let dst = fine.coeffs_mut();
        for k in 1..=mm {
            let src_row = &coarse.coeffs[(k - 1) * mm..k * mm];
            dst[(k - 1) * fine_mm..(k - 1) * fine_mm + mm].copy_from_slice(src_row);
        }
    }
    Ok(transform_inverse(&fine))
}

/// The two-term split of the torus Green's function at a point pair.
#[derive(Debug, Clone, Serialize)]
pub struct GreenSplit {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Minimal-image distance between x and y.
    pub distance: f64,
    /// Green's function value (mean-zero convention).
    pub total: f64,
    /// (1/2pi) ln(distance): the universal singular part.
    pub log_part: f64,
    /// total - log_part, exactly; smooth as the points merge.
    pub regular_part: f64,
}

/// Reduce a coordinate difference to the minimal image in [-1/2, 1/2].
#[inline]
fn min_image(d: f64) -> f64 {
    d - d.round()
}

/// One-variable resummation of the Green's function Fourier series; see the
/// module header for the formula. `z` must already be the minimal image.
fn green_resummed(z1: f64, z2: f64, terms: usize) -> f64 {
    let pi = std::f64::consts::PI;
    // The sum is even in both coordinates; folding to the positive quadrant
    // here makes G(x, y) = G(y, x) hold bitwise, not just analytically.
    let z1 = z1.abs();
    let t = z2.abs();
    let b2 = t * t - t + 1.0 / 6.0;
    // ln|1 - q|^2 = (e^{-2 pi t} - 1)^2 + 4 e^{-2 pi t} sin^2(pi z1),
    // grouped so that no term cancels as z -> 0.
    let em = (-2.0 * pi * t).exp_m1();
    let s = (pi * z1).sin();
    let log_term = 0.5 * (em * em + 4.0 * (1.0 + em) * s * s).ln();

    let mut remainder = 0.0;
    for m in 1..=terms {
        let mf = m as f64;
        let v = (-2.0 * pi * mf).exp();
        let u = (-2.0 * pi * mf * (1.0 - 2.0 * t)).exp();
        let decay = (-2.0 * pi * mf * t).exp();
        let term = (2.0 * pi * mf * z1).cos() / mf * decay * (u + v) / (1.0 - v);
        remainder += term;
        // Term bound: (u + v) decay <= 2 e^{-pi m} for t <= 1/2.
        if 2.0 * (-pi * mf).exp() < 1e-18 {
            break;
        }
    }

    -0.5 * b2 + (log_term - remainder) / (2.0 * pi)
}

/// Evaluate the mean-zero torus Green's function and its log/regular split
/// at a pair of points. `terms` caps the resummed tail; 48 is already far
/// past machine precision and is what the CLI passes by default.
pub fn torus_green(x: (f64, f64), y: (f64, f64), terms: usize) -> Result<GreenSplit> {
    if terms == 0 {
        return Err(Error::InvalidParam("terms must be >= 1".into()));
    }
    let z1 = min_image(x.0 - y.0);
    let z2 = min_image(x.1 - y.1);
    let distance = z1.hypot(z2);
    if distance == 0.0 {
        return Err(Error::Domain(
            "Green's function is singular at coincident points".into(),
        ));
    }
    // The resummation treats the two coordinates asymmetrically; averaging
    // both orders restores the exact swap symmetry to the last bit.
    let total = 0.5 * (green_resummed(z1, z2, terms) + green_resummed(z2, z1, terms));
    let log_part = distance.ln() / (2.0 * std::f64::consts::PI);
    Ok(GreenSplit {
        x: [x.0, x.1],
        y: [y.0, y.1],
        distance,
        total,
        log_part,
        regular_part: total - log_part,
    })
}

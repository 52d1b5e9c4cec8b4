//! Quarter-cell grid and the symmetric fields that live on it.
//!
//! The torus is the unit square [-1/2, 1/2]^2 with opposite sides glued. All
//! fields of interest are odd under reflection across either axis and
//! symmetric under the diagonal swap, so one quarter cell [0, 1/2]^2
//! determines the whole torus. A `QuarterGrid` with `n` cells per side
//! carries `(n+1)^2` nodes at spacing `h = 1/(2n)`; the full torus grid has
//! `2n` cells per side.
//!
//! `SymmetricField` stores the quarter-cell samples of an odd-odd function:
//! the axes (`i = 0`, `j = 0`) and the far edges (`i = n`, `j = n`) are
//! pinned to exactly 0.0, which is what odd periodicity forces at x = 0 and
//! x = 1/2. `GridFunction` holds derived quantities (gradient components)
//! that carry their own reflection parities instead.

use crate::error::{Error, Result};
use crate::interp;
use crate::transform;
use rayon::prelude::*;

/// Reflection behaviour of a sampled function across x = 0 and x = 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// f(-x) = -f(x); forces zeros on the reflection lines.
    Odd,
    /// f(-x) = f(x).
    Even,
}

impl Parity {
    #[inline]
    pub(crate) fn sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        }
    }
}

/// Uniform grid on the quarter cell [0, 1/2]^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuarterGrid {
    n: usize,
}

impl QuarterGrid {
    /// `n` is the number of cells per side and must be a power of two >= 8
    /// so that the sine transform sizes stay highly composite and the
    /// refinement tests can halve/double freely.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParam(format!(
                "grid cells per side must be a power of two >= 8, got {n}"
            )));
        }
        Ok(QuarterGrid { n })
    }

    /// Cells per side of the quarter cell.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing h = 1/(2n).
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / (2.0 * self.n as f64)
    }

    /// Nodes per side, n + 1.
    #[inline]
    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    /// Coordinate of node index i.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    /// Euclidean distance of node (i, j) from the corner singularity at 0.
    #[inline]
    pub fn radius(&self, i: usize, j: usize) -> f64 {
        let h = self.h();
        (i as f64).hypot(j as f64) * h
    }

    /// Linear index of node (i, j); i runs fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }
}

/// Samples of an odd-odd, diagonal-symmetric function on a `QuarterGrid`.
#[derive(Debug, Clone)]
pub struct SymmetricField {
    grid: QuarterGrid,
    values: Vec<f64>,
}

impl SymmetricField {
    /// The all-zero field.
    pub fn zeros(grid: QuarterGrid) -> Self {
        SymmetricField {
            grid,
            values: vec![0.0; grid.nodes() * grid.nodes()],
        }
    }

    /// Sample `f(x1, x2)` at interior nodes; the axes and far edges are
    /// pinned to zero regardless of `f`, preserving the class invariant.
    pub fn from_fn(grid: QuarterGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let mut field = SymmetricField::zeros(grid);
        let n = grid.n();
        let nn = grid.nodes();
        // Row-parallel sampling: each row is written by exactly one task and
        // no reduction is involved, so the result is identical for any
        // thread count.
        field
            .values
            .par_chunks_mut(nn)
            .enumerate()
            .skip(1)
            .take(n - 1)
            .for_each(|(j, row)| {
                let y = grid.coord(j);
                for (i, slot) in row.iter_mut().enumerate().skip(1).take(n - 1) {
                    *slot = f(grid.coord(i), y);
                }
            });
        field
    }

    /// Adopt raw node values (layout: i fastest). Fails unless the boundary
    /// ring is exactly zero, so files and foreign buffers cannot smuggle in
    /// data that violates odd periodicity.
    pub fn from_values(grid: QuarterGrid, values: Vec<f64>) -> Result<Self> {
        let nn = grid.nodes();
        if values.len() != nn * nn {
            return Err(Error::InvalidParam(format!(
                "expected {} node values, got {}",
                nn * nn,
                values.len()
            )));
        }
        let n = grid.n();
        for k in 0..=n {
            for (i, j) in [(k, 0), (0, k), (k, n), (n, k)] {
                let v = values[grid.idx(i, j)];
                if v != 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "boundary node ({i}, {j}) must be exactly 0, got {v}"
                    )));
                }
            }
        }
        Ok(SymmetricField { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> QuarterGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Mutable interior access for solvers. Boundary nodes stay untouched by
    /// convention; callers must not break the zero ring.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Supremum norm over all nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Minimum over interior nodes (the boundary is identically zero).
    pub fn interior_min(&self) -> f64 {
        let n = self.grid.n();
        let mut m = f64::INFINITY;
        for j in 1..n {
            for i in 1..n {
                m = m.min(self.values[self.grid.idx(i, j)]);
            }
        }
        m
    }

    /// Largest deviation |f(i,j) - f(j,i)| from diagonal symmetry.
    pub fn diagonal_asymmetry(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for j in 1..n {
            for i in (j + 1)..n {
                let d = (self.values[self.grid.idx(i, j)] - self.values[self.grid.idx(j, i)]).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Average the field with its diagonal transpose, making f(i,j) = f(j,i)
    /// exact at the bit level.
    pub fn symmetrize_diagonal(&mut self) {
        let n = self.grid.n();
        for j in 1..n {
            for i in (j + 1)..n {
                let a = self.grid.idx(i, j);
                let b = self.grid.idx(j, i);
                let avg = 0.5 * (self.values[a] + self.values[b]);
                self.values[a] = avg;
                self.values[b] = avg;
            }
        }
    }

    /// Odd-odd extension to the full (2n)x(2n) torus grid over [0, 1)^2
    /// (equivalently [-1/2, 1/2)^2 modulo 1); index i maps to x = i*h.
    pub fn extend_to_torus(&self) -> Vec<f64> {
        let n = self.grid.n();
        let m = 2 * n;
        let mut full = vec![0.0; m * m];
        for j in 0..m {
            let (ja, sj) = fold_index(j, n);
            for i in 0..m {
                let (ia, si) = fold_index(i, n);
                full[j * m + i] = si * sj * self.values[self.grid.idx(ia, ja)];
            }
        }
        full
    }

    /// Inverse of `extend_to_torus` restricted to the quarter cell. Round
    /// trips exactly because extension only copies (with signs) node values.
    pub fn restrict_from_torus(grid: QuarterGrid, full: &[f64]) -> Result<Self> {
        let n = grid.n();
        let m = 2 * n;
        if full.len() != m * m {
            return Err(Error::InvalidParam(format!(
                "expected {} torus values, got {}",
                m * m,
                full.len()
            )));
        }
        let mut values = vec![0.0; grid.nodes() * grid.nodes()];
        for j in 0..=n {
            for i in 0..=n {
                // Far edges fold onto themselves with odd sign, so they are
                // zero in any valid extension; copy interior + axes directly.
                let v = if i == n || j == n {
                    0.0
                } else {
                    full[j * m + i]
                };
                values[grid.idx(i, j)] = v;
            }
        }
        SymmetricField::from_values(grid, values)
    }

    /// Composite trapezoid quadrature of weight(x) * |f(x)|^p over the
    /// quarter cell. Boundary nodes carry half weights per direction.
    pub fn weighted_integral(&self, weight: &GridFunction, p: f64) -> Result<f64> {
        if weight.grid() != self.grid {
            return Err(Error::InvalidParam(format!(
                "weight grid (n = {}) does not match field grid (n = {})",
                weight.grid().n(),
                self.grid.n()
            )));
        }
        let n = self.grid.n();
        let h = self.grid.h();
        let mut total = 0.0;
        for j in 0..=n {
            let cj = if j == 0 || j == n { 0.5 } else { 1.0 };
            let mut row = 0.0;
            for i in 0..=n {
                let ci = if i == 0 || i == n { 0.5 } else { 1.0 };
                let f = self.values[self.grid.idx(i, j)];
                row += ci * weight.value(i, j) * f.abs().powf(p);
            }
            total += cj * row;
        }
        Ok(total * h * h)
    }

    /// Bicubic sample at polar coordinates (r, theta) around the corner.
    ///
    /// Exact for node-sampled polynomials of degree <= 3 per axis and
    /// O(h^4) for smooth data. The point must stay inside the closed cell:
    /// r * max(cos theta, sin theta) <= 1/2 with theta in [0, pi/2].
    pub fn sample_polar(&self, r: f64, theta: f64) -> Result<f64> {
        let (x, y) = polar_point(r, theta)?;
        Ok(interp::bicubic(
            &self.values,
            self.grid,
            (Parity::Odd, Parity::Odd),
            x,
            y,
        ))
    }

    /// Bicubic sample at Cartesian coordinates; any point on the torus is
    /// valid because the odd-odd extension covers the whole plane.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        interp::bicubic(&self.values, self.grid, (Parity::Odd, Parity::Odd), x, y)
    }

    /// Spectral gradient (d1 f, d2 f), sampled on the same grid.
    ///
    /// Differentiation happens in the double sine basis, so d1 f comes back
    /// even across x1 = 0 and odd across x2 = 0, and vice versa. The
    /// components therefore return as `GridFunction`s with those parities.
    pub fn gradient(&self) -> (GridFunction, GridFunction) {
        let coeffs = transform::forward(self.grid.n(), &self.values);
        let gx = transform::synth_dx(self.grid.n(), &coeffs);
        let gy = transform::synth_dy(self.grid.n(), &coeffs);
        (
            GridFunction::new(self.grid, gx, (Parity::Even, Parity::Odd)),
            GridFunction::new(self.grid, gy, (Parity::Odd, Parity::Even)),
        )
    }
}

/// Fold a full-torus index into the quarter cell, returning the quarter
/// index and the odd-reflection sign.
#[inline]
fn fold_index(i: usize, n: usize) -> (usize, f64) {
    if i <= n {
        (i, 1.0)
    } else {
        (2 * n - i, -1.0)
    }
}

/// Cartesian point of a polar sample, validated against the cell bounds.
pub(crate) fn polar_point(r: f64, theta: f64) -> Result<(f64, f64)> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) || r < 0.0 {
        return Err(Error::Domain(format!(
            "polar sample requires r >= 0 and theta in [0, pi/2], got r={r}, theta={theta}"
        )));
    }
    let (x, y) = (r * theta.cos(), r * theta.sin());
    if r * theta.cos().max(theta.sin()) > 0.5 + 1e-15 {
        return Err(Error::Domain(format!(
            "polar sample (r={r}, theta={theta}) leaves the cell [0, 1/2]^2"
        )));
    }
    Ok((x, y))
}

/// Node samples of a derived quantity with explicit reflection parities.
///
/// Unlike `SymmetricField` there is no zero-boundary invariant: an even
/// direction is generically nonzero on its reflection line.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: QuarterGrid,
    values: Vec<f64>,
    parity: (Parity, Parity),
}

impl GridFunction {
    pub fn new(grid: QuarterGrid, values: Vec<f64>, parity: (Parity, Parity)) -> Self {
        assert_eq!(values.len(), grid.nodes() * grid.nodes());
        GridFunction {
            grid,
            values,
            parity,
        }
    }

    /// Sample `f(x1, x2)` at every node (boundary included).
    pub fn from_fn(grid: QuarterGrid, parity: (Parity, Parity), f: impl Fn(f64, f64) -> f64) -> Self {
        let nn = grid.nodes();
        let mut values = vec![0.0; nn * nn];
        for j in 0..nn {
            let y = grid.coord(j);
            for i in 0..nn {
                values[j * nn + i] = f(grid.coord(i), y);
            }
        }
        GridFunction {
            grid,
            values,
            parity,
        }
    }

    #[inline]
    pub fn grid(&self) -> QuarterGrid {
        self.grid
    }

    #[inline]
    pub fn parity(&self) -> (Parity, Parity) {
        self.parity
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Bicubic sample anywhere on the torus using the parity extension.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        interp::bicubic(&self.values, self.grid, self.parity, x, y)
    }

    /// Bicubic sample at polar coordinates, with the same cell bounds as
    /// `SymmetricField::sample_polar`.
    pub fn sample_polar(&self, r: f64, theta: f64) -> Result<f64> {
        let (x, y) = polar_point(r, theta)?;
        Ok(self.sample(x, y))
    }
}

//! Numerical workbench for singular steady states of the 2D Euler equations
//! on the flat torus.
//!
//! The objects here live on [-1/2, 1/2]^2 with periodic identification and
//! are odd in each coordinate and symmetric across the diagonal, so every
//! field is stored on the closed quarter square [0, 1/2]^2 and extended by
//! parity when the rest of the torus is needed.
//!
//! Module map:
//! - [`grid`]: quarter-grid storage, symmetry folds, quadrature, sampling.
//! - [`poisson`]: double-sine spectral Laplacian inverse, the reference
//!   stream function of the four-quadrant vortex patch, and the torus
//!   Green's function.
//! - [`barrier`]: the self-similar comparison solution `eps^{s/(1+s)} r^beta
//!   g(theta)` and its angular profile ODE.
//! - [`steady`]: damped fixed-point solver for `lap(phi) = G_eps(phi)` and
//!   residual/steadiness certification.
//! - [`analysis`]: Hoelder fits, sandwich and ratio diagnostics, degenerate
//!   ellipticity residuals, convergence sweeps, and the randomized
//!   inequality lab.
//! - [`field_io`]: binary field snapshots with JSON sidecars.

pub mod analysis;
pub mod barrier;
pub mod error;
pub mod field_io;
pub mod grid;
mod interp;
pub mod poisson;
pub mod steady;
mod transform;

pub use error::{Error, Result};

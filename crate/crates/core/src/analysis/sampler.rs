//! Point evaluators with gradients, shared by every Hölder-type diagnostic.
//!
//! The estimators need (value, gradient) anywhere on the torus for three
//! kinds of object: a spectral field (bicubic over the nodal data and the
//! two spectrally differentiated gradient grids), the analytic barrier
//! extended odd-odd to the full square, and signed combinations of those
//! (the convergence sweep measures phi - barrier - psi_0, which is not
//! itself band-limited, so the combination must happen at sample time).

use crate::barrier::{eval_barrier, eval_barrier_grad, AngularProfile};
use crate::grid::SymmetricField;

pub trait C1Sampler {
    fn value(&self, x: f64, y: f64) -> f64;
    fn grad(&self, x: f64, y: f64) -> (f64, f64);
    /// Grid spacing underlying the sampler; pair distances below a few of
    /// these carry no information.
    fn min_scale(&self) -> f64;
}

/// Bicubic evaluator over a symmetric field and its spectral gradient.
pub struct SpectralSampler {
    field: SymmetricField,
    gx: crate::grid::GridFunction,
    gy: crate::grid::GridFunction,
}

impl SpectralSampler {
    pub fn new(field: &SymmetricField) -> SpectralSampler {
        let (gx, gy) = field.gradient();
        SpectralSampler {
            field: field.clone(),
            gx,
            gy,
        }
    }
}

impl C1Sampler for SpectralSampler {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.field.sample(x, y)
    }

    fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        (self.gx.sample(x, y), self.gy.sample(x, y))
    }

    fn min_scale(&self) -> f64 {
        self.field.grid().h()
    }
}

/// The self-similar barrier as an odd-odd function of the full square:
/// sgn(x) sgn(y) psi~(|x|, |y|). Not periodic, but the square covers the
/// fundamental domain the norms are taken over.
pub struct BarrierSampler {
    profile: AngularProfile,
    eps: f64,
    scale: f64,
}

impl BarrierSampler {
    /// `scale` should match the grid spacing of the fields this sampler is
    /// combined with.
    pub fn new(profile: AngularProfile, eps: f64, scale: f64) -> BarrierSampler {
        BarrierSampler {
            profile,
            eps,
            scale,
        }
    }
}

impl C1Sampler for BarrierSampler {
    fn value(&self, x: f64, y: f64) -> f64 {
        let sgn = if x == 0.0 || y == 0.0 {
            return 0.0;
        } else {
            x.signum() * y.signum()
        };
        sgn * eval_barrier(&self.profile, self.eps, (x.abs(), y.abs()))
            .expect("folded point lies in the quadrant")
    }

    fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        // d1[sgn(x)sgn(y) psi(|x|,|y|)] = sgn(y) psi_1(|x|,|y|), even in x;
        // symmetrically for d2. Finite on the axes (beta > 1).
        let (px, py) = eval_barrier_grad(&self.profile, self.eps, (x.abs(), y.abs()))
            .expect("folded point lies in the quadrant");
        let sx = if x == 0.0 { 1.0 } else { x.signum() };
        let sy = if y == 0.0 { 1.0 } else { y.signum() };
        (sy * px, sx * py)
    }

    fn min_scale(&self) -> f64 {
        self.scale
    }
}

/// Signed combination of samplers evaluated point by point.
pub struct ComboSampler<'a> {
    parts: Vec<(f64, &'a dyn C1Sampler)>,
}

impl<'a> ComboSampler<'a> {
    pub fn new(parts: Vec<(f64, &'a dyn C1Sampler)>) -> ComboSampler<'a> {
        assert!(!parts.is_empty());
        ComboSampler { parts }
    }
}

impl C1Sampler for ComboSampler<'_> {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.parts.iter().map(|(c, s)| c * s.value(x, y)).sum()
    }

    fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (c, s) in &self.parts {
            let (a, b) = s.grad(x, y);
            gx += c * a;
            gy += c * b;
        }
        (gx, gy)
    }

    fn min_scale(&self) -> f64 {
        self.parts
            .iter()
            .map(|(_, s)| s.min_scale())
            .fold(0.0, f64::max)
    }
}

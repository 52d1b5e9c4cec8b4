//! Quantitative diagnostics for converged fields: the barrier ratio and its
//! origin Hölder bound, the corner sandwich, Monte Carlo C^{1,alpha} norms
//! and the small-eps convergence sweep, the degenerate-equation residual
//! and scaling check, and the weighted-inequality lab.

mod degenerate;
mod holder;
mod lab;
mod ratio;
mod sampler;
mod sweep;

pub use degenerate::{
    degenerate_f, degenerate_residual, rescale_solution, scaling_invariance_check, BallField,
};
pub use holder::{c1alpha_seminorm, origin_holder_fit, HolderEstimate};
pub use lab::{inequality_lab, InequalityId, InequalityReport, LabConfig};
pub use ratio::{ratio_field, ratio_l2_check, sandwich_check, RatioField, SandwichReport};
pub use sampler::{BarrierSampler, C1Sampler, ComboSampler, SpectralSampler};
pub use sweep::{convergence_sweep, SweepConfig, SweepRow, SweepTable};

/// The limit Hölder index (1-s)/(1+s) of the gradient.
#[inline]
pub fn alpha_s(s: f64) -> f64 {
    (1.0 - s) / (1.0 + s)
}

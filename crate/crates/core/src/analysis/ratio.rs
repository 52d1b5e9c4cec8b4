//! The solution-to-barrier ratio and the near-origin comparison checks.
//!
//! The objects here all live on the comparison region |x| <= sqrt(eps)/(-ln eps)
//! where the barrier is known to pinch the solution from below and the patch
//! level eps pinches it from above. The ratio field stores phi/barrier - 1 at
//! nodes, but keeps private copies of the solution and the angular profile so
//! off-node sampling can divide a bicubic value of phi by the exact barrier
//! value instead of interpolating through masked nodes.

use crate::barrier::{eval_barrier, AngularProfile};
use crate::error::{Error, Result};
use crate::grid::{polar_point, QuarterGrid, SymmetricField};
use serde::Serialize;

/// phi/barrier - 1 on the quarter grid, masked on the axes and inside r_min.
#[derive(Debug, Clone)]
pub struct RatioField {
    grid: QuarterGrid,
    w: Vec<f64>,
    mask: Vec<bool>,
    r_min: f64,
    eps: f64,
    phi: SymmetricField,
    profile: AngularProfile,
}

impl RatioField {
    pub fn grid(&self) -> QuarterGrid {
        self.grid
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Nodal ratio values; entries where `mask()` is false hold 0 and carry
    /// no information.
    pub fn values(&self) -> &[f64] {
        &self.w
    }

    /// True at nodes where the ratio is defined (off the axes, r >= r_min).
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Nodal value at (i, j); None where masked.
    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        let idx = j * self.grid.nodes() + i;
        self.mask[idx].then(|| self.w[idx])
    }

    /// Minimum of the ratio over unmasked nodes with |x| inside the
    /// comparison region; None if the region holds no unmasked node.
    pub fn min_on_region(&self) -> Option<f64> {
        let region = self.eps.sqrt() / (-self.eps.ln());
        let h = self.grid.h();
        let nodes = self.grid.nodes();
        let mut best: Option<f64> = None;
        for j in 0..nodes {
            for i in 0..nodes {
                let idx = j * nodes + i;
                if !self.mask[idx] {
                    continue;
                }
                let r = f64::hypot(i as f64 * h, j as f64 * h);
                if r <= region {
                    best = Some(best.map_or(self.w[idx], |b: f64| b.min(self.w[idx])));
                }
            }
        }
        best
    }

    /// Off-node sample of the ratio at polar coordinates: bicubic value of
    /// phi divided by the exact barrier value.
    pub fn sample_polar(&self, r: f64, theta: f64) -> Result<f64> {
        if r < self.r_min {
            return Err(Error::Domain(format!(
                "ratio sample at r = {r:.3e} inside the masked disc r < {:.3e}",
                self.r_min
            )));
        }
        let (x, y) = polar_point(r, theta)?;
        if x.min(y) < 0.25 * self.grid.h() {
            return Err(Error::Domain(
                "ratio sample too close to an axis where the barrier vanishes".into(),
            ));
        }
        let denom = eval_barrier(&self.profile, self.eps, (x, y))?;
        Ok(self.phi.sample(x, y) / denom - 1.0)
    }
}

/// Per-inequality summary of the near-origin pinching of phi between the
/// barrier and the patch level.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub region_radius: f64,
    pub nodes_checked: usize,
    pub tolerance: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// min over checked nodes of phi - barrier and its location.
    pub worst_lower_margin: f64,
    pub worst_lower_location: (f64, f64),
    /// min over checked nodes of eps - phi and its location.
    pub worst_upper_margin: f64,
    pub worst_upper_location: (f64, f64),
}

/// Check barrier <= phi <= eps at every node with |x| <= sqrt(eps)/(-ln eps).
///
/// Margins within -1e-8*eps of zero count as holding; the region must span
/// at least 20 grid cells from the origin to be meaningful.
pub fn sandwich_check(
    phi: &SymmetricField,
    profile: &AngularProfile,
    eps: f64,
) -> Result<SandwichReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParam(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let grid = phi.grid();
    let h = grid.h();
    let region = eps.sqrt() / (-eps.ln());
    if region < 20.0 * h {
        return Err(Error::Resolution(format!(
            "comparison region {region:.3e} spans fewer than 20 cells at h = {h:.3e}"
        )));
    }
    let tolerance = 1e-8 * eps;

    let mut nodes_checked = 0usize;
    let mut worst_lower = f64::INFINITY;
    let mut worst_lower_at = (0.0, 0.0);
    let mut worst_upper = f64::INFINITY;
    let mut worst_upper_at = (0.0, 0.0);

    let nodes = grid.nodes();
    for j in 0..nodes {
        let y = j as f64 * h;
        if y > region {
            break;
        }
        for i in 0..nodes {
            let x = i as f64 * h;
            if f64::hypot(x, y) > region {
                break;
            }
            let p = phi.value(i, j);
            let lower = p - eval_barrier(profile, eps, (x, y))?;
            let upper = eps - p;
            nodes_checked += 1;
            if lower < worst_lower {
                worst_lower = lower;
                worst_lower_at = (x, y);
            }
            if upper < worst_upper {
                worst_upper = upper;
                worst_upper_at = (x, y);
            }
        }
    }

    Ok(SandwichReport {
        region_radius: region,
        nodes_checked,
        tolerance,
        lower_ok: worst_lower >= -tolerance,
        upper_ok: worst_upper >= -tolerance,
        worst_lower_margin: worst_lower,
        worst_lower_location: worst_lower_at,
        worst_upper_margin: worst_upper,
        worst_upper_location: worst_upper_at,
    })
}

/// Build the nodal ratio field phi/barrier - 1, masked on the axes and
/// inside r < r_min. Requires r_min >= 4h so the barrier denominator is
/// bounded away from zero at every unmasked node.
pub fn ratio_field(
    phi: &SymmetricField,
    profile: &AngularProfile,
    eps: f64,
    r_min: f64,
) -> Result<RatioField> {
    let grid = phi.grid();
    let h = grid.h();
    if !(r_min >= 4.0 * h) {
        return Err(Error::InvalidParam(format!(
            "r_min = {r_min:.3e} must be at least 4h = {:.3e}",
            4.0 * h
        )));
    }
    let nodes = grid.nodes();
    let n = grid.n();
    let mut w = vec![0.0; nodes * nodes];
    let mut mask = vec![false; nodes * nodes];
    for j in 1..n {
        let y = j as f64 * h;
        for i in 1..n {
            let x = i as f64 * h;
            if f64::hypot(x, y) < r_min {
                continue;
            }
            let denom = eval_barrier(profile, eps, (x, y))?;
            let idx = j * nodes + i;
            w[idx] = phi.value(i, j) / denom - 1.0;
            mask[idx] = true;
        }
    }
    Ok(RatioField {
        grid,
        w,
        mask,
        r_min,
        eps,
        phi: phi.clone(),
        profile: profile.clone(),
    })
}

/// Quarter-domain quadrature of (phi/barrier)^2.
///
/// Nodes with r >= 4h contribute h^2 each; the excluded disc r < 4h is
/// covered by the analytic envelope C^2 r^(-2(1-s)/(1+s)), integrable in
/// two dimensions, with C^2 calibrated on the ring 4h <= r < 8h.
pub fn ratio_l2_check(phi: &SymmetricField, profile: &AngularProfile, eps: f64) -> Result<f64> {
    let grid = phi.grid();
    let h = grid.h();
    let n = grid.n();
    let cut = 4.0 * h;
    let gamma = (1.0 - profile.s()) / (1.0 + profile.s());

    let mut quad = 0.0;
    let mut c2 = 0.0f64;
    for j in 1..n {
        let y = j as f64 * h;
        for i in 1..n {
            let x = i as f64 * h;
            let r = f64::hypot(x, y);
            let ratio = phi.value(i, j) / eval_barrier(profile, eps, (x, y))?;
            let sq = ratio * ratio;
            if r >= cut {
                quad += sq;
                if r < 2.0 * cut {
                    c2 = c2.max(sq * r.powf(2.0 * gamma));
                }
            }
        }
    }
    quad *= h * h;
    let tail_exponent = 2.0 - 2.0 * gamma;
    let tail = std::f64::consts::FRAC_PI_2 * c2 * cut.powf(tail_exponent) / tail_exponent;
    Ok(quad + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::{barrier_field, solve_profile};
    use crate::poisson::compute_psi0;

    fn profile() -> AngularProfile {
        solve_profile(0.5, 512, 1e-10).expect("profile")
    }

    #[test]
    fn ratio_of_barrier_with_itself_vanishes() {
        let p = profile();
        let grid = QuarterGrid::new(64).unwrap();
        let eps = 1e-2;
        let field = barrier_field(&p, eps, grid).unwrap();
        let w = ratio_field(&field, &p, eps, 4.0 * grid.h()).unwrap();
        let mut seen = 0;
        for (idx, &m) in w.mask().iter().enumerate() {
            if m {
                assert_eq!(w.values()[idx], 0.0, "node {idx}");
                seen += 1;
            }
        }
        assert!(seen > 1000, "mask covered only {seen} nodes");

        // Doubling phi shifts the ratio to exactly 1 at every unmasked node.
        let doubled = SymmetricField::from_values(
            grid,
            field.values().iter().map(|v| 2.0 * v).collect(),
        )
        .unwrap();
        let w2 = ratio_field(&doubled, &p, eps, 4.0 * grid.h()).unwrap();
        for (idx, &m) in w2.mask().iter().enumerate() {
            if m {
                assert!((w2.values()[idx] - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn ratio_rejects_small_r_min_and_masks_axes() {
        let p = profile();
        let grid = QuarterGrid::new(32).unwrap();
        let field = barrier_field(&p, 1e-2, grid).unwrap();
        assert!(matches!(
            ratio_field(&field, &p, 1e-2, grid.h()),
            Err(Error::InvalidParam(_))
        ));
        let w = ratio_field(&field, &p, 1e-2, 4.0 * grid.h()).unwrap();
        let nodes = grid.nodes();
        for k in 0..nodes {
            assert!(!w.mask()[k], "x-axis node {k} must be masked");
            assert!(!w.mask()[k * nodes], "y-axis node {k} must be masked");
        }
    }

    #[test]
    fn sandwich_flags_constructed_violations() {
        let p = profile();
        let grid = QuarterGrid::new(512).unwrap();
        let eps = 1e-2;

        // The barrier itself: lower bound ties at zero margin, upper holds.
        let field = barrier_field(&p, eps, grid).unwrap();
        let rep = sandwich_check(&field, &p, eps).unwrap();
        assert!(rep.lower_ok, "worst lower {:.3e}", rep.worst_lower_margin);
        assert!(rep.upper_ok, "worst upper {:.3e}", rep.worst_upper_margin);
        assert!(rep.nodes_checked > 100);

        // Half the barrier sits below it: the lower bound must fail.
        let half = SymmetricField::from_values(
            grid,
            field.values().iter().map(|v| 0.5 * v).collect(),
        )
        .unwrap();
        let rep = sandwich_check(&half, &p, eps).unwrap();
        assert!(!rep.lower_ok);
        assert!(rep.upper_ok);

        // psi0 stays below eps on the whole region (it is itself pinched by
        // any solution), so the upper bound holds for it; a field pushed
        // above eps must be flagged.
        let psi0 = compute_psi0(grid);
        let rep = sandwich_check(&psi0, &p, eps).unwrap();
        assert!(rep.upper_ok, "worst upper {:.3e}", rep.worst_upper_margin);
        let blown = SymmetricField::from_values(
            grid,
            psi0.values().iter().map(|v| 500.0 * v).collect(),
        )
        .unwrap();
        let rep = sandwich_check(&blown, &p, eps).unwrap();
        assert!(!rep.upper_ok, "worst upper {:.3e}", rep.worst_upper_margin);

        // An unresolvable region is a resolution error, not a report.
        let coarse = QuarterGrid::new(16).unwrap();
        let small = barrier_field(&p, 1e-4, coarse).unwrap();
        assert!(matches!(
            sandwich_check(&small, &p, 1e-4),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn l2_of_unit_ratio_is_quarter_area() {
        let p = profile();
        let grid = QuarterGrid::new(256).unwrap();
        let eps = 1e-2;
        let field = barrier_field(&p, eps, grid).unwrap();
        let val = ratio_l2_check(&field, &p, eps).unwrap();
        assert!(
            (val - 0.25).abs() <= 0.02 * 0.25,
            "quarter-area quadrature returned {val:.6}"
        );
    }

    #[test]
    fn polar_samples_match_nodal_ratio() {
        let p = profile();
        let grid = QuarterGrid::new(64).unwrap();
        let eps = 1e-2;
        let field = barrier_field(&p, eps, grid).unwrap();
        let w = ratio_field(&field, &p, eps, 4.0 * grid.h()).unwrap();
        // At a node the bicubic reproduces the nodal value, so the sample
        // equals the stored ratio there.
        let (i, j) = (17, 9);
        let (x, y) = (i as f64 * grid.h(), j as f64 * grid.h());
        let r = f64::hypot(x, y);
        let theta = y.atan2(x);
        let s = w.sample_polar(r, theta).unwrap();
        assert!((s - w.value(i, j).unwrap()).abs() <= 1e-10);
        assert!(w.sample_polar(grid.h(), 0.7).is_err());
    }
}

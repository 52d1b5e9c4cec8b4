//! The eps-sweep: solve along a decreasing list of patch levels and measure
//! the Hölder-norm convergence of phi toward psi_0, the decay of the barrier
//! norm, and the continuity between consecutive solutions.

use super::holder::{c1alpha_seminorm, origin_holder_fit};
use super::ratio::ratio_field;
use super::sampler::{BarrierSampler, C1Sampler, ComboSampler, SpectralSampler};
use crate::barrier::solve_profile;
use crate::error::{Error, Result};
use crate::grid::QuarterGrid;
use crate::poisson::compute_psi0;
use crate::steady::{solve_steady, InitKind, SolveConfig};
use serde::Serialize;
use std::fmt::Write as _;

/// Knobs shared by every entry of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub n: usize,
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Monte Carlo pairs per seminorm estimate.
    pub pairs: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 1024,
            omega: 0.5,
            tol: 1e-8,
            max_iter: 5000,
            pairs: 4000,
            seed: 0,
        }
    }
}

/// One eps entry of the sweep. The seminorm indices are alpha_s for the
/// psi_0 comparison and alpha_s + sigma_used/2 for the barrier-corrected
/// residual; `continuity_diff` compares against the next (smaller) eps and
/// is absent on the last row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub sigma_est: Option<f64>,
    pub sigma_used: f64,
    pub alpha_plus: f64,
    pub c1_norm_diff: f64,
    pub c1alpha_seminorm_diff: f64,
    pub c1alphaplus_seminorm_residual: f64,
    pub barrier_c1alpha: f64,
    pub continuity_diff: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub s: f64,
    pub alpha_s: f64,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV rendering with one row per eps; the continuity column is empty
    /// on the final row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "eps,c1_norm_diff,c1alpha_seminorm_diff,c1alphaplus_seminorm_residual,barrier_c1alpha,continuity_diff\n",
        );
        for row in &self.rows {
            let _ = write!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},",
                row.eps,
                row.c1_norm_diff,
                row.c1alpha_seminorm_diff,
                row.c1alphaplus_seminorm_residual,
                row.barrier_c1alpha
            );
            if let Some(d) = row.continuity_diff {
                let _ = writeln!(out, "{d:.16e}");
            } else {
                out.push('\n');
            }
        }
        out
    }
}

/// Solve phi_eps for each entry of a strictly decreasing eps list and
/// measure the convergence/continuity columns.
///
/// The exponent bump sigma_used is min(sigma_est, s/100) from the origin
/// ratio fit; when the fit window is unresolvable at this grid the sweep
/// falls back to s/100 and records a warning rather than failing, since the
/// seminorm columns remain well defined for any exponent in (0, 1).
pub fn convergence_sweep(s: f64, eps_list: &[f64], config: &SweepConfig) -> Result<SweepTable> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParam("eps list is empty".into()));
    }
    for pair in eps_list.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::InvalidParam(format!(
                "eps list must be strictly decreasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if !eps_list.iter().all(|&e| e > 0.0 && e < 1.0) {
        return Err(Error::InvalidParam("every eps must lie in (0, 1)".into()));
    }
    if config.pairs == 0 {
        return Err(Error::InvalidParam("pairs must be positive".into()));
    }

    let profile = solve_profile(s, 2048, 1e-12)?;
    let grid = QuarterGrid::new(config.n)?;
    let h = grid.h();
    let alpha = super::alpha_s(s);
    let psi0 = compute_psi0(grid);
    let psi0_sampler = SpectralSampler::new(&psi0);

    // Solve every entry first; continuity compares consecutive fields.
    let mut solves = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let report = solve_steady(&SolveConfig {
            eps,
            s,
            n: config.n,
            omega: config.omega,
            tol: config.tol,
            max_iter: config.max_iter,
            init: InitKind::Psi0,
        })?;
        solves.push(report);
    }
    let samplers: Vec<SpectralSampler> = solves
        .iter()
        .map(|r| SpectralSampler::new(&r.field))
        .collect();

    let mut rows = Vec::with_capacity(solves.len());
    for (k, report) in solves.iter().enumerate() {
        let eps = eps_list[k];
        let mut warnings = report.warnings.clone();

        let region = eps.sqrt() / (-eps.ln());
        if region < 20.0 * h {
            warnings.push(format!(
                "comparison region {region:.3e} under 20h = {:.3e}; near-origin quantities unresolved",
                20.0 * h
            ));
        }

        let sigma_est = fit_sigma(&report.field, &profile, eps, h);
        let sigma_used = match sigma_est {
            Some(v) if v > 0.0 => v.min(s / 100.0),
            _ => {
                warnings.push(
                    "origin exponent fit unavailable; using the ceiling s/100".into(),
                );
                s / 100.0
            }
        };
        let alpha_plus = alpha + 0.5 * sigma_used;

        let phi_sampler = &samplers[k];
        let barrier_sampler = BarrierSampler::new(profile.clone(), eps, h);

        let diff_psi0 = ComboSampler::new(vec![
            (1.0, phi_sampler as &dyn C1Sampler),
            (-1.0, &psi0_sampler),
        ]);
        let (sem_diff, c1_diff) =
            c1alpha_seminorm(&diff_psi0, alpha, config.pairs, config.seed);

        let residual = ComboSampler::new(vec![
            (1.0, phi_sampler as &dyn C1Sampler),
            (-1.0, &barrier_sampler),
            (-1.0, &psi0_sampler),
        ]);
        let (sem_residual, _) =
            c1alpha_seminorm(&residual, alpha_plus, config.pairs, config.seed);

        let (sem_bar, c1_bar) =
            c1alpha_seminorm(&barrier_sampler, alpha, config.pairs, config.seed);

        let continuity_diff = if k + 1 < solves.len() {
            let diff = ComboSampler::new(vec![
                (1.0, phi_sampler as &dyn C1Sampler),
                (-1.0, &samplers[k + 1]),
            ]);
            let (sem, c1) = c1alpha_seminorm(&diff, alpha, config.pairs, config.seed);
            Some(sem + c1)
        } else {
            None
        };

        rows.push(SweepRow {
            eps,
            iterations: report.iterations,
            final_residual: report.final_residual,
            sigma_est,
            sigma_used,
            alpha_plus,
            c1_norm_diff: c1_diff,
            c1alpha_seminorm_diff: sem_diff,
            c1alphaplus_seminorm_residual: sem_residual,
            barrier_c1alpha: sem_bar + c1_bar,
            continuity_diff,
            warnings,
        });
    }

    Ok(SweepTable {
        s,
        alpha_s: alpha,
        config: config.clone(),
        rows,
    })
}

/// Origin exponent from the ratio field; None when the radius window or the
/// fit preconditions cannot be met at this grid.
fn fit_sigma(
    phi: &crate::grid::SymmetricField,
    profile: &crate::barrier::AngularProfile,
    eps: f64,
    h: f64,
) -> Option<f64> {
    let region = eps.sqrt() / (-eps.ln());
    let lo = 8.0 * h;
    if region <= lo * 1.05 {
        return None;
    }
    let ratio = ratio_field(phi, profile, eps, 4.0 * h).ok()?;
    let count = 40;
    let radii: Vec<f64> = (0..count)
        .map(|k| lo * (region / lo).powf(k as f64 / (count - 1) as f64))
        .collect();
    origin_holder_fit(&ratio, &radii).ok().map(|e| e.exponent)
}

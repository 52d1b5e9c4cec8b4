//! Command implementations behind the argument tree in `main`.
//!
//! Shared shape: resolve knobs through the config layer (flag > file >
//! default), hash inputs as they are read, run the library call, write
//! JSON reports with a `schema_version` field, and finish with a manifest
//! next to the primary output. Scalars printed to stdout use `{:.16e}`
//! (17 significant digits).

use crate::config::Resolver;
use crate::manifest::Tracker;
use crate::{
    AnalyzeCmd, BarrierCmd, BarrierFieldArgs, BarrierProfileArgs, Cli, Command, GreenArgs,
    HolderArgs, LabArgs, Psi0Args, RatioArgs, SandwichArgs, SteadyCmd, SteadySolveArgs, SweepArgs,
};
use bcpatch_core::analysis::{
    convergence_sweep, inequality_lab, origin_holder_fit, ratio_field, ratio_l2_check,
    sandwich_check, InequalityId, LabConfig, SweepConfig,
};
use bcpatch_core::barrier::{barrier_field, solve_profile, AngularProfile};
use bcpatch_core::field_io::{read_field, sidecar_path, write_field, FieldKind, FieldSidecar};
use bcpatch_core::grid::{QuarterGrid, SymmetricField};
use bcpatch_core::poisson::{compute_psi0_modes, prolong, torus_green};
use bcpatch_core::steady::{solve_steady, InitKind, SolveConfig};
use bcpatch_core::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

/// Tolerance of the internal profile solves backing the analyze
/// subcommands; profile accuracy must sit well below every field
/// tolerance they certify.
const PROFILE_TOL: f64 = 1e-12;

pub struct Ctx {
    pub cfg: Resolver,
    pub argv: Vec<String>,
    pub seed: u64,
    pub config_path: Option<PathBuf>,
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let mut cfg = Resolver::load(cli.config.as_deref())?;
    let seed = cfg.u64(cli.seed, "seed", 0)?;
    if let Some(threads) = cfg.opt_usize(cli.threads, "threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParam(format!("thread pool setup failed: {e}")))?;
    }
    let mut ctx = Ctx {
        cfg,
        argv: std::env::args().collect(),
        seed,
        config_path: cli.config,
    };
    match cli.command {
        Command::Psi0(a) => psi0(&mut ctx, &a),
        Command::Barrier(BarrierCmd::Profile(a)) => barrier_profile(&mut ctx, &a),
        Command::Barrier(BarrierCmd::Field(a)) => barrier_field_cmd(&mut ctx, &a),
        Command::Steady(SteadyCmd::Solve(a)) => steady_solve(&mut ctx, &a),
        Command::Analyze(AnalyzeCmd::Sandwich(a)) => analyze_sandwich(&mut ctx, &a),
        Command::Analyze(AnalyzeCmd::Ratio(a)) => analyze_ratio(&mut ctx, &a),
        Command::Analyze(AnalyzeCmd::Holder(a)) => analyze_holder(&mut ctx, &a),
        Command::Analyze(AnalyzeCmd::Sweep(a)) | Command::Sweep(a) => sweep(&mut ctx, &a),
        Command::Analyze(AnalyzeCmd::Lab(a)) | Command::Lab(a) => lab(&mut ctx, &a),
        Command::Green(a) => green(&mut ctx, &a),
    }
}

fn tracker(ctx: &Ctx) -> Result<Tracker> {
    let mut tr = Tracker::new();
    if let Some(path) = &ctx.config_path {
        tr.input(path)?;
    }
    Ok(tr)
}

fn finish(ctx: &Ctx, tr: Tracker, primary: &Path) -> Result<()> {
    tr.write(primary, &ctx.argv, ctx.cfg.resolved(), &[ctx.seed])?;
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn with_schema(v: Value) -> Value {
    let Value::Object(mut map) = v else {
        unreachable!("reports serialize to JSON objects")
    };
    map.insert("schema_version".into(), json!(crate::manifest::SCHEMA_VERSION));
    Value::Object(map)
}

fn to_object(v: Value) -> serde_json::Map<String, Value> {
    let Value::Object(map) = v else {
        unreachable!("reports serialize to JSON objects")
    };
    map
}

fn load_field(tr: &mut Tracker, path: &Path) -> Result<(SymmetricField, Option<FieldSidecar>)> {
    tr.input(path)?;
    let side_path = sidecar_path(path);
    if side_path.exists() {
        tr.input(&side_path)?;
    }
    read_field(path)
}

/// s and eps for an analyze run: flag > config file > the field's sidecar.
fn resolve_s_eps(
    cfg: &mut Resolver,
    s_flag: Option<f64>,
    eps_flag: Option<f64>,
    sidecar: Option<&FieldSidecar>,
) -> Result<(f64, f64)> {
    let s = cfg.f64_or(s_flag, "s", sidecar.and_then(|sc| sc.s))?;
    let eps = cfg.f64_or(eps_flag, "eps", sidecar.and_then(|sc| sc.eps))?;
    Ok((s, eps))
}

fn analyze_profile(cfg: &mut Resolver, flag: Option<usize>, s: f64) -> Result<AngularProfile> {
    let nodes = cfg.usize(flag, "nodes", 2048)?;
    solve_profile(s, nodes, PROFILE_TOL)
}

fn command_echo(ctx: &Ctx) -> String {
    ctx.argv.join(" ")
}

fn psi0(ctx: &mut Ctx, a: &Psi0Args) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let n = ctx.cfg.usize(a.grid, "grid", 1024)?;
    let modes = ctx.cfg.usize(a.modes, "modes", n)?;
    if modes == 0 {
        return Err(Error::InvalidParam("modes must be >= 1".into()));
    }
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let grid = QuarterGrid::new(n)?;
    let field = compute_psi0_modes(grid, modes);
    let sidecar = FieldSidecar {
        n,
        s: None,
        eps: None,
        kind: FieldKind::Psi0,
        generator: command_echo(ctx),
    };
    write_field(&out, &field, &sidecar)?;
    tr.output(&out);
    tr.output(&sidecar_path(&out));
    println!(
        "psi0: n = {n}, modes = {modes}, sup = {:.16e}",
        field.sup_norm()
    );
    finish(ctx, tr, &out)
}

fn barrier_profile(ctx: &mut Ctx, a: &BarrierProfileArgs) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let s = ctx.cfg.f64(a.s, "s", 0.5)?;
    let nodes = ctx.cfg.usize(a.nodes, "nodes", 2048)?;
    let tol = ctx.cfg.f64(a.tol, "tol", 1e-12)?;
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let profile = solve_profile(s, nodes, tol)?;

    #[derive(Serialize)]
    struct ProfileJson<'a> {
        schema_version: u32,
        s: f64,
        beta: f64,
        a: f64,
        theta: &'a [f64],
        g: &'a [f64],
    }
    let doc = ProfileJson {
        schema_version: crate::manifest::SCHEMA_VERSION,
        s: profile.s(),
        beta: profile.beta(),
        a: profile.a(),
        theta: profile.theta(),
        g: profile.g(),
    };
    write_json(&out, &serde_json::to_value(&doc)?)?;
    tr.output(&out);
    println!(
        "barrier profile: s = {:.16e}, beta = {:.16e}, a = {:.16e}, g(pi/4) = {:.16e}, \
         ode residual sup = {:.16e}",
        profile.s(),
        profile.beta(),
        profile.a(),
        profile.midpoint(),
        profile.ode_residual_sup()
    );
    finish(ctx, tr, &out)
}

fn barrier_field_cmd(ctx: &mut Ctx, a: &BarrierFieldArgs) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let s = ctx.cfg.f64(a.s, "s", 0.5)?;
    let eps = ctx.cfg.f64(a.eps, "eps", 1e-3)?;
    let n = ctx.cfg.usize(a.grid, "grid", 1024)?;
    let nodes = ctx.cfg.usize(a.nodes, "nodes", 2048)?;
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let profile = solve_profile(s, nodes, PROFILE_TOL)?;
    let grid = QuarterGrid::new(n)?;
    let field = barrier_field(&profile, eps, grid)?;
    let sidecar = FieldSidecar {
        n,
        s: Some(s),
        eps: Some(eps),
        kind: FieldKind::Barrier,
        generator: command_echo(ctx),
    };
    write_field(&out, &field, &sidecar)?;
    tr.output(&out);
    tr.output(&sidecar_path(&out));
    println!(
        "barrier field: n = {n}, eps = {eps:.16e}, sup = {:.16e}",
        field.sup_norm()
    );
    finish(ctx, tr, &out)
}

fn steady_solve(ctx: &mut Ctx, a: &SteadySolveArgs) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let s = ctx.cfg.f64(a.s, "s", 0.5)?;
    let eps = ctx.cfg.f64(a.eps, "eps", 1e-3)?;
    let n = ctx.cfg.usize(a.grid, "grid", 1024)?;
    let omega = ctx.cfg.f64(a.omega, "omega", 0.5)?;
    let tol = ctx.cfg.f64(a.tol, "tol", 1e-8)?;
    let max_iter = ctx.cfg.usize(a.max_iter, "max-iter", 5000)?;
    let init_name = ctx.cfg.string(a.init.as_deref(), "init", "psi0")?;
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let report_path = ctx.cfg.require_path(a.report.as_deref(), "report")?;

    let init = match init_name.as_str() {
        "psi0" => InitKind::Psi0,
        "barrier-blend" => InitKind::BarrierBlend,
        "file" => {
            let path = ctx.cfg.require_path(a.init_file.as_deref(), "init-file")?;
            let (field, _) = load_field(&mut tr, &path)?;
            let field = if field.grid().n() == n {
                field
            } else {
                prolong(&field, n)?
            };
            InitKind::Field(field)
        }
        other => {
            return Err(Error::InvalidParam(format!(
                "unknown init {other:?}; expected psi0, barrier-blend or file"
            )))
        }
    };

    let report = solve_steady(&SolveConfig {
        eps,
        s,
        n,
        omega,
        tol,
        max_iter,
        init,
    })?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let sidecar = FieldSidecar {
        n,
        s: Some(s),
        eps: Some(eps),
        kind: FieldKind::Phi,
        generator: command_echo(ctx),
    };
    write_field(&out, &report.field, &sidecar)?;
    tr.output(&out);
    tr.output(&sidecar_path(&out));

    // The two inequalities a single solve can certify without further
    // machinery: membership in the class (phi >= psi_0 up to rounding) and
    // the upper half of the corner sandwich (phi <= eps on the comparison
    // region), each with its margin.
    let region = eps.sqrt() / (-eps.ln());
    let h = report.field.grid().h();
    let mut upper_margin = f64::NEG_INFINITY;
    for j in 0..=n {
        let y = j as f64 * h;
        if y > region {
            break;
        }
        for i in 0..=n {
            let x = i as f64 * h;
            if f64::hypot(x, y) > region {
                break;
            }
            upper_margin = upper_margin.max(report.field.value(i, j) - eps);
        }
    }
    let certified = json!({
        "phi_ge_psi0": {
            "holds": report.psi0_gap_min >= -1e-10,
            "min_gap": report.psi0_gap_min,
        },
        "phi_le_eps_on_corner": {
            "holds": upper_margin <= 1e-8 * eps,
            "max_margin": upper_margin,
            "region_radius": region,
        },
    });
    let mut doc = to_object(serde_json::to_value(&report)?);
    doc.insert("schema_version".into(), json!(crate::manifest::SCHEMA_VERSION));
    doc.insert("certified".into(), certified);
    write_json(&report_path, &Value::Object(doc))?;
    tr.output(&report_path);

    println!(
        "steady solve: {} iterations, final residual {:.16e}, psi0 gap min {:.16e}, \
         wall {:.3} s",
        report.iterations, report.final_residual, report.psi0_gap_min, report.wall_time_s
    );
    finish(ctx, tr, &out)
}

fn analyze_sandwich(ctx: &mut Ctx, a: &SandwichArgs) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let phi_path = ctx.cfg.require_path(a.phi.as_deref(), "phi")?;
    let (field, side) = load_field(&mut tr, &phi_path)?;
    let (s, eps) = resolve_s_eps(&mut ctx.cfg, a.s, a.eps, side.as_ref())?;
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let profile = analyze_profile(&mut ctx.cfg, a.nodes, s)?;

    let report = sandwich_check(&field, &profile, eps)?;
    let pass = report.lower_ok && report.upper_ok;
    let mut doc = to_object(serde_json::to_value(&report)?);
    doc.insert("schema_version".into(), json!(crate::manifest::SCHEMA_VERSION));
    doc.insert("pass".into(), json!(pass));
    doc.insert("s".into(), json!(s));
    doc.insert("eps".into(), json!(eps));
    write_json(&out, &Value::Object(doc))?;
    tr.output(&out);

    println!(
        "sandwich: pass = {pass}, worst lower margin {:.16e} at ({:.6e}, {:.6e}), \
         worst upper margin {:.16e}",
        report.worst_lower_margin,
        report.worst_lower_location.0,
        report.worst_lower_location.1,
        report.worst_upper_margin
    );
    finish(ctx, tr, &out)
}

fn analyze_ratio(ctx: &mut Ctx, a: &RatioArgs) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let phi_path = ctx.cfg.require_path(a.phi.as_deref(), "phi")?;
    let (field, side) = load_field(&mut tr, &phi_path)?;
    let (s, eps) = resolve_s_eps(&mut ctx.cfg, a.s, a.eps, side.as_ref())?;
    let h = field.grid().h();
    let r_min = ctx.cfg.f64(a.r_min, "r-min", 4.0 * h)?;
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let profile = analyze_profile(&mut ctx.cfg, a.nodes, s)?;

    let w = ratio_field(&field, &profile, eps, r_min)?;
    let l2 = ratio_l2_check(&field, &profile, eps)?;
    let unmasked = w.mask().iter().filter(|m| **m).count();
    let doc = json!({
        "schema_version": crate::manifest::SCHEMA_VERSION,
        "s": s,
        "eps": eps,
        "grid_n": field.grid().n(),
        "r_min": r_min,
        "region_radius": eps.sqrt() / (-eps.ln()),
        "l2_deviation": l2,
        "min_w_on_region": w.min_on_region(),
        "unmasked_nodes": unmasked,
    });
    write_json(&out, &doc)?;
    tr.output(&out);

    let min_w = match w.min_on_region() {
        Some(v) => format!("{v:.16e}"),
        None => "none (region fully masked)".into(),
    };
    println!("ratio: l2 deviation {l2:.16e}, min w on region {min_w}");
    finish(ctx, tr, &out)
}

fn analyze_holder(ctx: &mut Ctx, a: &HolderArgs) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let phi_path = ctx.cfg.require_path(a.phi.as_deref(), "phi")?;
    let (field, side) = load_field(&mut tr, &phi_path)?;
    let (s, eps) = resolve_s_eps(&mut ctx.cfg, a.s, a.eps, side.as_ref())?;
    let count = ctx.cfg.usize(a.radii, "radii", 40)?;
    if count < 2 {
        return Err(Error::InvalidParam(format!(
            "radii must be >= 2, got {count}"
        )));
    }
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let profile = analyze_profile(&mut ctx.cfg, a.nodes, s)?;

    let h = field.grid().h();
    let region = eps.sqrt() / (-eps.ln());
    let r_lo = 8.0 * h;
    if region <= r_lo {
        return Err(Error::Resolution(format!(
            "corner region {region:.3e} sits inside the 8h near-axis mask at h = {h:.3e}; \
             refine the grid or increase eps"
        )));
    }
    let radii: Vec<f64> = (0..count)
        .map(|k| r_lo * (region / r_lo).powf(k as f64 / (count - 1) as f64))
        .collect();
    let w = ratio_field(&field, &profile, eps, 4.0 * h)?;
    let fit = origin_holder_fit(&w, &radii)?;

    let mut doc = to_object(serde_json::to_value(&fit)?);
    doc.insert("schema_version".into(), json!(crate::manifest::SCHEMA_VERSION));
    doc.insert("s".into(), json!(s));
    doc.insert("eps".into(), json!(eps));
    doc.insert("radii".into(), json!(count));
    write_json(&out, &Value::Object(doc))?;
    tr.output(&out);

    println!(
        "holder: sigma_est = {:.16e}, r_squared = {:.16e}, samples = {}, \
         window [{:.6e}, {:.6e}]",
        fit.exponent, fit.r_squared, fit.n_samples, fit.fit_window.0, fit.fit_window.1
    );
    finish(ctx, tr, &out)
}

fn sweep(ctx: &mut Ctx, a: &SweepArgs) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let s = ctx.cfg.f64(a.s, "s", 0.5)?;
    let eps_list = ctx
        .cfg
        .eps_list(a.eps_list.as_deref(), "eps-list", &[1e-2, 1e-3, 1e-4])?;
    let config = SweepConfig {
        n: ctx.cfg.usize(a.grid, "grid", 1024)?,
        omega: ctx.cfg.f64(a.omega, "omega", 0.5)?,
        tol: ctx.cfg.f64(a.tol, "tol", 1e-8)?,
        max_iter: ctx.cfg.usize(a.max_iter, "max-iter", 5000)?,
        pairs: ctx.cfg.usize(a.pairs, "pairs", 4000)?,
        seed: ctx.seed,
    };
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let csv_path = match ctx.cfg.path(a.csv.as_deref(), "csv")? {
        Some(p) => p,
        None => {
            let p = out.with_extension("csv");
            ctx.cfg
                .record_derived("csv", json!(p.display().to_string()));
            p
        }
    };

    let table = convergence_sweep(s, &eps_list, &config)?;
    for row in &table.rows {
        for w in &row.warnings {
            eprintln!("warning: eps {:.3e}: {w}", row.eps);
        }
    }
    write_json(&out, &with_schema(serde_json::to_value(&table)?))?;
    tr.output(&out);
    fs::write(&csv_path, table.to_csv())?;
    tr.output(&csv_path);

    for row in &table.rows {
        println!(
            "sweep eps {:.16e}: c1_norm_diff {:.16e}, c1alpha_seminorm_diff {:.16e}, \
             c1alphaplus_seminorm_residual {:.16e}, barrier_c1alpha {:.16e}",
            row.eps,
            row.c1_norm_diff,
            row.c1alpha_seminorm_diff,
            row.c1alphaplus_seminorm_residual,
            row.barrier_c1alpha
        );
    }
    finish(ctx, tr, &out)
}

fn lab(ctx: &mut Ctx, a: &LabArgs) -> Result<()> {
    let mut tr = tracker(ctx)?;
    let id = ctx.cfg.opt_string(a.id.as_deref(), "id")?;
    let config = LabConfig {
        s: ctx.cfg.f64(a.s, "s", 0.5)?,
        trials: ctx.cfg.usize(a.trials, "trials", 500)?,
        seed: ctx.seed,
        grid_n: ctx.cfg.usize(a.grid, "grid", 128)?,
        delta: ctx.cfg.f64(a.delta, "delta", 0.1)?,
    };
    let out = ctx.cfg.require_path(a.out.as_deref(), "out")?;
    let ids: Vec<InequalityId> = match id {
        Some(name) => vec![name.parse()?],
        None => InequalityId::ALL.to_vec(),
    };

    let reports = ids
        .iter()
        .map(|id| inequality_lab(*id, &config))
        .collect::<Result<Vec<_>>>()?;
    let doc = json!({
        "schema_version": crate::manifest::SCHEMA_VERSION,
        "reports": reports,
    });
    write_json(&out, &doc)?;
    tr.output(&out);

    for r in &reports {
        println!(
            "lab {}: empirical constant = {:.16e}, stability factor = {:.16e}",
            r.id, r.empirical_constant, r.stability_factor
        );
    }
    finish(ctx, tr, &out)
}

fn green(ctx: &mut Ctx, a: &GreenArgs) -> Result<()> {
    let x1 = ctx.cfg.f64_or(a.x1, "x1", None)?;
    let x2 = ctx.cfg.f64_or(a.x2, "x2", None)?;
    let y1 = ctx.cfg.f64_or(a.y1, "y1", None)?;
    let y2 = ctx.cfg.f64_or(a.y2, "y2", None)?;
    let terms = ctx.cfg.usize(a.terms, "terms", 48)?;
    let split = torus_green((x1, x2), (y1, y2), terms)?;
    let doc = with_schema(serde_json::to_value(&split)?);
    println!("{}", serde_json::to_string(&doc)?);
    if let Some(out) = ctx.cfg.path(a.out.as_deref(), "out")? {
        let mut tr = tracker(ctx)?;
        write_json(&out, &doc)?;
        tr.output(&out);
        finish(ctx, tr, &out)?;
    }
    Ok(())
}

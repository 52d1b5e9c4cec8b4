use bcpatch_core::grid::QuarterGrid;
use bcpatch_core::poisson::compute_psi0;
use bcpatch_core::steady::*;

fn main() {
    // T(psi_0) deviation at large-phi regime (regression candidate).
    {
        let grid = QuarterGrid::new(512).unwrap();
        let psi0 = compute_psi0(grid);
        let nl = Nonlinearity::new(1e-6, 0.5).unwrap();
        let t = fixed_point_map(&psi0, &nl).unwrap();
        let mut dev = 0.0f64;
        for (a, b) in t.values().iter().zip(psi0.values()) {
            dev = dev.max((a - b).abs());
        }
        println!("T(psi0) eps=1e-6 n=512 sup-dev = {dev:.16e}");
    }
    // psi0 steadiness regression at n=1024.
    {
        let grid = QuarterGrid::new(1024).unwrap();
        let psi0 = compute_psi0(grid);
        let t0 = std::time::Instant::now();
        let v = steadiness_check(&psi0);
        println!("steadiness(psi0) n=1024 = {v:.16e}  ({} ms)", t0.elapsed().as_millis());
    }
    for &(eps, n) in &[(1e-2f64, 256usize), (1e-2, 1024), (1e-3, 1024)] {
        let t0 = std::time::Instant::now();
        let r = solve_steady(&SolveConfig {
            eps, s: 0.5, n, omega: 0.5, tol: 1e-8, max_iter: 5000, init: InitKind::Psi0,
        });
        match r {
            Ok(rep) => {
                let st = steadiness_check(&rep.field);
                let fd = residual(&rep.field, &Nonlinearity::new(eps, 0.5).unwrap());
                println!(
                    "eps={eps} n={n}: iters={} final={:.3e} gap={:+.3e} clamped={} steadiness={:.6e} fd_residual={:.6e} warn={:?} ({} s)",
                    rep.iterations, rep.final_residual, rep.psi0_gap_min, rep.clamped_nodes,
                    st, fd, rep.warnings, t0.elapsed().as_secs()
                );
            }
            Err(e) => println!("eps={eps} n={n}: FAILED {e} ({} s)", t0.elapsed().as_secs()),
        }
    }
}

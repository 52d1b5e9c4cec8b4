//! Scratch probe: wall times of the heavy acceptance-gate members.

use bcpatch_core::grid::QuarterGrid;
use bcpatch_core::poisson::{compute_psi0, prolong};
use bcpatch_core::steady::{solve_steady, InitKind, SolveConfig};
use std::time::Instant;

fn main() {
    let t = Instant::now();
    let psi0_4096 = compute_psi0(QuarterGrid::new(4096).unwrap());
    println!("psi0@4096: {:.1} s (sup {:.6e})", t.elapsed().as_secs_f64(), psi0_4096.sup_norm());
    drop(psi0_4096);

    let t = Instant::now();
    let e2 = solve_steady(&SolveConfig {
        eps: 1e-2,
        s: 0.5,
        n: 1024,
        omega: 0.5,
        tol: 1e-8,
        max_iter: 5000,
        init: InitKind::Psi0,
    })
    .unwrap();
    println!(
        "solve eps=1e-2 n=1024: {:.1} s, {} iters, residual {:.3e}",
        t.elapsed().as_secs_f64(),
        e2.iterations,
        e2.final_residual
    );

    let t = Instant::now();
    let e3 = solve_steady(&SolveConfig {
        eps: 1e-3,
        s: 0.5,
        n: 1024,
        omega: 0.5,
        tol: 1e-8,
        max_iter: 5000,
        init: InitKind::Psi0,
    })
    .unwrap();
    println!(
        "solve eps=1e-3 n=1024: {:.1} s, {} iters, residual {:.3e}",
        t.elapsed().as_secs_f64(),
        e3.iterations,
        e3.final_residual
    );

    let t = Instant::now();
    let warm = prolong(&e3.field, 4096).unwrap();
    println!("prolong 1024 -> 4096: {:.1} s", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let e3_fine = solve_steady(&SolveConfig {
        eps: 1e-3,
        s: 0.5,
        n: 4096,
        omega: 0.5,
        tol: 1e-8,
        max_iter: 5000,
        init: InitKind::Field(warm),
    })
    .unwrap();
    println!(
        "solve eps=1e-3 n=4096 warm: {:.1} s, {} iters, residual {:.3e}, gap {:.3e}",
        t.elapsed().as_secs_f64(),
        e3_fine.iterations,
        e3_fine.final_residual,
        e3_fine.psi0_gap_min
    );
}

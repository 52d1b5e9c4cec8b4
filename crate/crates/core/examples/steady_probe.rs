//! Scratch probe for ordering slacks in the steady tests.

use bcpatch_core::grid::QuarterGrid;
use bcpatch_core::poisson::compute_psi0;
use bcpatch_core::steady::{fixed_point_map, Nonlinearity};

fn main() {
    // Signed gap of T(psi0) - psi0 at the frozen regression point.
    let grid = QuarterGrid::new(512).unwrap();
    let psi0 = compute_psi0(grid);
    let nl = Nonlinearity::new(1e-6, 0.5).unwrap();
    let t = fixed_point_map(&psi0, &nl).unwrap();
    let mut sup = 0.0f64;
    let mut min_gap = f64::INFINITY;
    for (a, b) in t.values().iter().zip(psi0.values()) {
        sup = sup.max((a - b).abs());
        min_gap = min_gap.min(a - b);
    }
    println!("n=512 eps=1e-6: sup dev {sup:.16e}  min gap {min_gap:.6e}");

    // Bracketing iterates at eps = 1e-2, n = 64.
    let grid = QuarterGrid::new(64).unwrap();
    let psi0 = compute_psi0(grid);
    let nl = Nonlinearity::new(1e-2, 0.5).unwrap();
    let mut iterates = vec![psi0.clone()];
    for _ in 0..6 {
        iterates.push(fixed_point_map(iterates.last().unwrap(), &nl).unwrap());
    }
    let viol = |a: usize, b: usize| -> f64 {
        // How far iterate a pokes above iterate b (0 if a <= b nodewise).
        iterates[a]
            .values()
            .iter()
            .zip(iterates[b].values())
            .fold(0.0f64, |m, (x, y)| m.max(x - y))
    };
    println!("phi0 above phi2: {:.3e}", viol(0, 2));
    println!("phi2 above phi4: {:.3e}", viol(2, 4));
    println!("phi3 above phi1: {:.3e}", viol(3, 1));
    println!("phi5 above phi3: {:.3e}", viol(5, 3));
    println!("phi4 above phi5: {:.3e}", viol(4, 5));
    println!("phi0 above phi6: {:.3e}", viol(0, 6));
    for (k, it) in iterates.iter().enumerate() {
        println!("iterate {k}: interior min {:.3e} sup {:.6e}", it.interior_min(), it.sup_norm());
    }

    // Antitone flip at n = 32.
    let grid = QuarterGrid::new(32).unwrap();
    let psi0 = compute_psi0(grid);
    let scaled = bcpatch_core::grid::SymmetricField::from_values(
        grid,
        psi0.values().iter().map(|v| v * 1.5).collect(),
    )
    .unwrap();
    let t1 = fixed_point_map(&psi0, &nl).unwrap();
    let t2 = fixed_point_map(&scaled, &nl).unwrap();
    let mut worst = 0.0f64;
    for (a, b) in t2.values().iter().zip(t1.values()) {
        worst = worst.max(a - b);
    }
    println!("T(1.5 psi0) above T(psi0): {worst:.3e}");
}

//! Bicubic Lagrange interpolation with parity-aware index reflection.
//!
//! Quarter-cell data extends to the whole plane through the period-1
//! reflections encoded by a `Parity` pair, so a 4x4 stencil can be taken
//! around any point without special-casing the axes or the far edges. The
//! per-axis weights are the cubic Lagrange basis on four consecutive nodes,
//! which reproduces polynomials of degree <= 3 exactly and samples smooth
//! data with O(h^4) error.

use crate::grid::{Parity, QuarterGrid};

/// Cubic Lagrange weights on stencil offsets {-1, 0, 1, 2} at fraction u.
#[inline]
pub(crate) fn lagrange_weights(u: f64) -> [f64; 4] {
    let um1 = u - 1.0;
    let um2 = u - 2.0;
    let up1 = u + 1.0;
    [
        -u * um1 * um2 / 6.0,
        up1 * um1 * um2 / 2.0,
        -up1 * u * um2 / 2.0,
        up1 * u * um1 / 6.0,
    ]
}

/// Signed node lookup at an arbitrary integer index.
///
/// Indices live on the full torus grid of period 2n; anything outside
/// [0, n] folds back with the sign of the axis parity. Odd parity about
/// x = 0 implies odd parity about x = 1/2 as well (period-1 reflection),
/// so one sign per axis suffices.
#[inline]
fn fold(ix: i64, n: i64, parity: Parity) -> (usize, f64) {
    let m = 2 * n;
    let mut r = ix.rem_euclid(m);
    let mut sign = 1.0;
    if r > n {
        r = m - r;
        sign = parity.sign();
    }
    (r as usize, sign)
}

/// Bicubic sample of parity-extended node data at an arbitrary point.
pub(crate) fn bicubic(
    values: &[f64],
    grid: QuarterGrid,
    parity: (Parity, Parity),
    x: f64,
    y: f64,
) -> f64 {
    let n = grid.n() as i64;
    let stride = grid.nodes();
    let h = grid.h();

    let tx = x / h;
    let ty = y / h;
    let bx = tx.floor();
    let by = ty.floor();
    let wx = lagrange_weights(tx - bx);
    let wy = lagrange_weights(ty - by);
    let bx = bx as i64;
    let by = by as i64;

    let mut acc = 0.0;
    for (b, wyb) in wy.iter().enumerate() {
        let (jj, sj) = fold(by + b as i64 - 1, n, parity.1);
        let row = &values[jj * stride..jj * stride + stride];
        let mut row_acc = 0.0;
        for (a, wxa) in wx.iter().enumerate() {
            let (ii, si) = fold(bx + a as i64 - 1, n, parity.0);
            row_acc += wxa * si * row[ii];
        }
        acc += wyb * sj * row_acc;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_unity_and_hit_nodes() {
        for &u in &[0.0, 0.25, 0.5, 0.99] {
            let w = lagrange_weights(u);
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14, "sum {sum} at u={u}");
        }
        let w = lagrange_weights(0.0);
        assert_eq!(w[1], 1.0);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[2], 0.0);
        assert_eq!(w[3], 0.0);
    }

    #[test]
    fn fold_reflects_with_sign() {
        // n = 8: index 9 reflects to 7, index -1 to 1, index 16 to 0.
        assert_eq!(fold(9, 8, Parity::Odd), (7, -1.0));
        assert_eq!(fold(-1, 8, Parity::Odd), (1, -1.0));
        assert_eq!(fold(16, 8, Parity::Odd), (0, 1.0));
        assert_eq!(fold(9, 8, Parity::Even), (7, 1.0));
        assert_eq!(fold(8, 8, Parity::Odd), (8, 1.0));
    }
}

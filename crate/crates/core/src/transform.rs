//! Fast double-sine analysis/synthesis on the quarter grid.
//!
//! Interior nodes (i, j = 1..n-1) of an odd-odd field biject with the sine
//! modes sin(2*pi*m*x1) sin(2*pi*k*x2), 1 <= m, k <= n-1; modes at index n
//! vanish identically on the grid. A length-2n complex FFT evaluates the
//! underlying DST-I; two real sequences ride in one complex transform (one
//! in the real lane, one in the imaginary lane), which is exact because odd
//! input makes each lane's spectrum purely imaginary.
//!
//! Layouts: node arrays are (n+1)^2 with i fastest; coefficient arrays are
//! (n-1)^2 with m (the x1 mode) fastest, entry (m, k) at
//! `(k-1)*(n-1) + (m-1)`.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry(len)
        .or_insert_with(|| FftPlanner::new().plan_fft_forward(len))
        .clone()
}

/// Scratch buffers for repeated transforms of one size.
struct Workspace {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let fft = plan(2 * n);
        let scratch_len = fft.get_inplace_scratch_len();
        Workspace {
            fft,
            buf: vec![Complex::default(); 2 * n],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    /// Unnormalized sine sums S_m = sum_{i=1}^{n-1} f_i sin(pi m i / n) for
    /// two packed sequences `a`, `b` of length n-1. Results land in `sa`,
    /// `sb` (length n-1).
    fn dst_pair(&mut self, a: &[f64], b: &[f64], sa: &mut [f64], sb: &mut [f64]) {
        let n = self.buf.len() / 2;
        self.buf[0] = Complex::default();
        self.buf[n] = Complex::default();
        for i in 1..n {
            let z = Complex::new(a[i - 1], b[i - 1]);
            self.buf[i] = z;
            self.buf[2 * n - i] = -z;
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        for m in 1..n {
            sa[m - 1] = -0.5 * self.buf[m].im;
            sb[m - 1] = 0.5 * self.buf[m].re;
        }
    }

    /// Cosine sums g_j = sum_{m=1}^{n-1} c_m cos(pi m j / n), j = 0..=n,
    /// for two packed coefficient sequences. Even extension makes each
    /// lane's spectrum purely real, so the lanes separate as re/im.
    fn cos_pair(&mut self, c: &[f64], d: &[f64], gc: &mut [f64], gd: &mut [f64]) {
        let n = self.buf.len() / 2;
        self.buf[0] = Complex::default();
        self.buf[n] = Complex::default();
        for m in 1..n {
            let z = Complex::new(c[m - 1], d[m - 1]);
            self.buf[m] = z;
            self.buf[2 * n - m] = z;
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        for j in 0..=n {
            gc[j] = 0.5 * self.buf[j].re;
            gd[j] = 0.5 * self.buf[j].im;
        }
    }
}

/// Forward analysis: node values (n+1)^2 -> coefficients (n-1)^2 with the
/// orthonormalization a_mk = (2/n)^2 sum f sin sin.
pub(crate) fn forward(n: usize, nodes: &[f64]) -> Vec<f64> {
    let m = n - 1;
    let stride = n + 1;
    let mut ws = Workspace::new(n);
    let mut inter = vec![0.0; m * m]; // row j-1 holds S_m of node row j
    let mut sa = vec![0.0; m];
    let mut sb = vec![0.0; m];

    let mut j = 1;
    while j < n {
        let row_a = &nodes[j * stride + 1..j * stride + n];
        if j + 1 < n {
            let row_b = &nodes[(j + 1) * stride + 1..(j + 1) * stride + n];
            ws.dst_pair(row_a, row_b, &mut sa, &mut sb);
            inter[(j - 1) * m..j * m].copy_from_slice(&sa);
            inter[j * m..(j + 1) * m].copy_from_slice(&sb);
            j += 2;
        } else {
            let zero = vec![0.0; m];
            ws.dst_pair(row_a, &zero, &mut sa, &mut sb);
            inter[(j - 1) * m..j * m].copy_from_slice(&sa);
            j += 1;
        }
    }

    let scale = (2.0 / n as f64) * (2.0 / n as f64);
    let mut coeffs = vec![0.0; m * m];
    let mut col_a = vec![0.0; m];
    let mut col_b = vec![0.0; m];
    let mut mm = 0;
    while mm < m {
        for jj in 0..m {
            col_a[jj] = inter[jj * m + mm];
        }
        if mm + 1 < m {
            for jj in 0..m {
                col_b[jj] = inter[jj * m + mm + 1];
            }
            ws.dst_pair(&col_a, &col_b, &mut sa, &mut sb);
            for k in 0..m {
                coeffs[k * m + mm] = scale * sa[k];
                coeffs[k * m + mm + 1] = scale * sb[k];
            }
            mm += 2;
        } else {
            let zero = vec![0.0; m];
            ws.dst_pair(&col_a, &zero, &mut sa, &mut sb);
            for k in 0..m {
                coeffs[k * m + mm] = scale * sa[k];
            }
            mm += 1;
        }
    }
    coeffs
}

/// Synthesis: coefficients -> node values with zero boundary ring.
pub(crate) fn synth(n: usize, coeffs: &[f64]) -> Vec<f64> {
    let m = n - 1;
    let stride = n + 1;
    let mut ws = Workspace::new(n);

    // Pass 1 (along k): B[j-1][m-1] = sum_k c_mk sin(pi k j / n).
    let mut inter = vec![0.0; m * m];
    let mut col_a = vec![0.0; m];
    let mut col_b = vec![0.0; m];
    let mut sa = vec![0.0; m];
    let mut sb = vec![0.0; m];
    let mut mm = 0;
    while mm < m {
        for k in 0..m {
            col_a[k] = coeffs[k * m + mm];
        }
        if mm + 1 < m {
            for k in 0..m {
                col_b[k] = coeffs[k * m + mm + 1];
            }
            ws.dst_pair(&col_a, &col_b, &mut sa, &mut sb);
            for j in 0..m {
                inter[j * m + mm] = sa[j];
                inter[j * m + mm + 1] = sb[j];
            }
            mm += 2;
        } else {
            let zero = vec![0.0; m];
            ws.dst_pair(&col_a, &zero, &mut sa, &mut sb);
            for j in 0..m {
                inter[j * m + mm] = sa[j];
            }
            mm += 1;
        }
    }

    // Pass 2 (along m): node row j = sine synthesis of B[j-1][.].
    let mut nodes = vec![0.0; stride * stride];
    let mut j = 1;
    while j < n {
        let row_a = &inter[(j - 1) * m..j * m];
        if j + 1 < n {
            let row_b = &inter[j * m..(j + 1) * m];
            ws.dst_pair(row_a, row_b, &mut sa, &mut sb);
            nodes[j * stride + 1..j * stride + n].copy_from_slice(&sa);
            nodes[(j + 1) * stride + 1..(j + 1) * stride + n].copy_from_slice(&sb);
            j += 2;
        } else {
            let zero = vec![0.0; m];
            ws.dst_pair(row_a, &zero, &mut sa, &mut sb);
            nodes[j * stride + 1..j * stride + n].copy_from_slice(&sa);
            j += 1;
        }
    }
    nodes
}

/// Synthesis of d1 f = sum 2 pi m a_mk cos(2 pi m x1) sin(2 pi k x2) on the
/// full node set, including the i = 0 and i = n columns.
pub(crate) fn synth_dx(n: usize, coeffs: &[f64]) -> Vec<f64> {
    let m = n - 1;
    let stride = n + 1;
    let mut ws = Workspace::new(n);

    // Pass 1 (along k): same inner sine synthesis as `synth`.
    let mut inter = vec![0.0; m * m];
    {
        let mut col_a = vec![0.0; m];
        let mut col_b = vec![0.0; m];
        let mut sa = vec![0.0; m];
        let mut sb = vec![0.0; m];
        let mut mm = 0;
        while mm < m {
            for k in 0..m {
                col_a[k] = coeffs[k * m + mm];
            }
            if mm + 1 < m {
                for k in 0..m {
                    col_b[k] = coeffs[k * m + mm + 1];
                }
                ws.dst_pair(&col_a, &col_b, &mut sa, &mut sb);
                for j in 0..m {
                    inter[j * m + mm] = sa[j];
                    inter[j * m + mm + 1] = sb[j];
                }
                mm += 2;
            } else {
                let zero = vec![0.0; m];
                ws.dst_pair(&col_a, &zero, &mut sa, &mut sb);
                for j in 0..m {
                    inter[j * m + mm] = sa[j];
                }
                mm += 1;
            }
        }
    }

    // Pass 2 (along m): cosine synthesis of 2 pi m * B[j-1][m-1].
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut nodes = vec![0.0; stride * stride];
    let mut row_a = vec![0.0; m];
    let mut row_b = vec![0.0; m];
    let mut ga = vec![0.0; stride];
    let mut gb = vec![0.0; stride];
    let mut j = 1;
    while j < n {
        for mm in 0..m {
            row_a[mm] = two_pi * (mm + 1) as f64 * inter[(j - 1) * m + mm];
        }
        if j + 1 < n {
            for mm in 0..m {
                row_b[mm] = two_pi * (mm + 1) as f64 * inter[j * m + mm];
            }
            ws.cos_pair(&row_a, &row_b, &mut ga, &mut gb);
            nodes[j * stride..(j + 1) * stride].copy_from_slice(&ga);
            nodes[(j + 1) * stride..(j + 2) * stride].copy_from_slice(&gb);
            j += 2;
        } else {
            let zero = vec![0.0; m];
            ws.cos_pair(&row_a, &zero, &mut ga, &mut gb);
            nodes[j * stride..(j + 1) * stride].copy_from_slice(&ga);
            j += 1;
        }
    }
    nodes
}

/// Synthesis of d2 f via the transpose identity: swapping the coefficient
/// indices turns an x2 derivative into an x1 derivative of the transposed
/// field.
pub(crate) fn synth_dy(n: usize, coeffs: &[f64]) -> Vec<f64> {
    let m = n - 1;
    let mut swapped = vec![0.0; m * m];
    for k in 0..m {
        for mm in 0..m {
            swapped[mm * m + k] = coeffs[k * m + mm];
        }
    }
    let tmp = synth_dx(n, &swapped);
    let stride = n + 1;
    let mut nodes = vec![0.0; stride * stride];
    for j in 0..stride {
        for i in 0..stride {
            nodes[j * stride + i] = tmp[i * stride + j];
        }
    }
    nodes
}

/// Eigenvalue of the Laplacian on mode (m, k): -4 pi^2 (m^2 + k^2).
#[inline]
pub(crate) fn eigenvalue(m: usize, k: usize) -> f64 {
    let pi = std::f64::consts::PI;
    -4.0 * pi * pi * ((m * m + k * k) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_mode(n: usize, m: usize, k: usize, amp: f64) -> Vec<f64> {
        let stride = n + 1;
        let mut nodes = vec![0.0; stride * stride];
        let pi = std::f64::consts::PI;
        for j in 0..=n {
            for i in 0..=n {
                nodes[j * stride + i] = amp
                    * (pi * (m * i) as f64 / n as f64).sin()
                    * (pi * (k * j) as f64 / n as f64).sin();
            }
        }
        nodes
    }

    #[test]
    fn forward_recovers_single_mode() {
        let n = 16;
        let nodes = single_mode(n, 3, 5, 2.5);
        let coeffs = forward(n, &nodes);
        let m = n - 1;
        for k in 1..n {
            for mm in 1..n {
                let c = coeffs[(k - 1) * m + (mm - 1)];
                let expect = if (mm, k) == (3, 5) { 2.5 } else { 0.0 };
                assert!(
                    (c - expect).abs() < 1e-12,
                    "coeff ({mm},{k}) = {c}, expected {expect}"
                );
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let n = 32;
        let stride = n + 1;
        // Deterministic pseudo-random interior data.
        let mut nodes = vec![0.0; stride * stride];
        let mut state = 0x2545f4914f6cdd1du64;
        for j in 1..n {
            for i in 1..n {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                nodes[j * stride + i] = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            }
        }
        let back = synth(n, &forward(n, &nodes));
        let worst = nodes
            .iter()
            .zip(&back)
            .fold(0.0f64, |w, (a, b)| w.max((a - b).abs()));
        assert!(worst < 1e-13, "round trip error {worst}");
    }

    #[test]
    fn dx_matches_analytic_derivative() {
        let n = 64;
        let stride = n + 1;
        let nodes = single_mode(n, 2, 3, 1.0);
        let coeffs = forward(n, &nodes);
        let gx = synth_dx(n, &coeffs);
        let gy = synth_dy(n, &coeffs);
        let pi = std::f64::consts::PI;
        let h = 1.0 / (2.0 * n as f64);
        let mut worst = 0.0f64;
        for j in 0..=n {
            for i in 0..=n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                // single_mode samples sin(2 pi m x1) sin(2 pi k x2).
                let ex = 2.0 * pi * 2.0 * (2.0 * pi * 2.0 * x).cos() * (2.0 * pi * 3.0 * y).sin();
                let ey = 2.0 * pi * 3.0 * (2.0 * pi * 2.0 * x).sin() * (2.0 * pi * 3.0 * y).cos();
                worst = worst
                    .max((gx[j * stride + i] - ex).abs())
                    .max((gy[j * stride + i] - ey).abs());
            }
        }
        assert!(worst < 1e-10, "gradient error {worst}");
    }
}

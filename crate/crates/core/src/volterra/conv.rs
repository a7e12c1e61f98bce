//! Product-trapezoid weights for `∫₀ᵗ K(s) ζ(t − s) ds` and two engines for the
//! history sum: direct summation and an online blocked-FFT scheme.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::quad::GaussLegendre;
use crate::specfun::{kernel_k, Mass};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// With `ζ` linear between grid points,
/// `conv_n = a₀ ζ_n + Σ_{k=1}^{n−1} c_k ζ_{n−k} + b_{n−1} ζ₀`, `c_k = a_k + b_{k−1}`.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl KernelWeights {
    /// Weights for `n` intervals of length `h`.
    pub fn new(m: Mass, h: f64, n: usize) -> Self {
        let gl = GaussLegendre::new(8);
        let ab: Vec<(f64, f64)> = (0..n.max(1))
            .into_par_iter()
            .map(|j| {
                let s0 = j as f64 * h;
                let (mut a, mut b) = (0.0, 0.0);
                for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                    let u = 0.5 * (1.0 + x);
                    let k = wt * kernel_k(s0 + h * u, m);
                    a += k * (1.0 - u);
                    b += k * u;
                }
                (0.5 * h * a, 0.5 * h * b)
            })
            .collect();
        let (a, b): (Vec<f64>, Vec<f64>) = ab.into_iter().unzip();
        let mut c = vec![0.0; a.len()];
        for k in 1..a.len() {
            c[k] = a[k] + b[k - 1];
        }
        Self { a, b, c }
    }

    /// `Σ_{k=1}^{n−1} c_k ζ_{n−k} + b_{n−1} ζ₀`, summed in increasing `k`.
    pub fn history_direct(&self, zeta: &[Complex64], n: usize) -> Complex64 {
        if n == 0 {
            return ZERO;
        }
        let mut acc = ZERO;
        for k in 1..n {
            acc += self.c[k] * zeta[n - k];
        }
        acc + self.b[n - 1] * zeta[0]
    }

    /// The full convolution value at step `n`.
    pub fn conv_direct(&self, zeta: &[Complex64], n: usize) -> Complex64 {
        if n == 0 {
            return ZERO;
        }
        self.a[0] * zeta[n] + self.history_direct(zeta, n)
    }
}

/// Strictly causal online convolution `S_s = Σ_{p<s} c_{s−p} x_p`.
///
/// After `x_p` arrives, every level with block length `B` for which `(p+1)/B`
/// is odd pushes the block `x[p+1−B, p+1)` into `S[p+1, p+1+B)` with one FFT
/// product; pairs inside the same leaf are summed directly.
pub(crate) struct BlockedConv {
    leaf: usize,
    kernel: Vec<f64>,
    x: Vec<Complex64>,
    acc: Vec<Complex64>,
    levels: Vec<Level>,
    buf: Vec<Complex64>,
}

struct Level {
    len: usize,
    kernel_hat: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl BlockedConv {
    /// `kernel[k] = c_k` for `k >= 1`; `capacity` bounds the number of pushes.
    pub fn new(kernel: &[f64], capacity: usize, leaf: usize) -> Self {
        let mut planner = FftPlanner::new();
        let mut levels = Vec::new();
        let mut b = leaf;
        while b < capacity {
            let size = 4 * b;
            let fwd = planner.plan_fft_forward(size);
            let inv = planner.plan_fft_inverse(size);
            let mut kh = vec![ZERO; size];
            for (j, v) in kh.iter_mut().enumerate().take(2 * b - 1) {
                *v = Complex64::new(kernel.get(j + 1).copied().unwrap_or(0.0), 0.0);
            }
            fwd.process(&mut kh);
            levels.push(Level {
                len: b,
                kernel_hat: kh,
                fwd,
                inv,
            });
            b *= 2;
        }
        Self {
            leaf,
            kernel: kernel.to_vec(),
            x: Vec::with_capacity(capacity),
            acc: vec![ZERO; 2 * capacity + 2 * leaf],
            buf: vec![ZERO; levels.last().map_or(0, |l| 4 * l.len)],
            levels,
        }
    }

    pub fn push(&mut self, v: Complex64) {
        self.x.push(v);
        let p1 = self.x.len();
        let Self {
            x,
            acc,
            levels,
            buf,
            ..
        } = self;
        for lvl in levels.iter() {
            let b = lvl.len;
            if !p1.is_multiple_of(b) || (p1 / b).is_multiple_of(2) {
                continue;
            }
            let size = 4 * b;
            let buf = &mut buf[..size];
            buf[..b].copy_from_slice(&x[p1 - b..p1]);
            buf[b..].fill(ZERO);
            lvl.fwd.process(buf);
            for (u, k) in buf.iter_mut().zip(&lvl.kernel_hat) {
                *u *= k;
            }
            lvl.inv.process(buf);
            let scale = 1.0 / size as f64;
            for o in 0..b {
                if p1 + o < acc.len() {
                    acc[p1 + o] += buf[b - 1 + o] * scale;
                }
            }
        }
    }

    /// `S_s`; valid once `x_0..x_{s−1}` have been pushed.
    pub fn value(&self, s: usize) -> Complex64 {
        let start = (s / self.leaf) * self.leaf;
        let mut direct = ZERO;
        for p in start..s {
            direct += self.kernel[s - p] * self.x[p];
        }
        self.acc[s] + direct
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Mass {
        Mass::new(1.0).unwrap()
    }

    #[test]
    fn weights_integrate_the_kernel() {
        let h = 0.05;
        let w = KernelWeights::new(unit(), h, 4000);
        let total: f64 = w.a.iter().sum::<f64>() + w.b.iter().sum::<f64>();
        let fine = GaussLegendre::new(24);
        let want: f64 = (0..200)
            .map(|p| fine.integrate(p as f64, p as f64 + 1.0, |s| kernel_k(s, unit())))
            .sum();
        assert!((total - want).abs() < 1e-13);
        // exact for linear ζ
        let zeta: Vec<Complex64> = (0..=100)
            .map(|k| Complex64::new(k as f64 * h, 0.0))
            .collect();
        let n = 100;
        let t = n as f64 * h;
        let gl = GaussLegendre::new(40);
        let mut want = 0.0;
        for p in 0..10 {
            let a = p as f64 * t / 10.0;
            want += gl.integrate(a, a + t / 10.0, |s| kernel_k(s, unit()) * (t - s));
        }
        assert!((w.conv_direct(&zeta, n).re - want).abs() < 1e-13);
    }

    #[test]
    fn blocked_matches_direct() {
        let n = 3000;
        let kernel: Vec<f64> = (0..n + 1)
            .map(|k| 1.0 / (1.0 + k as f64).powf(1.5))
            .collect();
        let x: Vec<Complex64> = (0..n)
            .map(|p| Complex64::new((p as f64 * 0.37).sin(), (p as f64 * 0.11).cos()))
            .collect();
        let mut eng = BlockedConv::new(&kernel, n, 16);
        let mut worst = 0.0f64;
        for s in 0..n {
            let mut want = ZERO;
            for p in 0..s {
                want += kernel[s - p] * x[p];
            }
            worst = worst.max((eng.value(s) - want).norm());
            eng.push(x[s]);
        }
        assert!(worst < 1e-11, "{worst}");
    }
}

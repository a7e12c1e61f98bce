//! Independent numerical routes to the closed-form kernel quantities.
//!
//! Nothing here calls [`k_hat`] or [`l_hat`] to produce a reference value: the
//! J₁ oracle sums the power series in double-double arithmetic, the transform
//! oracle integrates `e^{iωt} K(t)` numerically and adds an asymptotic tail.
//! [`run_kernel_checks`] compares the two routes and backs `verify-kernels`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{bessel_j0, bessel_j1, k_hat, kernel_k, l_hat, Mass};
use crate::quad::GaussLegendre;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Self::two_sum(s.hi, lo)
    }

    fn mul(self, o: Self) -> Self {
        let p = Self::two_prod(self.hi, o.hi);
        let lo = p.lo + self.hi * o.lo + self.lo * o.hi;
        Self::two_sum(p.hi, lo)
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let r = self.add(Self::two_prod(-q1, d));
        let q2 = r.hi / d;
        let r = r.add(Self::two_prod(-q2, d));
        let q3 = r.hi / d;
        Self::two_sum(q1, q2).add(Self::from(q3))
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

/// `J₁(x) = Σ (−1)^k (x/2)^{2k+1} / (k! (k+1)!)` summed term by term in
/// double-double arithmetic. Accurate to ~1e−15 absolute for `0 <= x <= 30`.
pub fn j1_power_series(x: f64) -> f64 {
    let half = DoubleDouble::from(0.5 * x);
    let y = half.mul(half);
    let mut term = half;
    let mut sum = term;
    for k in 0..200 {
        let kf = k as f64;
        term = term.mul(y).div_f64((kf + 1.0) * (kf + 2.0)).neg();
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 * (1.0 + sum.hi.abs()) {
            break;
        }
    }
    sum.hi + sum.lo
}

/// `∫_T^∞ e^{iνt} t^{−α} dt` by repeated integration by parts; needs `|ν| T ≫ α`.
fn oscillatory_tail(nu: f64, alpha: f64, horizon: f64) -> Complex64 {
    let inu = Complex64::new(0.0, nu);
    let lead = -Complex64::from_polar(horizon.powf(-alpha), nu * horizon) / inu;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for j in 0..60 {
        let mag = term.norm();
        if mag > last || mag < 1e-18 {
            break;
        }
        sum += term;
        last = mag;
        term *= (alpha + j as f64) / (inu * horizon);
    }
    lead * sum
}

/// Numerical Fourier–Laplace transform `∫₀^∞ e^{iωt} K(t) dt`.
///
/// The range `[0, horizon]` is integrated with 16-point Gauss–Legendre panels of
/// unit length; the remainder uses the Hankel expansion of `J₁`, whose terms are
/// `t^{−3/2−j} e^{±i m t}` and integrate in closed asymptotic form.
pub fn k_transform_numeric(omega: f64, m: Mass, horizon: f64) -> Complex64 {
    let gl = GaussLegendre::new(16);
    let panels = horizon.ceil() as usize;
    let h = horizon / panels as f64;
    let mut body = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let a = p as f64 * h;
        let re = gl.integrate(a, a + h, |t| (omega * t).cos() * kernel_k(t, m));
        let im = gl.integrate(a, a + h, |t| (omega * t).sin() * kernel_k(t, m));
        body += Complex64::new(re, im);
    }

    // J₁(y) ~ sqrt(2/(πy)) [P cos χ − Q sin χ], χ = y − 3π/4, y = m t.
    // P ± iQ = Σ_j d_j^± y^{−j}: j even -> (−1)^{j/2} a_j, j odd -> ±i (−1)^{(j−1)/2} a_j.
    let mm = m.get();
    let mut a = [0.0f64; 6];
    a[0] = 1.0;
    for k in 1..6 {
        let odd = (2 * k - 1) as f64;
        a[k] = a[k - 1] * (4.0 - odd * odd) / (8.0 * k as f64);
    }
    let pref = 0.5 * (2.0 / (PI * mm)).sqrt();
    let mut tail = Complex64::new(0.0, 0.0);
    for (sign, phase) in [(1.0, -0.75 * PI), (-1.0, 0.75 * PI)] {
        let rot = Complex64::from_polar(pref, phase);
        for (j, aj) in a.iter().enumerate() {
            let sgn = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let d = if j % 2 == 0 {
                Complex64::new(sgn * aj, 0.0)
            } else {
                Complex64::new(0.0, sign * sgn * aj)
            };
            let coeff = rot * d * mm.powi(-(j as i32));
            tail += coeff * oscillatory_tail(omega + sign * mm, 1.5 + j as f64, horizon);
        }
    }
    body + tail
}

/// Richardson-extrapolated `lim_{r→0} L̃(r, ω)` from `r ∈ {h, h/2, h/4}`.
pub fn l_hat_origin_limit(omega: f64, m: Mass, h: f64) -> Option<Complex64> {
    let f1 = l_hat(h, omega, m).ok()?;
    let f2 = l_hat(0.5 * h, omega, m).ok()?;
    let f3 = l_hat(0.25 * h, omega, m).ok()?;
    let r1 = 2.0 * f2 - f1;
    let r2 = 2.0 * f3 - f2;
    Some((4.0 * r2 - r1) / 3.0)
}

/// Tolerances used by [`run_kernel_checks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTolerances {
    pub k_hat_transform: f64,
    pub l_hat_limit: f64,
    pub j1_series: f64,
    pub j1_derivative_identity: f64,
}

impl Default for KernelTolerances {
    fn default() -> Self {
        Self {
            k_hat_transform: 1e-6,
            l_hat_limit: 1e-8,
            j1_series: 1e-12,
            j1_derivative_identity: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl KernelCheck {
    fn new(name: &'static str, max_error: f64, tolerance: f64) -> Self {
        Self {
            name,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }
}

/// Gap frequencies `ω_k = −0.99 m + k · 1.98 m / (n − 1)`.
pub fn gap_grid(m: Mass, n: usize) -> Vec<f64> {
    let w = 0.99 * m.get();
    (0..n)
        .map(|k| -w + 2.0 * w * k as f64 / (n - 1) as f64)
        .collect()
}

/// The kernel oracle suite: transform of `K` against `K̃`, origin limit of `L̃`
/// against `K̃`, `J₁` against its power series, and `d/dx[x J₁] = x J₀`.
pub fn run_kernel_checks(m: Mass, tol: &KernelTolerances) -> Vec<KernelCheck> {
    let grid = gap_grid(m, 101);

    let k_err = grid
        .iter()
        .map(|&w| (k_transform_numeric(w, m, 2000.0) - k_hat(w, m).unwrap()).norm())
        .fold(0.0, f64::max);

    let l_err = grid
        .iter()
        .map(|&w| {
            let lim = l_hat_origin_limit(w, m, 1e-3).unwrap();
            (lim - k_hat(w, m).unwrap()).norm()
        })
        .fold(0.0, f64::max);

    let j_err = (0..=400)
        .map(|i| {
            let x = i as f64 * 0.05;
            (bessel_j1(x) - j1_power_series(x)).abs()
        })
        .fold(0.0, f64::max);

    let h = 1e-5;
    let d_err = (1..=200)
        .map(|i| {
            let x = i as f64 * 0.1;
            let fd = ((x + h) * bessel_j1(x + h) - (x - h) * bessel_j1(x - h)) / (2.0 * h);
            (fd - x * bessel_j0(x)).abs()
        })
        .fold(0.0, f64::max);

    vec![
        KernelCheck::new("k_hat_vs_numeric_transform", k_err, tol.k_hat_transform),
        KernelCheck::new("l_hat_origin_limit_vs_k_hat", l_err, tol.l_hat_limit),
        KernelCheck::new("j1_vs_power_series", j_err, tol.j1_series),
        KernelCheck::new("d_dx_xj1_equals_xj0", d_err, tol.j1_derivative_identity),
    ]
}

//! Solitary waves `ψ = q e^{iθ} e^{−iωt} e^{−κr}/(4πr)`, `κ = √(m² − ω²)`, and the
//! distance from a field snapshot to the set of all of them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ball_integral, FieldSnapshot};
use crate::nonlinearity::{radial_b, PolynomialPotential};
use crate::poly::{real_roots_in, root_bound};
use crate::specfun::Mass;

const FOUR_PI: f64 = 4.0 * PI;
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitaryWave {
    omega: f64,
    q: f64,
    theta: f64,
}

impl SolitaryWave {
    /// Validates `|ω| < m` and the amplitude equation; `q = 0` (the zero wave) is always accepted.
    pub fn new(omega: f64, q: f64, theta: f64, p: &PolynomialPotential, m: Mass) -> Result<Self> {
        if !(omega.abs() < m.get()) {
            return Err(Error::Domain(format!(
                "solitary waves need |omega| < m, got omega = {omega}"
            )));
        }
        if !(q >= 0.0 && q.is_finite() && theta.is_finite()) {
            return Err(Error::Config(format!(
                "invalid amplitude q = {q} or phase {theta}"
            )));
        }
        let res = amplitude_residual(p, m, omega, q);
        if q > 0.0 && res > RESIDUAL_TOL {
            return Err(Error::Config(format!(
                "(omega, q) = ({omega}, {q}) misses the amplitude equation by {res:e}"
            )));
        }
        Ok(Self {
            omega,
            q,
            theta: theta.rem_euclid(2.0 * PI),
        })
    }

    pub fn zero() -> Self {
        Self {
            omega: 0.0,
            q: 0.0,
            theta: 0.0,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `q e^{iθ}`, the value of `ζ` at `t = 0`.
    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.q, self.theta)
    }

    pub fn decay_rate(&self, m: Mass) -> f64 {
        decay(self.omega, m)
    }
}

fn decay(omega: f64, m: Mass) -> f64 {
    let m = m.get();
    ((m - omega) * (m + omega)).max(0.0).sqrt()
}

/// `|m − √(m² − ω²) − 4π b(q²)|`.
fn amplitude_residual(p: &PolynomialPotential, m: Mass, omega: f64, q: f64) -> f64 {
    (m.get() - decay(omega, m) - FOUR_PI * radial_b(p, q * q)).abs()
}

/// All `q >= 0` with `4π b(q²) = m − √(m² − ω²)`, ascending.
pub fn solve_amplitudes(p: &PolynomialPotential, omega: f64, m: Mass) -> Result<Vec<f64>> {
    if !(omega.abs() < m.get()) {
        return Err(Error::Domain(format!(
            "nonzero solitary waves may exist only for omega in (-m, m); got omega = {omega}, m = {}",
            m.get()
        )));
    }
    let rhs = (m.get() - decay(omega, m)) / FOUR_PI;
    let mut poly = p.b_coeffs();
    poly[0] -= rhs;
    let scale = poly.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let lo = -1e-12 * scale.max(1.0);
    let roots = real_roots_in(&poly, lo, root_bound(&poly));
    let mut out: Vec<f64> = roots
        .into_iter()
        .map(|s| polish(p, rhs, s.max(0.0)).sqrt())
        .filter(|&q| amplitude_residual(p, m, omega, q) <= RESIDUAL_TOL)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    Ok(out)
}

/// Newton steps on `b(s) − rhs`, kept only while they reduce the residual.
fn polish(p: &PolynomialPotential, rhs: f64, mut s: f64) -> f64 {
    for _ in 0..4 {
        let f = radial_b(p, s) - rhs;
        let d = p.b_prime(s);
        if d == 0.0 || f == 0.0 {
            break;
        }
        let next = (s - f / d).max(0.0);
        if (radial_b(p, next) - rhs).abs() >= f.abs() {
            break;
        }
        s = next;
    }
    s
}

/// `q e^{iθ} e^{−κ r} / (4π r)`.
pub fn soliton_profile(w: &SolitaryWave, r: f64, m: Mass) -> Result<Complex64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!(
            "soliton_profile: r must be positive, got {r}"
        )));
    }
    Ok(w.amplitude() * ((-w.decay_rate(m) * r).exp() / (FOUR_PI * r)))
}

/// `|(√(m² − ω²) − m)/(4π) + b(q²)|`: how far `η = q e^{−iωt}` is from solving the
/// stationary limit equation.
pub fn stationary_residual(p: &PolynomialPotential, m: Mass, omega: f64, q: f64) -> f64 {
    ((decay(omega, m) - m.get()) / FOUR_PI + radial_b(p, q * q)).abs()
}

/// `w = r ψ` and `r ψ̇` on the nodes `0, Δr, …`, the form in which the snapshot is integrated.
struct Weighted<'a> {
    dr: f64,
    psi: &'a [Complex64],
    dot: &'a [Complex64],
    radii: Vec<f64>,
}

impl Weighted<'_> {
    /// Truncated metric against the wave `(ω, q)` with the phase chosen to
    /// maximise the weighted overlap. Returns `(distance, θ)`.
    fn distance(&self, omega: f64, q: f64, m: Mass) -> (f64, f64) {
        let kappa = decay(omega, m);
        let n = self.psi.len();
        let a: Vec<f64> = (0..n)
            .map(|k| q * (-kappa * k as f64 * self.dr).exp() / FOUR_PI)
            .collect();
        let iw = Complex64::new(0.0, omega);

        let theta = if q > 0.0 {
            let re: Vec<f64> = (0..n)
                .map(|k| (a[k] * (self.psi[k] + iw * self.dot[k])).re)
                .collect();
            let im: Vec<f64> = (0..n)
                .map(|k| (a[k] * (self.psi[k] + iw * self.dot[k])).im)
                .collect();
            let mut c = Complex64::new(0.0, 0.0);
            for (i, &r) in self.radii.iter().enumerate() {
                let wgt = 0.5f64.powi(i as i32 + 1);
                c += wgt
                    * Complex64::new(
                        ball_integral(&re, self.dr, r),
                        ball_integral(&im, self.dr, r),
                    );
            }
            c.arg()
        } else {
            0.0
        };

        let rot = Complex64::from_polar(1.0, theta);
        let dens: Vec<f64> = (0..n)
            .map(|k| {
                let c = rot * a[k];
                (self.psi[k] - c).norm_sqr() + (self.dot[k] + iw * c).norm_sqr()
            })
            .collect();
        let dist = self
            .radii
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let d = (FOUR_PI * ball_integral(&dens, self.dr, r)).max(0.0).sqrt();
                0.5f64.powi(i as i32 + 1) * d / (1.0 + d)
            })
            .sum();
        (dist, theta)
    }
}

/// Distance from `snap` to the solitary manifold in the metric
/// `Σ_{R=1}^{R_max} 2^{−R} d_R / (1 + d_R)`, with the minimising wave.
///
/// Candidates are the zero wave and every root of the amplitude equation on 201
/// interior frequencies, followed by golden-section refinement of `ω` around the
/// best grid point.
pub fn manifold_distance(
    snap: &FieldSnapshot,
    p: &PolynomialPotential,
    m: Mass,
    r_max: u32,
) -> Result<(f64, SolitaryWave)> {
    if r_max == 0 {
        return Err(Error::Config(
            "manifold_distance: R_max must be at least 1".into(),
        ));
    }
    let dr = snap.dr();
    if snap.r_grid().iter().filter(|&&r| r <= 1.0).count() < 4 {
        return Err(Error::Config(format!(
            "radial grid too coarse: fewer than 4 samples inside the unit ball (dr = {dr})"
        )));
    }
    if snap.r_out() < r_max as f64 - 1e-9 {
        return Err(Error::Config(format!(
            "snapshot outer radius {} is smaller than R_max = {r_max}",
            snap.r_out()
        )));
    }
    let (psi, dot) = snap.weighted();
    let w = Weighted {
        dr,
        psi: &psi,
        dot: &dot,
        radii: (1..=r_max).map(|r| r as f64).collect(),
    };

    let mm = m.get();
    let n_grid = 201;
    let step = 2.0 * mm / (n_grid + 1) as f64;
    let grid: Vec<f64> = (1..=n_grid).map(|k| -mm + k as f64 * step).collect();

    let best = grid
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &omega)| {
            let roots = solve_amplitudes(p, omega, m).unwrap_or_default();
            let w = &w;
            roots.into_iter().filter(|&q| q > 0.0).map(move |q| {
                let (d, th) = w.distance(omega, q, m);
                (d, i, q, th)
            })
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let (zero_dist, _) = w.distance(0.0, 0.0, m);
    let Some((mut best_d, i, q0, mut best_th)) = best else {
        return Ok((zero_dist, SolitaryWave::zero()));
    };
    let mut best_w = (grid[i], q0);

    // Refine on the branch through (ω_i, q0).
    let branch = |omega: f64| -> Option<f64> {
        let roots = solve_amplitudes(p, omega, m).ok()?;
        roots
            .into_iter()
            .filter(|&q| q > 0.0)
            .min_by(|a, b| (a - q0).abs().total_cmp(&(b - q0).abs()))
    };
    let eval = |omega: f64| -> (f64, f64, f64) {
        match branch(omega) {
            Some(q) => {
                let (d, th) = w.distance(omega, q, m);
                (d, q, th)
            }
            None => (f64::INFINITY, 0.0, 0.0),
        }
    };
    let (mut lo, mut hi) = (grid[i] - step, grid[i] + step);
    let lim = mm * (1.0 - 1e-12);
    lo = lo.max(-lim);
    hi = hi.min(lim);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..60 {
        if f1.0 <= f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(x2);
        }
        if hi - lo < 1e-12 * mm {
            break;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f.0 < best_d {
            best_d = f.0;
            best_w = (x, f.1);
            best_th = f.2;
        }
    }

    if zero_dist <= best_d {
        return Ok((zero_dist, SolitaryWave::zero()));
    }
    let wave = SolitaryWave::new(best_w.0, best_w.1, best_th, p, m)?;
    Ok((best_d, wave))
}

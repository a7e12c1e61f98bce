//! Special functions and closed-form symbols of the point-interaction
//! Klein–Gordon problem: memory kernel `K`, retarded kernel `L`, the Green's
//! function of `-Δ + m²`, the branch `κ(ω)` and the Fourier transforms of `K`
//! and `L` on the spectral gap.

mod bessel;
pub mod oracles;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use bessel::{bessel_j0, bessel_j1, scaled_bessel, ScaledBessel};

/// Mass parameter of the Klein–Gordon equation (wave speed is 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Mass(f64);

impl Mass {
    pub fn new(m: f64) -> Result<Self> {
        if m.is_finite() && m > 0.0 {
            Ok(Self(m))
        } else {
            Err(Error::Config(format!(
                "mass must be finite and positive, got {m}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// `K(t) = J_1(m t) / t`, with the removable value `m/2` at `t = 0` and 0 for `t < 0`.
pub fn kernel_k(t: f64, m: Mass) -> f64 {
    kernel_l(0.0, t, m)
}

/// `L(r, t) = θ(t - r) J_1(m √(t² - r²)) / √(t² - r²)`; `m/2` on the light cone.
pub fn kernel_l(r: f64, t: f64, m: Mass) -> f64 {
    if t < r {
        return 0.0;
    }
    let m = m.get();
    let x = m * ((t - r) * (t + r)).sqrt();
    m * scaled_bessel(x).j1_x
}

/// `L(r, t)` together with `∂_t L` and `∂²_t L` (zero outside the cone).
///
/// With `x = m √(t² − r²)`: `∂_t L = −m³ t J₂(x)/x²` and
/// `∂²_t L = −m³ J₂(x)/x² + m⁵ t² J₃(x)/x³`, all smooth up to the cone.
pub(crate) fn kernel_l_derivs(r: f64, t: f64, m: Mass) -> [f64; 3] {
    if t < r {
        return [0.0; 3];
    }
    let m = m.get();
    let m3 = m * m * m;
    let s = scaled_bessel(m * ((t - r) * (t + r)).sqrt());
    [
        m * s.j1_x,
        -m3 * t * s.j2_x2,
        -m3 * s.j2_x2 + m3 * m * m * t * t * s.j3_x3,
    ]
}

/// Green's function `e^{−m r} / (4π r)` of `−Δ + m²` in three dimensions.
pub fn green_g(r: f64, m: Mass) -> Result<f64> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!(
            "green_g: r must be positive, got {r}"
        )));
    }
    Ok((-m.get() * r).exp() / (4.0 * PI * r))
}

/// Boundary value from the upper half-plane of `√(ω² − m²)` with `Im κ > 0`:
/// `i √(m² − ω²)` inside the gap and `sign(ω) √(ω² − m²)` outside it.
pub fn kappa(omega: f64, m: Mass) -> Complex64 {
    let m = m.get();
    let d = (omega - m) * (omega + m);
    if d < 0.0 {
        Complex64::new(0.0, (-d).sqrt())
    } else if d > 0.0 {
        Complex64::new(omega.signum() * d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn check_gap(omega: f64, m: Mass, what: &str) -> Result<f64> {
    let m = m.get();
    if !omega.is_finite() || omega.abs() > m {
        return Err(Error::Domain(format!(
            "{what}: |omega| = {} lies outside the gap [-{m}, {m}]",
            omega.abs()
        )));
    }
    Ok(((m - omega) * (m + omega)).max(0.0).sqrt())
}

/// `K̃(ω) = ∫₀^∞ e^{iωt} K(t) dt = (√(m² − ω²) + iω)/m` for `|ω| ≤ m`.
pub fn k_hat(omega: f64, m: Mass) -> Result<Complex64> {
    let root = check_gap(omega, m, "k_hat")?;
    Ok(Complex64::new(root, omega) / m.get())
}

/// `L̃(r, ω) = (e^{iωr} − e^{−√(m² − ω²) r}) / (m r)` for `r > 0`, `|ω| ≤ m`.
pub fn l_hat(r: f64, omega: f64, m: Mass) -> Result<Complex64> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!(
            "l_hat: r must be positive (use k_hat for r -> 0), got {r}"
        )));
    }
    let root = check_gap(omega, m, "l_hat")?;
    // e^{iωr} − e^{−√(m²−ω²) r} written without cancellation for small r.
    let half = 0.5 * omega * r;
    let osc_minus_one = Complex64::new(-2.0 * half.sin().powi(2), (omega * r).sin());
    let decay_minus_one = (-root * r).exp_m1();
    Ok((osc_minus_one - decay_minus_one) / (m.get() * r))
}

//! Full-field reconstruction `ψ = ψ_f + ψ_S`, local norms and energy.
//!
//! Radial integrals are done on `w = r ψ`, which is smooth at the origin and
//! tends to `ζ/(4π)`; then `∫_{B_R} |ψ|² = 4π ∫₀ᴿ |w|² dr`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freefield::{freefield_eval, RadialState};
use crate::nonlinearity::{force_f, potential_u, PolynomialPotential};
use crate::quad::QuadratureConfig;
use crate::specfun::{kernel_l, Mass};
use crate::volterra::Trajectory;

const FOUR_PI: f64 = 4.0 * PI;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Largest `|ψ_reg(R_out)|` for which the energy is reported without a warning.
pub const TAIL_TOL: f64 = 1e-6;

/// Uniform grid `r_k = k Δr`, `k = 1..=M`, `r_M = R_out`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    dr: f64,
    r_out: f64,
}

impl RadialGrid {
    pub fn new(dr: f64, r_out: f64) -> Result<Self> {
        if !(dr > 0.0 && r_out >= 4.0 * dr && r_out.is_finite()) {
            return Err(Error::Config(format!(
                "radial grid needs dr > 0 and R_out >= 4 dr (dr = {dr}, R_out = {r_out})"
            )));
        }
        let m = (r_out / dr).round();
        if ((m * dr) - r_out).abs() > 1e-9 * r_out {
            return Err(Error::Config(format!(
                "R_out = {r_out} is not a multiple of dr = {dr}"
            )));
        }
        Ok(Self { dr, r_out })
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn r_out(&self) -> f64 {
        self.r_out
    }

    pub fn radii(&self) -> Vec<f64> {
        let m = (self.r_out / self.dr).round() as usize;
        (1..=m).map(|k| k as f64 * self.dr).collect()
    }
}

/// `(ψ, ψ̇)` on a radial grid at time `t`, with `ζ(t)` and `η = ζ̇(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    r_grid: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub psi_dot: Vec<Complex64>,
    pub zeta: Complex64,
    pub eta: Complex64,
}

impl FieldSnapshot {
    /// The grid must be `Δr, 2Δr, …`.
    pub fn new(
        t: f64,
        r_grid: Vec<f64>,
        psi: Vec<Complex64>,
        psi_dot: Vec<Complex64>,
        zeta: Complex64,
        eta: Complex64,
    ) -> Result<Self> {
        if r_grid.len() < 4 || psi.len() != r_grid.len() || psi_dot.len() != r_grid.len() {
            return Err(Error::Input(
                "snapshot needs at least 4 radii and matching samples".into(),
            ));
        }
        let dr = r_grid[0];
        if !(dr > 0.0) {
            return Err(Error::Input(
                "snapshot grid must start at r = dr > 0".into(),
            ));
        }
        for (k, r) in r_grid.iter().enumerate() {
            if ((k + 1) as f64 * dr - r).abs() > 1e-9 * r {
                return Err(Error::Input(
                    "snapshot grid must be uniform, r_k = k dr".into(),
                ));
            }
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !psi.iter().chain(&psi_dot).chain([&zeta, &eta]).all(finite) {
            return Err(Error::Input("snapshot samples must be finite".into()));
        }
        Ok(Self {
            t,
            r_grid,
            psi,
            psi_dot,
            zeta,
            eta,
        })
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    pub fn dr(&self) -> f64 {
        self.r_grid[0]
    }

    pub fn r_out(&self) -> f64 {
        *self.r_grid.last().unwrap()
    }

    /// `r ψ` and `r ψ̇` on `0, Δr, …, R_out`.
    pub fn weighted(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut w = Vec::with_capacity(self.r_grid.len() + 1);
        let mut v = Vec::with_capacity(self.r_grid.len() + 1);
        w.push(self.zeta / FOUR_PI);
        v.push(self.eta / FOUR_PI);
        for (k, r) in self.r_grid.iter().enumerate() {
            w.push(self.psi[k] * *r);
            v.push(self.psi_dot[k] * *r);
        }
        (w, v)
    }

    /// `ψ_reg = ψ − ζ G` on the grid.
    pub fn psi_reg(&self, m: Mass) -> Vec<Complex64> {
        self.r_grid
            .iter()
            .zip(&self.psi)
            .map(|(&r, &p)| p - self.zeta * ((-m.get() * r).exp() / (FOUR_PI * r)))
            .collect()
    }

    /// `e^{iθ}` times the snapshot.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = Complex64::from_polar(1.0, theta);
        Self {
            t: self.t,
            r_grid: self.r_grid.clone(),
            psi: self.psi.iter().map(|z| z * r).collect(),
            psi_dot: self.psi_dot.iter().map(|z| z * r).collect(),
            zeta: self.zeta * r,
            eta: self.eta * r,
        }
    }
}

/// Composite Simpson on equally spaced samples; a 3/8 panel closes an odd count.
fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (v[0] + v[1]),
        _ => {
            let (even_part, tail) = if n.is_multiple_of(2) {
                (n, 0.0)
            } else {
                let k = n - 3;
                (
                    k,
                    3.0 * h / 8.0 * (v[k] + 3.0 * v[k + 1] + 3.0 * v[k + 2] + v[k + 3]),
                )
            };
            let mut s = 0.0;
            for i in (0..even_part).step_by(2) {
                s += v[i] + 4.0 * v[i + 1] + v[i + 2];
            }
            s * h / 3.0 + tail
        }
    }
}

/// `∫₀ᴿ f` for samples `f(k Δr)`, `k = 0, 1, …`; linear interpolation past the last full node.
pub(crate) fn ball_integral(v: &[f64], dr: f64, r: f64) -> f64 {
    let x = r / dr;
    let k = ((x + 1e-9).floor() as usize).min(v.len() - 1);
    let mut s = simpson(&v[..=k], dr);
    let frac = x - k as f64;
    if frac > 1e-9 && k + 1 < v.len() {
        let end = v[k] + frac * (v[k + 1] - v[k]);
        s += 0.5 * frac * dr * (v[k] + end);
    }
    s
}

/// `(ψ_S, ψ̇_S)(r, t)`.
///
/// `ζ` is interpolated by cubic Hermite polynomials and `ζ̇` linearly inside each
/// grid interval of the retarded integral, which runs over `τ ∈ [0, t − r]`.
pub fn psi_s_pair(traj: &Trajectory, r: f64, t: f64, m: Mass) -> Result<(Complex64, Complex64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("psi_S: r must be positive, got {r}")));
    }
    if !(t >= 0.0) || t > traj.t_end() * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::Input(format!(
            "psi_S: t = {t} outside the trajectory [0, {}]",
            traj.t_end()
        )));
    }
    if t < r {
        return Ok((ZERO, ZERO));
    }
    let mm = m.get();
    let tau_max = t - r;
    let h = traj.dt();
    let z = traj.zeta();
    let zd = traj.zeta_dot();
    let nodes = [-(0.6f64.sqrt()), 0.0, 0.6f64.sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut iz = ZERO;
    let mut izd = ZERO;
    let mut j = 0usize;
    while (j as f64) * h < tau_max {
        let a = j as f64 * h;
        let b = ((j + 1) as f64 * h).min(tau_max);
        let (z0, z1, d0, d1) = (z[j], z[j + 1], zd[j], zd[j + 1]);
        let half = 0.5 * (b - a);
        for (x, wgt) in nodes.iter().zip(weights) {
            let tau = a + half * (1.0 + x);
            let s = (tau - a) / h;
            let l = kernel_l(r, t - tau, m) * wgt * half;
            let (h00, h10, h01, h11) = (
                (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
                s * (1.0 - s) * (1.0 - s),
                s * s * (3.0 - 2.0 * s),
                s * s * (s - 1.0),
            );
            iz += l * (z0 * h00 + d0 * (h10 * h) + z1 * h01 + d1 * (h11 * h));
            izd += l * (d0 * (1.0 - s) + d1 * s);
        }
        j += 1;
    }
    let c = mm / FOUR_PI;
    let psi = traj.zeta_at(tau_max)? / (FOUR_PI * r) - c * iz;
    let dot = traj.zeta_dot_at(tau_max)? / (FOUR_PI * r) - c * kernel_l(r, t, m) * z[0] - c * izd;
    Ok((psi, dot))
}

/// `ψ_S(r, t) = θ(t − r) ζ(t − r)/(4πr) − (m/4π) ∫_r^t L(r, s) ζ(t − s) ds`.
pub fn psi_s_eval(traj: &Trajectory, r: f64, t: f64, m: Mass) -> Result<Complex64> {
    psi_s_pair(traj, r, t, m).map(|p| p.0)
}

/// `ψ̇_S(r, t)`, including the `L(r, t) ζ(0)` boundary term.
pub fn psi_s_dot_eval(traj: &Trajectory, r: f64, t: f64, m: Mass) -> Result<Complex64> {
    psi_s_pair(traj, r, t, m).map(|p| p.1)
}

/// `ψ = ψ_f + ψ_S` and `ψ̇` on `grid` at time `t`.
pub fn snapshot(
    state: &RadialState,
    traj: &Trajectory,
    t: f64,
    grid: &RadialGrid,
    m: Mass,
    quad: &QuadratureConfig,
) -> Result<FieldSnapshot> {
    let radii = grid.radii();
    let vals: Vec<(Complex64, Complex64)> = radii
        .par_iter()
        .map(|&r| {
            let (pf, df) = freefield_eval(state, r, t, m, quad)?;
            let (ps, ds) = psi_s_pair(traj, r, t, m)?;
            Ok((pf + ps, df + ds))
        })
        .collect::<Result<_>>()?;
    let (psi, psi_dot) = vals.into_iter().unzip();
    FieldSnapshot::new(
        t,
        radii,
        psi,
        psi_dot,
        traj.zeta_at(t)?,
        traj.zeta_dot_at(t)?,
    )
}

/// `(∫_{B_R} |ψ|² + |ψ̇|²)^{1/2}`.
pub fn local_norm(snap: &FieldSnapshot, r: f64) -> Result<f64> {
    if !(r >= 0.0) || r > snap.r_out() * (1.0 + 1e-12) {
        return Err(Error::Input(format!(
            "local_norm: R = {r} exceeds the grid radius {}",
            snap.r_out()
        )));
    }
    let (w, v) = snap.weighted();
    let dens: Vec<f64> = w
        .iter()
        .zip(&v)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect();
    Ok((FOUR_PI * ball_integral(&dens, snap.dr(), r))
        .max(0.0)
        .sqrt())
}

/// `lim_{r→0} ψ_reg` by quadratic extrapolation from the three innermost radii.
pub fn psi_reg_at_origin(snap: &FieldSnapshot, m: Mass) -> Complex64 {
    let reg = snap.psi_reg(m);
    3.0 * reg[0] - 3.0 * reg[1] + reg[2]
}

/// `|ψ_reg(0) − F(ζ)|` with `ψ_reg(0)` extrapolated.
pub fn domain_condition_defect(snap: &FieldSnapshot, p: &PolynomialPotential, m: Mass) -> f64 {
    (psi_reg_at_origin(snap, m) - force_f(p, snap.zeta)).norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub value: f64,
    /// Estimated contribution of `r > R_out`.
    pub tail_estimate: f64,
    /// Set when `|ψ_reg(R_out)|` exceeds [`TAIL_TOL`].
    pub tail_warning: bool,
}

/// `½(‖ψ̇‖² + ‖∂_r ψ_reg‖² + m² ‖ψ_reg‖²) + U(ζ)` over the ball of radius `R_out`.
pub fn energy(snap: &FieldSnapshot, p: &PolynomialPotential, m: Mass) -> EnergyReport {
    let mm = m.get();
    let dr = snap.dr();
    let n = snap.r_grid.len();
    let mut reg = Vec::with_capacity(n + 1);
    reg.push(psi_reg_at_origin(snap, m));
    reg.extend(snap.psi_reg(m));
    let deriv = fd4(&reg, dr);
    let (_, v) = snap.weighted();
    let dens: Vec<f64> = (0..=n)
        .map(|k| {
            let r = k as f64 * dr;
            0.5 * FOUR_PI
                * (v[k].norm_sqr() + r * r * (deriv[k].norm_sqr() + mm * mm * reg[k].norm_sqr()))
        })
        .collect();
    let value = simpson(&dens, dr) + potential_u(p, snap.zeta);

    // Exponential fit of the density over the outer quarter.
    let start = 3 * n / 4;
    let pts: Vec<(f64, f64)> = (start..=n)
        .filter(|&k| dens[k] > 0.0)
        .map(|k| (k as f64 * dr, dens[k].ln()))
        .collect();
    let last = dens[n].max(0.0);
    let tail_estimate = if pts.len() >= 4 {
        let (slope, _) = linear_fit(&pts);
        if slope < 0.0 {
            last / (-slope)
        } else {
            last * snap.r_out()
        }
    } else {
        last * dr
    };
    let tail_warning = reg[n].norm() > TAIL_TOL;
    EnergyReport {
        value,
        tail_estimate,
        tail_warning,
    }
}

/// Fourth-order finite differences, one-sided at the ends.
fn fd4(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    (0..n)
        .map(|k| {
            let d = if k >= 2 && k + 2 < n {
                f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]
            } else if k < 2 {
                let s = &f[k..k + 5];
                if k == 0 {
                    -25.0 * s[0] + 48.0 * s[1] - 36.0 * s[2] + 16.0 * s[3] - 3.0 * s[4]
                } else {
                    -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]
                }
            } else if k == n - 1 {
                let s = &f[n - 5..];
                25.0 * s[4] - 48.0 * s[3] + 36.0 * s[2] - 16.0 * s[1] + 3.0 * s[0]
            } else {
                3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]
            };
            d / (12.0 * h)
        })
        .collect()
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Mass {
        Mass::new(1.0).unwrap()
    }

    fn green_snapshot(dr: f64, r_out: f64) -> FieldSnapshot {
        let g = RadialGrid::new(dr, r_out).unwrap();
        let r = g.radii();
        let psi = r
            .iter()
            .map(|&x| Complex64::new((-x).exp() / (FOUR_PI * x), 0.0))
            .collect();
        FieldSnapshot::new(
            0.0,
            r.clone(),
            psi,
            vec![ZERO; r.len()],
            Complex64::new(1.0, 0.0),
            ZERO,
        )
        .unwrap()
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        for n in [2usize, 3, 4, 5, 8, 11] {
            let h = 1.0 / n as f64;
            let v: Vec<f64> = (0..=n).map(|k| (k as f64 * h).powi(3)).collect();
            assert!((simpson(&v, h) - 0.25).abs() < 1e-15, "{n}");
        }
    }

    #[test]
    fn fd4_is_exact_for_quartics() {
        let h = 0.1;
        let f: Vec<Complex64> = (0..12)
            .map(|k| Complex64::new((k as f64 * h).powi(4), 0.0))
            .collect();
        let d = fd4(&f, h);
        for (k, dk) in d.iter().enumerate() {
            let x = k as f64 * h;
            assert!((dk.re - 4.0 * x.powi(3)).abs() < 1e-11, "{k}");
        }
    }

    #[test]
    fn green_norm() {
        let s = green_snapshot(0.05, 40.0);
        let n = local_norm(&s, 40.0).unwrap();
        assert!(
            (n * n - 1.0 / (8.0 * PI)).abs() < 1e-7,
            "{}",
            n * n - 1.0 / (8.0 * PI)
        );
        let mut prev = 0.0;
        for r in [0.5, 1.0, 2.37, 10.0] {
            let v = local_norm(&s, r).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(local_norm(&s, 41.0).is_err());
        // ψ_reg ≡ 0, so the condition holds only where F(ζ) = 0
        assert!(
            domain_condition_defect(
                &s,
                &PolynomialPotential::new(vec![0.0, 0.0, 1.0]).unwrap(),
                unit()
            ) > 0.1
        );
        let q = 0.5f64.sqrt();
        let mut t = s.clone();
        t.psi.iter_mut().for_each(|z| *z *= q);
        t.zeta *= q;
        assert!(domain_condition_defect(&t, &PolynomialPotential::cubic_quintic(), unit()) < 1e-12);
    }

    #[test]
    fn zero_snapshot() {
        let g = RadialGrid::new(0.1, 5.0).unwrap();
        let r = g.radii();
        let s = FieldSnapshot::new(
            1.0,
            r.clone(),
            vec![ZERO; r.len()],
            vec![ZERO; r.len()],
            ZERO,
            ZERO,
        )
        .unwrap();
        assert_eq!(local_norm(&s, 5.0).unwrap(), 0.0);
        let e = energy(&s, &PolynomialPotential::cubic_quintic(), unit());
        assert_eq!(e.value, 0.0);
        assert!(!e.tail_warning);
    }

    #[test]
    fn energy_of_static_soliton() {
        // ω = 0: ψ = q G, ψ̇ = 0, so H = U(q).
        let q = 0.5f64.sqrt();
        let mut s = green_snapshot(0.05, 30.0);
        s.psi.iter_mut().for_each(|z| *z *= q);
        s.zeta *= q;
        let e = energy(&s, &PolynomialPotential::cubic_quintic(), unit());
        assert!((e.value + 0.25).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn energy_of_regular_gaussian() {
        // ψ = e^{−r²}, ψ̇ = 0, ζ = 0; ‖∇ψ‖² = 3 (π/2)^{3/2}, ‖ψ‖² = (π/2)^{3/2}
        let c = (PI / 2.0).powf(1.5);
        let p = PolynomialPotential::new(vec![0.0, 0.0, 1.0]).unwrap();
        let err = |dr: f64| {
            let g = RadialGrid::new(dr, 8.0).unwrap();
            let r = g.radii();
            let psi = r
                .iter()
                .map(|&x| Complex64::new((-x * x).exp(), 0.0))
                .collect();
            let s =
                FieldSnapshot::new(0.0, r.clone(), psi, vec![ZERO; r.len()], ZERO, ZERO).unwrap();
            (energy(&s, &p, unit()).value - 2.0 * c).abs()
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e1 < 1e-6, "{e1}");
        assert!(e2 < e1 / 8.0, "{e1} {e2}");
    }

    #[test]
    fn causality_and_zero() {
        let z = vec![Complex64::new(1.0, 0.0); 101];
        let tr = Trajectory::from_samples(unit(), 0.1, z).unwrap();
        assert_eq!(psi_s_eval(&tr, 3.0, 2.9, unit()).unwrap(), ZERO);
        assert_eq!(psi_s_dot_eval(&tr, 3.0, 2.0, unit()).unwrap(), ZERO);
        assert!(psi_s_eval(&tr, 0.0, 2.0, unit()).is_err());
        assert!(psi_s_eval(&tr, 1.0, 11.0, unit()).is_err());
        let zero = Trajectory::from_samples(unit(), 0.1, vec![ZERO; 101]).unwrap();
        assert_eq!(psi_s_eval(&zero, 1.0, 5.0, unit()).unwrap(), ZERO);
    }

    #[test]
    fn dot_matches_time_difference() {
        let dt = 0.01;
        let z: Vec<Complex64> = (0..=2000)
            .map(|k| {
                let t = k as f64 * dt;
                Complex64::new(0.3 + 0.2 * (0.7 * t).cos(), 0.1 * (1.3 * t).sin())
            })
            .collect();
        let tr = Trajectory::from_samples(unit(), dt, z).unwrap();
        for (r, t) in [(0.5, 5.0), (2.0, 12.3), (1.0, 18.0)] {
            let d = psi_s_dot_eval(&tr, r, t, unit()).unwrap();
            let h = 0.01;
            let fd = (psi_s_eval(&tr, r, t + h, unit()).unwrap()
                - psi_s_eval(&tr, r, t - h, unit()).unwrap())
                / (2.0 * h);
            assert!((d - fd).norm() < 1e-5, "({r},{t}) {d} vs {fd}");
        }
    }

    #[test]
    fn constant_amplitude_dot() {
        let tr =
            Trajectory::from_samples(unit(), 0.05, vec![Complex64::new(0.7, 0.0); 801]).unwrap();
        let (r, t) = (1.0, 30.0);
        let d = psi_s_dot_eval(&tr, r, t, unit()).unwrap();
        let want = -0.7 / FOUR_PI * kernel_l(r, t, unit());
        assert!((d.re - want).abs() < 1e-10);
    }
}

//! Radial initial data and the free Klein–Gordon evolution it generates.
//!
//! For a radial datum `h` with `q(s) = s h(s)` and `P(x) = ∫₀ˣ q`, the spherical
//! means of the free propagator reduce to
//!
//! ```text
//! W_h(ρ, t) = M(ρ, t)/(2ρ) − (m/2ρ) ∫₀ᵗ u L(u, t) M(ρ, u) du,   M(ρ, u) = P(ρ+u) − P(|ρ−u|),
//! ```
//!
//! the solution with data `(0, h)`. The solution with data `(f, g)` is
//! `∂_t W_f + W_g`. Letting `ρ → 0` gives the trace
//! `λ(t) = ∂_t A_f + A_g` with `A_h(t) = q(t) − m ∫₀ᵗ u L(u, t) q(u) du`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nonlinearity::{force_f, PolynomialPotential};
use crate::profile::{Profile, Shape};
use crate::quad::{integrate, QuadratureConfig};
use crate::solitary::SolitaryWave;
use crate::specfun::{kernel_l_derivs, Mass};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const SUPPORT_TOL: f64 = 1e-18;

/// Radial data `ψ₀ = ψ_reg + ζ₀ G`, `π₀ = π_reg + η₀ G`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    psi_reg: Profile,
    pi_reg: Profile,
    zeta0: Complex64,
    eta0: Complex64,
    mass: Mass,
    full_psi: Profile,
    full_pi: Profile,
}

impl RadialState {
    /// The regular parts must be finite at the origin. Membership in the
    /// nonlinear domain is checked separately by [`RadialState::domain_defect`].
    pub fn new(
        psi_reg: Profile,
        pi_reg: Profile,
        zeta0: Complex64,
        eta0: Complex64,
        m: Mass,
    ) -> Result<Self> {
        if psi_reg.value_at_origin().is_none() || pi_reg.value_at_origin().is_none() {
            return Err(Error::Config(
                "regular parts of the initial data must be finite at r = 0".into(),
            ));
        }
        for z in [zeta0, eta0] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Config("singular coefficients must be finite".into()));
            }
        }
        let green = Shape::Yukawa { kappa: m.get() };
        let full_psi = psi_reg.clone().with(zeta0, green.clone())?;
        let full_pi = pi_reg.clone().with(eta0, green)?;
        Ok(Self {
            psi_reg,
            pi_reg,
            zeta0,
            eta0,
            mass: m,
            full_psi,
            full_pi,
        })
    }

    pub fn zero(m: Mass) -> Self {
        Self::new(Profile::zero(), Profile::zero(), ZERO, ZERO, m).expect("zero data is valid")
    }

    /// Exact data of the solitary wave `w` at `t = 0`.
    pub fn soliton(w: &SolitaryWave, m: Mass) -> Result<Self> {
        let a = w.amplitude();
        let kappa = w.decay_rate(m);
        let psi_reg = if a == ZERO || kappa == m.get() {
            Profile::zero()
        } else {
            Profile::zero()
                .with(a, Shape::Yukawa { kappa })?
                .with(-a, Shape::Yukawa { kappa: m.get() })?
        };
        let rot = Complex64::new(0.0, -w.omega());
        let pi_reg = psi_reg.scaled(rot);
        Self::new(psi_reg, pi_reg, a, rot * a, m)
    }

    /// Adds `dpsi` and `dpi` to the regular parts.
    pub fn perturbed(&self, dpsi: &Profile, dpi: &Profile) -> Result<Self> {
        Self::new(
            self.psi_reg.plus(dpsi),
            self.pi_reg.plus(dpi),
            self.zeta0,
            self.eta0,
            self.mass,
        )
    }

    /// `e^{iθ}` times the data.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = Complex64::from_polar(1.0, theta);
        Self::new(
            self.psi_reg.scaled(r),
            self.pi_reg.scaled(r),
            r * self.zeta0,
            r * self.eta0,
            self.mass,
        )
        .expect("rotation preserves validity")
    }

    /// `α·self + β·other`; both states must share the mass.
    pub fn combine(&self, alpha: Complex64, other: &RadialState, beta: Complex64) -> Result<Self> {
        if self.mass != other.mass {
            return Err(Error::Input(
                "cannot combine states with different masses".into(),
            ));
        }
        Self::new(
            self.psi_reg.scaled(alpha).plus(&other.psi_reg.scaled(beta)),
            self.pi_reg.scaled(alpha).plus(&other.pi_reg.scaled(beta)),
            alpha * self.zeta0 + beta * other.zeta0,
            alpha * self.eta0 + beta * other.eta0,
            self.mass,
        )
    }

    pub fn psi_reg(&self) -> &Profile {
        &self.psi_reg
    }

    pub fn pi_reg(&self) -> &Profile {
        &self.pi_reg
    }

    pub fn zeta0(&self) -> Complex64 {
        self.zeta0
    }

    pub fn eta0(&self) -> Complex64 {
        self.eta0
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    /// `ψ₀` including the Green's function part.
    pub fn full_psi(&self) -> &Profile {
        &self.full_psi
    }

    pub fn full_pi(&self) -> &Profile {
        &self.full_pi
    }

    /// `|ψ_reg(0) − F(ζ₀)|`.
    pub fn domain_defect(&self, p: &PolynomialPotential) -> f64 {
        let v = self.psi_reg.value_at_origin().unwrap_or(ZERO);
        (v - force_f(p, self.zeta0)).norm()
    }

    pub fn check_domain(&self, p: &PolynomialPotential, tol: f64) -> Result<()> {
        let d = self.domain_defect(p);
        if d > tol {
            return Err(Error::Config(format!(
                "initial data violate psi_reg(0) = F(zeta0): defect {d:e} > {tol:e}"
            )));
        }
        Ok(())
    }

    fn support(&self) -> f64 {
        self.full_psi
            .support(SUPPORT_TOL)
            .max(self.full_pi.support(SUPPORT_TOL))
    }

    fn check_mass(&self, m: Mass) -> Result<()> {
        if m != self.mass {
            return Err(Error::Input(format!(
                "state was built for m = {}, evaluated with m = {}",
                self.mass.get(),
                m.get()
            )));
        }
        Ok(())
    }
}

/// `λ(t) = lim_{ρ→0} ψ_f(ρ, t)`.
pub fn lambda_trace(
    state: &RadialState,
    t: f64,
    m: Mass,
    quad: &QuadratureConfig,
) -> Result<Complex64> {
    state.check_mass(m)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Input(format!(
            "lambda_trace: t must be >= 0, got {t}"
        )));
    }
    let f = &state.full_psi;
    let g = &state.full_pi;
    let mm = m.get();
    let boundary = f.weighted_deriv(t) - 0.5 * mm * mm * t * f.weighted(t) + g.weighted(t);
    let upper = t.min(state.support());
    if upper <= 0.0 {
        return Ok(boundary);
    }
    let integrand = |u: f64| {
        let [l, dl, _] = kernel_l_derivs(u, t, m);
        [u * dl * f.weighted(u) + u * l * g.weighted(u)]
    };
    let ([v], _) = integrate(&integrand, 0.0, upper, &[], quad);
    Ok(boundary - mm * v)
}

/// `λ(k Δt)` for `k = 0..n`, evaluated in parallel.
pub fn lambda_series(
    state: &RadialState,
    m: Mass,
    dt: f64,
    n: usize,
    quad: &QuadratureConfig,
) -> Result<Vec<Complex64>> {
    (0..n)
        .into_par_iter()
        .map(|k| lambda_trace(state, k as f64 * dt, m, quad))
        .collect()
}

/// `(ψ_f, ∂_t ψ_f)` at radius `ρ > 0` and time `t >= 0`.
pub fn freefield_eval(
    state: &RadialState,
    rho: f64,
    t: f64,
    m: Mass,
    quad: &QuadratureConfig,
) -> Result<(Complex64, Complex64)> {
    state.check_mass(m)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!(
            "freefield_eval: rho must be positive, got {rho}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Input(format!(
            "freefield_eval: t must be >= 0, got {t}"
        )));
    }
    let f = &state.full_psi;
    let g = &state.full_pi;
    let mm = m.get();
    let big_m =
        |h: &Profile, u: f64| h.weighted_integral(rho + u) - h.weighted_integral((rho - u).abs());

    // On the cone take the limit from inside, matching θ(0) = 1 in ψ_S.
    let d = t - rho;
    let sigma = if d >= 0.0 { 1.0 } else { -1.0 };
    let ad = d.abs();
    let mf = big_m(f, t);
    let mg = big_m(g, t);
    let dmf = f.weighted(rho + t) - sigma * f.weighted(ad);
    let dmg = g.weighted(rho + t) - sigma * g.weighted(ad);
    let d2mf = f.weighted_deriv(rho + t) - f.weighted_deriv(ad);

    let mut psi = dmf + mg;
    let mut dot = d2mf + dmg;
    psi -= mm * (0.5 * mm * t * mf);
    dot -= mm * (0.5 * mm * (mf + t * dmf) - mm.powi(3) * t * t / 8.0 * mf + 0.5 * mm * t * mg);

    let upper = t.min(rho + state.support());
    if upper > 0.0 {
        let integrand = |u: f64| {
            let [l, dl, d2l] = kernel_l_derivs(u, t, m);
            let a = big_m(f, u);
            let b = big_m(g, u);
            [u * (dl * a + l * b), u * (d2l * a + dl * b)]
        };
        let breaks = if rho < upper { vec![rho] } else { Vec::new() };
        let ([ip, id], _) = integrate(&integrand, 0.0, upper, &breaks, quad);
        psi -= mm * ip;
        dot -= mm * id;
    }
    let s = 0.5 / rho;
    Ok((psi * s, dot * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::GaussLegendre;

    fn unit() -> Mass {
        Mass::new(1.0).unwrap()
    }

    fn gaussian_state() -> RadialState {
        let g = Profile::single(Complex64::new(1.0, 0.0), Shape::Gaussian { width: 1.0 }).unwrap();
        RadialState::new(g, Profile::zero(), ZERO, ZERO, unit()).unwrap()
    }

    #[test]
    fn zero_state_has_zero_trace_and_field() {
        let s = RadialState::zero(unit());
        let q = QuadratureConfig::default();
        for t in [0.0, 1.0, 7.5] {
            assert_eq!(lambda_trace(&s, t, unit(), &q).unwrap(), ZERO);
            let (a, b) = freefield_eval(&s, 0.7, t, unit(), &q).unwrap();
            assert_eq!((a, b), (ZERO, ZERO));
        }
    }

    #[test]
    fn initial_values_are_reproduced() {
        let m = unit();
        let q = QuadratureConfig::default();
        let bump = Profile::single(Complex64::new(0.0, 0.4), Shape::Bump { width: 1.2 }).unwrap();
        let s = gaussian_state()
            .perturbed(&Profile::zero(), &bump)
            .unwrap()
            .combine(
                Complex64::new(1.0, 0.0),
                &RadialState::new(
                    Profile::zero(),
                    Profile::zero(),
                    Complex64::new(0.3, 0.1),
                    Complex64::new(-0.2, 0.5),
                    m,
                )
                .unwrap(),
                Complex64::new(1.0, 0.0),
            )
            .unwrap();
        for rho in [0.05, 0.5, 1.3, 4.0] {
            let (a, b) = freefield_eval(&s, rho, 0.0, m, &q).unwrap();
            assert!((a - s.full_psi().value(rho)).norm() < 1e-12, "{rho}");
            assert!((b - s.full_pi().value(rho)).norm() < 1e-12, "{rho}");
        }
    }

    #[test]
    fn soliton_trace_at_origin() {
        let m = unit();
        let p = PolynomialPotential::cubic_quintic();
        let omega: f64 = 0.5;
        let q = crate::solitary::solve_amplitudes(&p, omega, m).unwrap()[0];
        let w = SolitaryWave::new(omega, q, 0.3, &p, m).unwrap();
        let s = RadialState::soliton(&w, m).unwrap();
        assert!(s.domain_defect(&p) < 1e-14);
        let kappa = (1.0 - omega * omega).sqrt();
        let want = -w.amplitude() * Complex64::new(kappa, omega) / (4.0 * std::f64::consts::PI);
        let got = lambda_trace(&s, 0.0, m, &QuadratureConfig::default()).unwrap();
        assert!((got - want).norm() < 1e-15);
    }

    /// `λ(t) = −(m q / 4π) e^{−iωt} ∫_t^∞ K(s) e^{iωs} ds` for soliton data.
    #[test]
    fn soliton_trace_matches_kernel_tail() {
        let m = unit();
        let p = PolynomialPotential::cubic_quintic();
        let omega = 0.5;
        let q = crate::solitary::solve_amplitudes(&p, omega, m).unwrap()[0];
        let w = SolitaryWave::new(omega, q, 0.0, &p, m).unwrap();
        let s = RadialState::soliton(&w, m).unwrap();
        let khat = crate::specfun::k_hat(omega, m).unwrap();
        let gl = GaussLegendre::new(16);
        for t in [0.5f64, 3.0, 11.0] {
            let mut head = Complex64::new(0.0, 0.0);
            let n = (t * 4.0).ceil() as usize;
            let h = t / n as f64;
            for k in 0..n {
                let a = k as f64 * h;
                let re = gl.integrate(a, a + h, |x| {
                    (omega * x).cos() * crate::specfun::kernel_k(x, m)
                });
                let im = gl.integrate(a, a + h, |x| {
                    (omega * x).sin() * crate::specfun::kernel_k(x, m)
                });
                head += Complex64::new(re, im);
            }
            let want = -q / (4.0 * std::f64::consts::PI)
                * Complex64::from_polar(1.0, -omega * t)
                * (khat - head);
            let got = lambda_trace(&s, t, m, &QuadratureConfig::default()).unwrap();
            assert!((got - want).norm() < 1e-11, "t = {t}: {got} vs {want}");
        }
    }

    #[test]
    fn trace_is_linear() {
        let m = unit();
        let q = QuadratureConfig::default();
        let a = gaussian_state();
        let b = RadialState::new(
            Profile::zero(),
            Profile::zero(),
            Complex64::new(1.0, 0.0),
            ZERO,
            m,
        )
        .unwrap();
        let (al, be) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.7));
        let c = a.combine(al, &b, be).unwrap();
        for t in [0.4, 2.0, 9.0] {
            let lhs = lambda_trace(&c, t, m, &q).unwrap();
            let rhs =
                al * lambda_trace(&a, t, m, &q).unwrap() + be * lambda_trace(&b, t, m, &q).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn field_tends_to_trace_at_origin() {
        let m = unit();
        let q = QuadratureConfig::default();
        let s = gaussian_state()
            .combine(
                Complex64::new(1.0, 0.0),
                &RadialState::new(
                    Profile::zero(),
                    Profile::zero(),
                    Complex64::new(0.5, 0.0),
                    ZERO,
                    m,
                )
                .unwrap(),
                Complex64::new(1.0, 0.0),
            )
            .unwrap();
        for t in [1.0, 2.0, 5.0] {
            let v: Vec<Complex64> = [0.02, 0.01, 0.005]
                .iter()
                .map(|&r| freefield_eval(&s, r, t, m, &q).unwrap().0)
                .collect();
            // quadratic Richardson in ρ
            let r1 = 2.0 * v[1] - v[0];
            let r2 = 2.0 * v[2] - v[1];
            let lim = (4.0 * r2 - r1) / 3.0;
            let lam = lambda_trace(&s, t, m, &q).unwrap();
            assert!((lim - lam).norm() < 1e-5, "t = {t}: {lim} vs {lam}");
        }
    }

    #[test]
    fn time_derivative_matches_difference() {
        let m = unit();
        let q = QuadratureConfig::default();
        let s = gaussian_state()
            .perturbed(
                &Profile::zero(),
                &Profile::single(Complex64::new(0.2, 0.0), Shape::Gaussian { width: 0.8 }).unwrap(),
            )
            .unwrap();
        let h = 1e-4;
        for (rho, t) in [(0.5, 1.0), (1.5, 3.0), (3.0, 2.0)] {
            let (_, d) = freefield_eval(&s, rho, t, m, &q).unwrap();
            let a = freefield_eval(&s, rho, t + h, m, &q).unwrap().0;
            let b = freefield_eval(&s, rho, t - h, m, &q).unwrap().0;
            assert!((d - (a - b) / (2.0 * h)).norm() < 1e-7, "({rho},{t})");
        }
    }

    #[test]
    fn cone_value_is_the_inner_limit() {
        let m = unit();
        let q = QuadratureConfig::default();
        let s = RadialState::new(
            Profile::zero(),
            Profile::zero(),
            Complex64::new(1.0, 0.0),
            ZERO,
            m,
        )
        .unwrap();
        let (a, _) = freefield_eval(&s, 0.5, 0.5, m, &q).unwrap();
        let (b, _) = freefield_eval(&s, 0.5 - 1e-9, 0.5, m, &q).unwrap();
        let (c, _) = freefield_eval(&s, 0.5 + 1e-9, 0.5, m, &q).unwrap();
        assert!((a - b).norm() < 1e-6);
        assert!((a - c).norm() > 0.1);
    }

    #[test]
    fn rejects_singular_regular_part() {
        let g = Profile::single(Complex64::new(1.0, 0.0), Shape::Yukawa { kappa: 1.0 }).unwrap();
        assert!(RadialState::new(g, Profile::zero(), ZERO, ZERO, unit()).is_err());
    }
}

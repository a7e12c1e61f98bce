//! Time stepping of the reduced equation
//!
//! ```text
//! ζ̇ = m ζ − m (K ∗ ζ)(t) − 4π F(ζ) + 4π λ(t),   ζ(0) = ζ₀,
//! ```
//!
//! with product-trapezoid convolution over the whole history and an implicit
//! trapezoidal step.

mod conv;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::freefield::{lambda_series, RadialState};
use crate::nonlinearity::{force_f, radial_b, PolynomialPotential};
use crate::quad::QuadratureConfig;
use crate::specfun::Mass;

pub use crate::solitary::stationary_residual;
use conv::BlockedConv;
pub use conv::KernelWeights;

const FOUR_PI: f64 = 4.0 * PI;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const LEAF: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    Naive,
    BlockedFft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    dt: f64,
    t_final: f64,
    pub conv_mode: ConvMode,
    pub blowup_threshold: f64,
    pub corrector_tol: f64,
    pub max_iterations: usize,
    pub quadrature: QuadratureConfig,
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        if !(t_final >= dt && t_final.is_finite()) {
            return Err(Error::Config(format!(
                "T = {t_final} must be at least dt = {dt}"
            )));
        }
        Ok(Self {
            dt,
            t_final,
            conv_mode: ConvMode::Naive,
            blowup_threshold: 1e6,
            corrector_tol: 1e-12,
            max_iterations: 50,
            quadrature: QuadratureConfig::default(),
        })
    }

    pub fn with_mode(mut self, mode: ConvMode) -> Self {
        self.conv_mode = mode;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Number of steps; `T` is rounded to the nearest multiple of `dt`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::Config("blow-up threshold must be positive".into()));
        }
        if !(self.corrector_tol > 0.0) || self.max_iterations == 0 {
            return Err(Error::Config(
                "corrector tolerance and iteration cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Samples `ζ(k Δt)`, `ζ̇`, `λ` and the convolution value used at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    m: Mass,
    dt: f64,
    zeta: Vec<Complex64>,
    zeta_dot: Vec<Complex64>,
    lambda: Vec<Complex64>,
    conv: Vec<Complex64>,
}

impl Trajectory {
    /// A trajectory from given samples; `ζ̇` by second-order differences, `λ = 0`,
    /// and the convolution by direct product-trapezoid summation.
    pub fn from_samples(m: Mass, dt: f64, zeta: Vec<Complex64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || zeta.len() < 3 {
            return Err(Error::Input("need dt > 0 and at least 3 samples".into()));
        }
        if zeta.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Input("non-finite sample".into()));
        }
        let n = zeta.len();
        let w = KernelWeights::new(m, dt, n);
        let conv = (0..n).map(|k| w.conv_direct(&zeta, k)).collect();
        let mut zeta_dot = vec![ZERO; n];
        for k in 0..n {
            zeta_dot[k] = if k == 0 {
                (-3.0 * zeta[0] + 4.0 * zeta[1] - zeta[2]) / (2.0 * dt)
            } else if k == n - 1 {
                (3.0 * zeta[k] - 4.0 * zeta[k - 1] + zeta[k - 2]) / (2.0 * dt)
            } else {
                (zeta[k + 1] - zeta[k - 1]) / (2.0 * dt)
            };
        }
        Ok(Self {
            m,
            dt,
            lambda: vec![ZERO; n],
            zeta,
            zeta_dot,
            conv,
        })
    }

    pub fn mass(&self) -> Mass {
        self.m
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        0.0
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        (self.len().saturating_sub(1)) as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn zeta(&self) -> &[Complex64] {
        &self.zeta
    }

    pub fn zeta_dot(&self) -> &[Complex64] {
        &self.zeta_dot
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn conv(&self) -> &[Complex64] {
        &self.conv
    }

    /// Grid index of `t`, or an input error if `t` is not a grid time.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt;
        let k = x.round();
        if !(k >= 0.0) || (x - k).abs() > 1e-6 || k as usize >= self.len() {
            return Err(Error::Input(format!(
                "t = {t} is not on the trajectory grid (dt = {}, end {})",
                self.dt,
                self.t_end()
            )));
        }
        Ok(k as usize)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t > self.t_end() * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::Input(format!(
                "t = {t} outside the trajectory [0, {}]",
                self.t_end()
            )));
        }
        Ok(())
    }

    /// `ζ(t)` by cubic Hermite interpolation with the stored `ζ̇`.
    pub fn zeta_at(&self, t: f64) -> Result<Complex64> {
        self.check_time(t)?;
        let n = self.len();
        let x = t / self.dt;
        let k = (x.floor() as usize).min(n - 2);
        let s = (x - k as f64).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        Ok(self.zeta[k] * h00
            + self.zeta_dot[k] * (h10 * self.dt)
            + self.zeta[k + 1] * h01
            + self.zeta_dot[k + 1] * (h11 * self.dt))
    }

    /// `ζ̇(t)` by four-point Lagrange interpolation.
    pub fn zeta_dot_at(&self, t: f64) -> Result<Complex64> {
        self.check_time(t)?;
        let n = self.len();
        let x = t / self.dt;
        let k = (x.floor() as usize).min(n - 2);
        let start = k.saturating_sub(1).min(n.saturating_sub(4));
        let pts = (start..(start + 4).min(n)).collect::<Vec<_>>();
        let mut acc = ZERO;
        for &i in &pts {
            let mut w = 1.0;
            for &j in &pts {
                if j != i {
                    w *= (x - j as f64) / (i as f64 - j as f64);
                }
            }
            acc += self.zeta_dot[i] * w;
        }
        Ok(acc)
    }
}

/// The right-hand side `m ζ − m conv − 4π F(ζ) + 4π λ`.
fn rhs(
    p: &PolynomialPotential,
    m: f64,
    z: Complex64,
    conv: Complex64,
    lam: Complex64,
) -> Complex64 {
    m * (z - conv) - FOUR_PI * force_f(p, z) + FOUR_PI * lam
}

/// Solves the reduced equation for `state` on `[0, T]`.
pub fn solve_reduced(
    state: &RadialState,
    p: &PolynomialPotential,
    m: Mass,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.steps();
    let lambda = lambda_series(state, m, cfg.dt, n + 1, &cfg.quadrature)?;
    solve_with_lambda(state.zeta0(), lambda, p, m, cfg)
}

/// Steps the reduced equation with a prescribed trace `λ(k Δt)`, `k = 0..=n`.
pub fn solve_with_lambda(
    zeta0: Complex64,
    lambda: Vec<Complex64>,
    p: &PolynomialPotential,
    m: Mass,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if lambda.is_empty() {
        return Err(Error::Input("lambda series is empty".into()));
    }
    let n = lambda.len() - 1;
    let h = cfg.dt;
    let mm = m.get();
    let w = KernelWeights::new(m, h, n.max(1));
    let mut engine = match cfg.conv_mode {
        ConvMode::Naive => None,
        ConvMode::BlockedFft => Some(BlockedConv::new(&w.c, n, LEAF)),
    };

    let mut traj = Trajectory {
        m,
        dt: h,
        zeta: Vec::with_capacity(n + 1),
        zeta_dot: Vec::with_capacity(n + 1),
        lambda: Vec::with_capacity(n + 1),
        conv: Vec::with_capacity(n + 1),
    };
    traj.zeta.push(zeta0);
    traj.zeta_dot.push(rhs(p, mm, zeta0, ZERO, lambda[0]));
    traj.lambda.push(lambda[0]);
    traj.conv.push(ZERO);

    // Linear coefficient of the implicit equation c z + β F(z) = R.
    let c = 1.0 - 0.5 * h * mm * (1.0 - w.a[0]);
    let beta = 0.5 * h * FOUR_PI;

    #[allow(clippy::needless_range_loop)]
    for k in 1..=n {
        let hist = match engine.as_ref() {
            None => w.history_direct(&traj.zeta, k),
            Some(e) => e.value(k - 1) + w.b[k - 1] * traj.zeta[0],
        };
        let zp = traj.zeta[k - 1];
        let fp = traj.zeta_dot[k - 1];
        let lam = lambda[k];
        let r = zp + 0.5 * h * fp + 0.5 * h * (-mm * hist + FOUR_PI * lam);

        // Forward Euler predictor, Newton corrector on the real 2×2 system.
        let mut z = zp + h * fp;
        let mut converged = false;
        let mut iters = 0;
        let mut resid = f64::INFINITY;
        while iters < cfg.max_iterations {
            iters += 1;
            let s = z.norm_sqr();
            let b = radial_b(p, s);
            let g = c * z + beta * b * z - r;
            let bp = 2.0 * beta * p.b_prime(s);
            let d = c + beta * b;
            let (j11, j12, j22) = (d + bp * z.re * z.re, bp * z.re * z.im, d + bp * z.im * z.im);
            let det = j11 * j22 - j12 * j12;
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = (j22 * g.re - j12 * g.im) / det;
            let dy = (j11 * g.im - j12 * g.re) / det;
            z -= Complex64::new(dx, dy);
            resid = dx.hypot(dy);
            if resid <= cfg.corrector_tol * z.norm().max(1.0) {
                converged = true;
                break;
            }
        }
        let t = k as f64 * h;
        if !converged || !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::StepFailure {
                time: t,
                iterations: iters,
                residual: resid,
                partial: Box::new(traj),
            });
        }
        if z.norm() > cfg.blowup_threshold {
            return Err(Error::BlowUp {
                time: t,
                last_valid: t - h,
                magnitude: z.norm(),
                partial: Box::new(traj),
            });
        }
        let conv = w.a[0] * z + hist;
        traj.zeta.push(z);
        traj.zeta_dot.push(rhs(p, mm, z, conv, lam));
        traj.lambda.push(lam);
        traj.conv.push(conv);
        if let Some(e) = engine.as_mut() {
            e.push(z);
        }
    }
    Ok(traj)
}

/// `∫₀ᵗ K(s) ζ(t − s) ds` exactly as consumed by the stepper at grid time `t`.
pub fn convolution_tail(traj: &Trajectory, t: f64) -> Result<Complex64> {
    let k = traj.index_of(t)?;
    Ok(traj.conv[k])
}

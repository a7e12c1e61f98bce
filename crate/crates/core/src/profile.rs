//! Spherically symmetric profiles `h(r)` used as initial data.
//!
//! Every profile is a linear combination of shapes that expose the three
//! quantities the free-field formulas need: the weighted value `q(s) = s h(s)`,
//! its derivative, and the antiderivative `P(x) = ∫₀ˣ s h(s) ds`. Working with
//! `q` instead of `h` removes the `1/r` pole of the Yukawa shape.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

const FOUR_PI: f64 = 4.0 * PI;

/// Elementary radial shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `e^{−κ r} / (4π r)`; the Green's function of `−Δ + κ²`.
    Yukawa { kappa: f64 },
    /// `e^{−r²/w²}`.
    Gaussian { width: f64 },
    /// `(r/w)² e^{−r²/w²}`, vanishing at the origin.
    Bump { width: f64 },
    /// Cubic spline through uniformly sampled values (flat at the origin), zero beyond the table.
    Table(Arc<SampledProfile>),
}

impl Shape {
    fn check(&self) -> Result<()> {
        let ok = match self {
            Shape::Yukawa { kappa } => kappa.is_finite() && *kappa > 0.0,
            Shape::Gaussian { width } | Shape::Bump { width } => width.is_finite() && *width > 0.0,
            Shape::Table(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid profile shape parameters: {self:?}"
            )))
        }
    }

    fn value(&self, r: f64) -> f64 {
        match *self {
            Shape::Yukawa { kappa } => (-kappa * r).exp() / (FOUR_PI * r),
            Shape::Gaussian { width } => (-(r / width).powi(2)).exp(),
            Shape::Bump { width } => {
                let y = (r / width).powi(2);
                y * (-y).exp()
            }
            Shape::Table(ref t) => t.value(r),
        }
    }

    /// `q(s) = s h(s)`.
    fn weighted(&self, s: f64) -> f64 {
        match *self {
            Shape::Yukawa { kappa } => (-kappa * s).exp() / FOUR_PI,
            _ => s * self.value(s),
        }
    }

    /// `q'(s)`.
    fn weighted_deriv(&self, s: f64) -> f64 {
        match *self {
            Shape::Yukawa { kappa } => -kappa * (-kappa * s).exp() / FOUR_PI,
            Shape::Gaussian { width } => {
                let y = (s / width).powi(2);
                (1.0 - 2.0 * y) * (-y).exp()
            }
            Shape::Bump { width } => {
                let y = (s / width).powi(2);
                (3.0 - 2.0 * y) * y * (-y).exp()
            }
            Shape::Table(ref t) => t.weighted_deriv(s),
        }
    }

    /// `P(x) = ∫₀ˣ s h(s) ds`.
    fn weighted_integral(&self, x: f64) -> f64 {
        match *self {
            Shape::Yukawa { kappa } => -(-kappa * x).exp_m1() / (FOUR_PI * kappa),
            Shape::Gaussian { width } => {
                let y = (x / width).powi(2);
                -0.5 * width * width * (-y).exp_m1()
            }
            Shape::Bump { width } => {
                let y = (x / width).powi(2);
                0.5 * width * width * (-(-y).exp_m1() - y * (-y).exp())
            }
            Shape::Table(ref t) => t.weighted_integral(x),
        }
    }

    /// Radius beyond which `|q|` and `|q'|` stay below `tol` (times the shape's scale).
    fn support(&self, tol: f64) -> f64 {
        let l = -tol.ln();
        match *self {
            Shape::Yukawa { kappa } => (l + 2.0) / kappa,
            Shape::Gaussian { width } | Shape::Bump { width } => width * (l + 4.0).sqrt() + width,
            Shape::Table(ref t) => t.r_max(),
        }
    }

    /// `L²(ℝ³)` norm squared, `4π ∫ |h|² r² dr`.
    fn l2_norm_sq(&self) -> Option<f64> {
        match *self {
            Shape::Yukawa { kappa } => Some(1.0 / (8.0 * PI * kappa)),
            Shape::Gaussian { width } => Some((PI / 2.0).powf(1.5) * width.powi(3)),
            // 4π ∫ y² e^{−2y} r² dr with y = r²/w²: 4π w³ · (15/128) √(π/2)
            Shape::Bump { width } => {
                Some(FOUR_PI * width.powi(3) * 15.0 / 128.0 * (PI / 2.0).sqrt())
            }
            Shape::Table(_) => None,
        }
    }
}

/// Uniformly sampled radial profile on `r_k = k Δ`, `k = 0..n`, interpolated by a
/// cubic spline with zero slope at the origin and set to zero beyond the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    step: f64,
    values: Vec<f64>,
    second: Vec<f64>,
    /// `P(r_k)` at every node.
    cumulative: Vec<f64>,
}

impl SampledProfile {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || values.len() < 4 {
            return Err(Error::Config(
                "sampled profile needs a positive step and at least 4 samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "sampled profile contains non-finite values".into(),
            ));
        }
        let n = values.len();
        // Zero slope at the origin (radial symmetry), natural end at r_max.
        let h2 = step * step;
        let mut diag = vec![4.0; n];
        let mut upper = vec![1.0; n];
        let mut lower = vec![1.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0;
        rhs[0] = 6.0 * (values[1] - values[0]) / h2;
        for i in 1..n - 1 {
            rhs[i] = 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2;
        }
        diag[n - 1] = 1.0;
        lower[n - 1] = 0.0;
        upper[n - 1] = 0.0;
        for i in 1..n {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - upper[i] * second[i + 1]) / diag[i];
        }
        let mut out = Self {
            step,
            values,
            second,
            cumulative: vec![0.0; n],
        };
        for k in 1..n {
            let a = (k - 1) as f64 * step;
            out.cumulative[k] = out.cumulative[k - 1] + out.cell_weighted_integral(k - 1, a + step);
        }
        Ok(out)
    }

    pub fn r_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    fn cell(&self, r: f64) -> (usize, f64) {
        let n = self.values.len();
        let k = ((r / self.step).floor() as usize).min(n - 2);
        (k, r - k as f64 * self.step)
    }

    /// Spline on cell `k` as a cubic in the local coordinate `u ∈ [0, Δ]`.
    fn cubic(&self, k: usize) -> [f64; 4] {
        let h = self.step;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.second[k], self.second[k + 1]);
        [
            y0,
            (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0,
            0.5 * m0,
            (m1 - m0) / (6.0 * h),
        ]
    }

    fn value(&self, r: f64) -> f64 {
        if r < 0.0 || r > self.r_max() {
            return 0.0;
        }
        let (k, u) = self.cell(r);
        let c = self.cubic(k);
        c[0] + u * (c[1] + u * (c[2] + u * c[3]))
    }

    fn weighted_deriv(&self, s: f64) -> f64 {
        if s < 0.0 || s > self.r_max() {
            return 0.0;
        }
        let (k, u) = self.cell(s);
        let c = self.cubic(k);
        let h = c[0] + u * (c[1] + u * (c[2] + u * c[3]));
        let dh = c[1] + u * (2.0 * c[2] + 3.0 * u * c[3]);
        h + s * dh
    }

    /// `∫_{r_k}^{x} s h(s) ds` for `x` inside cell `k`.
    fn cell_weighted_integral(&self, k: usize, x: f64) -> f64 {
        let a = k as f64 * self.step;
        let c = self.cubic(k);
        let u = x - a;
        // s h = (a + u) Σ c_j u^j
        let mut acc = 0.0;
        for (j, cj) in c.iter().enumerate() {
            let p = (j + 1) as f64;
            acc += cj * (a * u.powi(j as i32 + 1) / p + u.powi(j as i32 + 2) / (p + 1.0));
        }
        acc
    }

    fn weighted_integral(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        if x >= self.r_max() {
            return self.cumulative[n - 1];
        }
        let (k, _) = self.cell(x);
        self.cumulative[k] + self.cell_weighted_integral(k, x)
    }
}

/// A finite linear combination `Σ cᵢ shapeᵢ` with complex coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile {
    terms: Vec<(Complex64, Shape)>,
}

impl Profile {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(coeff: Complex64, shape: Shape) -> Result<Self> {
        Self::zero().with(coeff, shape)
    }

    pub fn with(mut self, coeff: Complex64, shape: Shape) -> Result<Self> {
        shape.check()?;
        if !(coeff.re.is_finite() && coeff.im.is_finite()) {
            return Err(Error::Config("profile coefficient must be finite".into()));
        }
        if coeff != Complex64::new(0.0, 0.0) {
            self.terms.push((coeff, shape));
        }
        Ok(self)
    }

    pub fn terms(&self) -> &[(Complex64, Shape)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        if a == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(c, s)| (c * a, s.clone())).collect(),
        }
    }

    pub fn plus(&self, other: &Profile) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    /// `h(r)` for `r > 0`.
    pub fn value(&self, r: f64) -> Complex64 {
        self.terms.iter().map(|(c, s)| c * s.value(r)).sum()
    }

    /// `q(s) = s h(s)`, finite at `s = 0` even with Yukawa terms.
    pub fn weighted(&self, s: f64) -> Complex64 {
        self.terms.iter().map(|(c, sh)| c * sh.weighted(s)).sum()
    }

    pub fn weighted_deriv(&self, s: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, sh)| c * sh.weighted_deriv(s))
            .sum()
    }

    pub fn weighted_integral(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, sh)| c * sh.weighted_integral(x))
            .sum()
    }

    /// Radius beyond which the profile is negligible at relative level `tol`.
    pub fn support(&self, tol: f64) -> f64 {
        self.terms
            .iter()
            .map(|(_, s)| s.support(tol))
            .fold(0.0, f64::max)
    }

    /// Coefficient of `1/(4π r)` in the small-`r` expansion; zero for regular profiles.
    pub fn pole_coefficient(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|(_, s)| matches!(s, Shape::Yukawa { .. }))
            .map(|(c, _)| *c)
            .sum()
    }

    /// `lim_{r→0} h(r)`, or `None` if the profile has a `1/r` pole.
    pub fn value_at_origin(&self) -> Option<Complex64> {
        let pole = self.pole_coefficient();
        let scale: f64 = self
            .terms
            .iter()
            .map(|(c, _)| c.norm())
            .sum::<f64>()
            .max(1.0);
        if pole.norm() > 1e-14 * scale {
            return None;
        }
        Some(
            self.terms
                .iter()
                .map(|(c, s)| match *s {
                    Shape::Yukawa { kappa } => -c * kappa / FOUR_PI,
                    Shape::Gaussian { .. } => *c,
                    Shape::Bump { .. } => Complex64::new(0.0, 0.0),
                    Shape::Table(ref t) => c * t.value(0.0),
                })
                .sum(),
        )
    }

    /// Exact `L²(ℝ³)` norm squared when every term is a single analytic shape;
    /// `None` for mixed combinations or tables.
    pub fn single_shape_l2_norm_sq(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [(c, s)] => s.l2_norm_sq().map(|n| c.norm_sqr() * n),
            _ => None,
        }
    }
}

//! U(1)-invariant polynomial potential `U(ζ) = Σ uₙ |ζ|^{2n}` and the point
//! nonlinearity `F(ζ) = ∂_ζ̄ U = b(|ζ|²) ζ` with `b = u'`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    coeffs: Vec<f64>,
}

impl PolynomialPotential {
    /// Coefficients `u₀..u_N`; requires `N >= 2` and `u_N > 0`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(
                "potential coefficients must be finite".into(),
            ));
        }
        if coeffs.len() < 3 {
            return Err(Error::Config(format!(
                "potential degree N = {} is too low (N >= 2 required)",
                coeffs.len().saturating_sub(1)
            )));
        }
        let lead = *coeffs.last().unwrap();
        if lead <= 0.0 {
            return Err(Error::Config(format!(
                "leading coefficient u_N = {lead} must be positive (u_N > 0 required)"
            )));
        }
        Ok(Self { coeffs })
    }

    /// The default "cubic-quintic" preset `U = −|ζ|² + |ζ|⁴`.
    pub fn cubic_quintic() -> Self {
        Self {
            coeffs: vec![0.0, -1.0, 1.0],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree N in `|ζ|²`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `u(s) = Σ uₙ sⁿ`.
    pub fn u(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// Coefficients of `b(s) = u'(s) = Σ n uₙ s^{n−1}` (degree N−1).
    pub fn b_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &c)| n as f64 * c)
            .collect()
    }

    /// `b'(s)`, used by the implicit corrector's Jacobian.
    pub fn b_prime(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (n, &c)| acc * s + (n * (n - 1)) as f64 * c)
    }
}

/// `U(ζ) = u(|ζ|²)`.
pub fn potential_u(p: &PolynomialPotential, zeta: Complex64) -> f64 {
    p.u(zeta.norm_sqr())
}

/// `b(s) = u'(s)`.
pub fn radial_b(p: &PolynomialPotential, s: f64) -> f64 {
    p.coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (n, &c)| acc * s + n as f64 * c)
}

/// `F(ζ) = b(|ζ|²) ζ`.
pub fn force_f(p: &PolynomialPotential, zeta: Complex64) -> Complex64 {
    zeta * radial_b(p, zeta.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_assumption_a_violations() {
        assert!(PolynomialPotential::new(vec![0.0, 1.0]).is_err());
        assert!(PolynomialPotential::new(vec![0.0, 1.0, -1.0]).is_err());
        assert!(PolynomialPotential::new(vec![0.0, 1.0, 0.0]).is_err());
        let msg = PolynomialPotential::new(vec![0.0, 1.0])
            .unwrap_err()
            .to_string();
        assert!(msg.contains("N >= 2"), "{msg}");
        assert!(PolynomialPotential::new(vec![0.3, -2.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn preset_values() {
        let p = PolynomialPotential::cubic_quintic();
        assert_eq!(potential_u(&p, Complex64::new(0.0, 0.0)), 0.0);
        assert_eq!(potential_u(&p, Complex64::new(1.0, 0.0)), 0.0);
        assert_eq!(radial_b(&p, 0.0), -1.0);
        assert_eq!(radial_b(&p, 1.0), 1.0);
        assert_eq!(
            force_f(&p, Complex64::new(1.0, 0.0)),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            force_f(&p, Complex64::new(0.0, 0.0)),
            Complex64::new(0.0, 0.0)
        );
        let q = PolynomialPotential::new(vec![2.0, 0.5, -1.0, 3.0]).unwrap();
        assert_eq!(potential_u(&q, Complex64::new(0.0, 0.0)), 2.0);
        assert_eq!(radial_b(&q, 0.0), 0.5);
        assert_eq!(q.b_coeffs(), vec![0.5, -2.0, 9.0]);
    }

    #[test]
    fn b_prime_matches_difference() {
        let q = PolynomialPotential::new(vec![2.0, 0.5, -1.0, 3.0]).unwrap();
        for s in [0.0, 0.3, 1.7] {
            let h = 1e-6;
            let fd = (radial_b(&q, s + h) - radial_b(&q, s - h)) / (2.0 * h);
            assert!((q.b_prime(s) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn coercive_on_preset() {
        let p = PolynomialPotential::cubic_quintic();
        let (mut best_r, mut best_u) = (0.0, f64::INFINITY);
        for i in 0..=10_000 {
            let r = i as f64 * 3e-4;
            let u = p.u(r * r);
            if u < best_u {
                best_u = u;
                best_r = r;
            }
        }
        assert!(best_r > 0.0);
        for i in 0..=2_000 {
            let r = 10.0 * best_r * i as f64 / 2_000.0;
            for k in 0..8 {
                let z = Complex64::from_polar(r, k as f64 * 0.7);
                assert!(potential_u(&p, z) >= best_u - 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn u1_invariance(re in -3.0..3.0f64, im in -3.0..3.0f64, th in 0.0..6.3f64) {
            let p = PolynomialPotential::new(vec![0.2, -1.0, 0.4, 0.7]).unwrap();
            let z = Complex64::new(re, im);
            let rot = Complex64::from_polar(1.0, th);
            let du = potential_u(&p, rot * z) - potential_u(&p, z);
            prop_assert!(du.abs() <= 1e-12 * (1.0 + potential_u(&p, z).abs()));
            let df = force_f(&p, rot * z) - rot * force_f(&p, z);
            prop_assert!(df.norm() <= 1e-12 * (1.0 + force_f(&p, z).norm()));
        }

        #[test]
        fn real_gradient_is_twice_force(re in -2.0..2.0f64, im in -2.0..2.0f64) {
            let p = PolynomialPotential::cubic_quintic();
            let z = Complex64::new(re, im);
            let h = 1e-6;
            let gx = (potential_u(&p, z + h) - potential_u(&p, z - h)) / (2.0 * h);
            let gy = (potential_u(&p, z + Complex64::new(0.0, h))
                - potential_u(&p, z - Complex64::new(0.0, h))) / (2.0 * h);
            let f = force_f(&p, z);
            let scale = (2.0 * f.norm()).max(1e-2);
            prop_assert!((gx - 2.0 * f.re).abs() <= 1e-6 * scale);
            prop_assert!((gy - 2.0 * f.im).abs() <= 1e-6 * scale);
        }
    }
}

//! Observables of attraction: windowed spectra of `ζ`, frequency concentration,
//! spectral mass inside and outside the gap, power-law fits and the distance of
//! the field to the solitary manifold along a run.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{linear_fit, snapshot, RadialGrid};
use crate::freefield::RadialState;
use crate::nonlinearity::PolynomialPotential;
use crate::quad::QuadratureConfig;
use crate::solitary::{manifold_distance, SolitaryWave};
use crate::specfun::{kappa, Mass};
use crate::volterra::Trajectory;

const MIN_SAMPLES: usize = 1024;
const MIN_GAP_PERIODS: f64 = 20.0;
const PADDING: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Taper {
    Hann,
    Rect,
}

/// `|ζ̃_w(ω)|² / (2π)` on a symmetric frequency grid, where
/// `ζ̃_w(ω) = Σ_j w_j ζ(t_j) e^{iω(t_j − t₁)} Δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumWindow {
    pub t1: f64,
    pub t2: f64,
    pub taper: Taper,
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
    pub d_omega: f64,
    /// Resolution `2π / (t₂ − t₁)`.
    pub bin: f64,
    /// `Σ |w_j ζ_j|² Δt`.
    pub windowed_energy: f64,
}

impl SpectrumWindow {
    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.d_omega
    }

    fn nonzero_total(&self) -> Result<f64> {
        let total = self.total_mass();
        if !(total > 0.0) {
            return Err(Error::Undefined(
                "spectral density is identically zero".into(),
            ));
        }
        Ok(total)
    }
}

/// Smallest odd `n >= min` whose prime factors are 3, 5 and 7.
fn padded_length(min: usize) -> usize {
    let mut best = usize::MAX;
    let mut a = 1usize;
    while a < 3 * min {
        let mut b = a;
        while b < 3 * min {
            let mut c = b;
            while c < min {
                c *= 7;
            }
            best = best.min(c);
            b *= 5;
        }
        a *= 3;
    }
    best
}

pub fn windowed_spectrum(
    traj: &Trajectory,
    t1: f64,
    t2: f64,
    taper: Taper,
) -> Result<SpectrumWindow> {
    let k1 = traj.index_of(t1)?;
    let k2 = traj.index_of(t2)?;
    if k2 <= k1 {
        return Err(Error::Input(format!("empty spectrum window [{t1}, {t2}]")));
    }
    let len = k2 - k1 + 1;
    if len < MIN_SAMPLES {
        return Err(Error::Input(format!(
            "spectrum window holds {len} samples; at least {MIN_SAMPLES} are required"
        )));
    }
    let m = traj.mass().get();
    if t2 - t1 < MIN_GAP_PERIODS * 2.0 * PI / m * (1.0 - 1e-12) {
        return Err(Error::Input(format!(
            "spectrum window length {} is shorter than {MIN_GAP_PERIODS} gap periods",
            t2 - t1
        )));
    }
    let dt = traj.dt();
    let p = padded_length(PADDING * len);
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    let mut energy = 0.0;
    #[allow(clippy::needless_range_loop)]
    for j in 0..len {
        let w = match taper {
            Taper::Rect => 1.0,
            Taper::Hann => 0.5 * (1.0 - (2.0 * PI * j as f64 / (len - 1) as f64).cos()),
        };
        buf[j] = traj.zeta()[k1 + j] * w;
        energy += buf[j].norm_sqr() * dt;
    }
    // Σ_j x_j e^{+2πi jk/P} is the unnormalised inverse transform.
    FftPlanner::new().plan_fft_inverse(p).process(&mut buf);
    let half = (p - 1) / 2;
    let d_omega = 2.0 * PI / (p as f64 * dt);
    let mut omega = Vec::with_capacity(p);
    let mut density = Vec::with_capacity(p);
    for i in 0..p {
        let k = i as isize - half as isize;
        let idx = if k < 0 {
            (p as isize + k) as usize
        } else {
            k as usize
        };
        omega.push(k as f64 * d_omega);
        density.push((buf[idx] * dt).norm_sqr() / (2.0 * PI));
    }
    Ok(SpectrumWindow {
        t1,
        t2,
        taper,
        omega,
        density,
        d_omega,
        bin: 2.0 * PI / (t2 - t1),
        windowed_energy: energy,
    })
}

/// Density-weighted centroid `ω̂` within two bins of the peak, and the fraction of
/// the spectral mass within `δ` of it.
pub fn concentration(sw: &SpectrumWindow, delta: f64) -> Result<(f64, f64)> {
    let total = sw.nonzero_total()?;
    let peak = sw
        .density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let reach = 2.0 * sw.bin;
    let (mut num, mut den) = (0.0, 0.0);
    for (w, d) in sw.omega.iter().zip(&sw.density) {
        if (w - sw.omega[peak]).abs() <= reach {
            num += w * d;
            den += d;
        }
    }
    let centre = num / den;
    let near: f64 = sw
        .omega
        .iter()
        .zip(&sw.density)
        .filter(|(w, _)| (*w - centre).abs() <= delta)
        .map(|(_, d)| d)
        .sum::<f64>()
        * sw.d_omega;
    Ok((centre, (near / total).clamp(0.0, 1.0)))
}

/// Fraction of the spectral mass in `[−m, m]`.
pub fn gap_mass_fraction(sw: &SpectrumWindow, m: Mass) -> Result<f64> {
    let total = sw.nonzero_total()?;
    let inside: f64 = sw
        .omega
        .iter()
        .zip(&sw.density)
        .filter(|(w, _)| w.abs() <= m.get())
        .map(|(_, d)| d)
        .sum::<f64>()
        * sw.d_omega;
    Ok((inside / total).clamp(0.0, 1.0))
}

/// `Σ_{|ω|>m} density · κ(ω)/ω · Δω`.
pub fn outside_gap_weighted_mass(sw: &SpectrumWindow, m: Mass) -> f64 {
    sw.omega
        .iter()
        .zip(&sw.density)
        .filter(|(w, _)| w.abs() > m.get())
        .map(|(&w, d)| d * (kappa(w, m).re / w).max(0.0))
        .sum::<f64>()
        * sw.d_omega
}

/// Least-squares slope of `log value` against `log t`, with `r²`.
pub fn decay_fit(series: &[(f64, f64)]) -> Result<(f64, f64)> {
    if series.len() < 8 {
        return Err(Error::Input(format!(
            "decay_fit needs at least 8 points, got {}",
            series.len()
        )));
    }
    if series.iter().any(|&(t, v)| !(v > 0.0) || !(t > 0.0)) {
        return Err(Error::Input(
            "decay_fit needs positive times and values".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let (slope, icpt) = linear_fit(&pts);
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - icpt).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok((slope, r2))
}

/// Slope of a least-squares line through `|ζ(t)|` on `[t1, t2]`.
pub fn modulus_trend(traj: &Trajectory, t1: f64, t2: f64) -> Result<f64> {
    let k1 = traj.index_of(t1)?;
    let k2 = traj.index_of(t2)?;
    if k2 < k1 + 2 {
        return Err(Error::Input("trend window needs at least 3 samples".into()));
    }
    let pts: Vec<(f64, f64)> = (k1..=k2)
        .map(|k| (traj.time(k), traj.zeta()[k].norm()))
        .collect();
    Ok(linear_fit(&pts).0)
}

/// Mean of `|ζ|` on `[t1, t2]`.
pub fn mean_modulus(traj: &Trajectory, t1: f64, t2: f64) -> Result<f64> {
    let k1 = traj.index_of(t1)?;
    let k2 = traj.index_of(t2)?;
    let s: f64 = traj.zeta()[k1..=k2].iter().map(|z| z.norm()).sum();
    Ok(s / (k2 - k1 + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractionPoint {
    pub t: f64,
    pub dist: f64,
    pub wave: SolitaryWave,
}

/// Distance to the solitary manifold at each of `times`.
#[allow(clippy::too_many_arguments)]
pub fn attraction_series(
    state: &RadialState,
    traj: &Trajectory,
    times: &[f64],
    grid: &RadialGrid,
    p: &PolynomialPotential,
    m: Mass,
    r_max: u32,
    quad: &QuadratureConfig,
) -> Result<Vec<AttractionPoint>> {
    times
        .iter()
        .map(|&t| {
            let snap = snapshot(state, traj, t, grid, m, quad)?;
            let (dist, wave) = manifold_distance(&snap, p, m, r_max)?;
            Ok(AttractionPoint { t, dist, wave })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Mass {
        Mass::new(1.0).unwrap()
    }

    fn tone(omegas: &[f64], dt: f64, n: usize) -> Trajectory {
        let z = (0..n)
            .map(|k| {
                omegas
                    .iter()
                    .map(|&w| Complex64::from_polar(1.0, -w * k as f64 * dt))
                    .sum()
            })
            .collect();
        Trajectory::from_samples(unit(), dt, z).unwrap()
    }

    #[test]
    fn padded_lengths_are_odd_smooth() {
        for min in [1usize, 8, 100, 8192, 60_001] {
            let n = padded_length(min);
            assert!(n >= min && n % 2 == 1);
            let mut k = n;
            for f in [3, 5, 7] {
                while k.is_multiple_of(f) {
                    k /= f;
                }
            }
            assert_eq!(k, 1);
        }
    }

    #[test]
    fn pure_tone_peak_and_parseval() {
        let tr = tone(&[0.5], 0.1, 2001);
        for taper in [Taper::Hann, Taper::Rect] {
            let sw = windowed_spectrum(&tr, 0.0, 200.0, taper).unwrap();
            assert!((sw.total_mass() - sw.windowed_energy).abs() <= 1e-8 * sw.windowed_energy);
            let (w, ratio) = concentration(&sw, 5.0 * sw.bin).unwrap();
            assert!((w - 0.5).abs() <= sw.bin, "{w}");
            if taper == Taper::Hann {
                assert!(ratio >= 0.99, "{ratio}");
            }
            assert!(sw.omega[0] <= -4.0 && *sw.omega.last().unwrap() >= 4.0);
            assert_eq!(sw.omega[0], -sw.omega.last().unwrap());
        }
        let sw = windowed_spectrum(&tr, 0.0, 200.0, Taper::Hann).unwrap();
        assert!(gap_mass_fraction(&sw, unit()).unwrap() >= 0.99);
        assert!(outside_gap_weighted_mass(&sw, unit()) <= 1e-3 * sw.total_mass());
    }

    #[test]
    fn tone_outside_gap() {
        let tr = tone(&[3.0], 0.1, 2001);
        let sw = windowed_spectrum(&tr, 0.0, 200.0, Taper::Hann).unwrap();
        assert!(gap_mass_fraction(&sw, unit()).unwrap() <= 0.05);
        assert!(outside_gap_weighted_mass(&sw, unit()) > 0.0);
    }

    #[test]
    fn two_tones_are_not_concentrated() {
        let tr = tone(&[-0.6, 0.6], 0.1, 2001);
        let sw = windowed_spectrum(&tr, 0.0, 200.0, Taper::Hann).unwrap();
        let (_, ratio) = concentration(&sw, 0.05).unwrap();
        assert!(ratio <= 0.6);
    }

    #[test]
    fn zero_and_short_windows() {
        let tr =
            Trajectory::from_samples(unit(), 0.1, vec![Complex64::new(0.0, 0.0); 2001]).unwrap();
        let sw = windowed_spectrum(&tr, 0.0, 200.0, Taper::Hann).unwrap();
        assert!(sw.density.iter().all(|&d| d == 0.0));
        assert!(concentration(&sw, 0.1).is_err());
        assert!(windowed_spectrum(&tr, 0.0, 50.0, Taper::Hann).is_err());
        let fine = Trajectory::from_samples(unit(), 0.001, vec![Complex64::new(1.0, 0.0); 20_001])
            .unwrap();
        assert!(windowed_spectrum(&fine, 0.0, 20.0, Taper::Hann).is_err());
    }

    #[test]
    fn power_law_and_exponential_fits() {
        let s: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = 1.0 + i as f64;
                (t, 3.0 * t.powf(-1.5))
            })
            .collect();
        let (slope, r2) = decay_fit(&s).unwrap();
        assert!((slope + 1.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        let e: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = 10.0 + 70.0 * i as f64 / 19.0;
                (t, (-0.2 * t).exp())
            })
            .collect();
        assert!(decay_fit(&e).unwrap().0 < -3.0);
        assert!(decay_fit(&s[..5]).is_err());
        let mut bad = s.clone();
        bad[3].1 = 0.0;
        assert!(decay_fit(&bad).is_err());
    }
}

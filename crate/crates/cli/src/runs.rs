//! The four verbs: simulate, verify-kernels, soliton-scan and spectrum.

use std::path::{Path, PathBuf};
use std::time::Instant;

use kgpoint::diagnostics::{
    concentration, gap_mass_fraction, mean_modulus, modulus_trend, outside_gap_weighted_mass,
    windowed_spectrum, SpectrumWindow, Taper,
};
use kgpoint::field::{domain_condition_defect, energy, snapshot, FieldSnapshot};
use kgpoint::freefield::RadialState;
use kgpoint::profile::{Profile, Shape};
use kgpoint::quad::{integrate_real, QuadratureConfig};
use kgpoint::solitary::{manifold_distance, solve_amplitudes, stationary_residual, SolitaryWave};
use kgpoint::specfun::oracles::run_kernel_checks;
use kgpoint::volterra::{solve_reduced, Trajectory};
use kgpoint::{Mass, PolynomialPotential};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Branch, Format, PerturbShape, Preset, Resolved, RunConfig, TaperName};
use crate::output::{
    field_file_name, read_trajectory, trajectory_rows, write_csv, write_json, SCHEMA_VERSION,
    TRAJECTORY_HEADER,
};
use crate::CliError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(v: Option<[f64; 2]>) -> Complex64 {
    v.map_or(ZERO, |[re, im]| Complex64::new(re, im))
}

/// Progress lines on stderr unless quiet.
#[derive(Debug, Clone, Copy)]
pub struct Log {
    pub quiet: bool,
}

impl Log {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// `‖h‖_{L²(ℝ³)}` of a radial profile.
fn l2_norm(h: &Profile) -> f64 {
    if h.is_zero() {
        return 0.0;
    }
    let upper = h.support(1e-18);
    let q = QuadratureConfig::default();
    let v = integrate_real(
        |s| 4.0 * std::f64::consts::PI * h.weighted(s).norm_sqr(),
        0.0,
        upper,
        &q,
    );
    v.max(0.0).sqrt()
}

/// The initial state described by the configuration.
pub fn initial_state(cfg: &RunConfig, r: &Resolved) -> Result<RadialState, CliError> {
    let i = &cfg.initial_data;
    let m = r.mass;
    let base = match i.preset {
        Preset::Zero => RadialState::zero(m),
        Preset::Soliton => {
            let omega = i.omega.expect("checked at load");
            let roots = solve_amplitudes(&r.potential, omega, m)?;
            let q = match i.branch.unwrap_or(Branch::Largest) {
                Branch::Largest => roots.last(),
                Branch::Smallest => roots.first(),
            }
            .copied()
            .ok_or_else(|| CliError::Config(format!("no solitary wave with omega = {omega}")))?;
            let w = SolitaryWave::new(omega, q, i.theta.unwrap_or(0.0), &r.potential, m)?;
            RadialState::soliton(&w, m)?
        }
        Preset::Gaussian => {
            let shape = Shape::Gaussian {
                width: i.width.expect("checked at load"),
            };
            let psi = Profile::single(c(i.amplitude.or(Some([1.0, 0.0]))), shape)?;
            RadialState::new(psi, Profile::zero(), c(i.zeta0), c(i.eta0), m)?
        }
        Preset::Green => RadialState::new(
            Profile::zero(),
            Profile::zero(),
            c(i.zeta0.or(Some([1.0, 0.0]))),
            c(i.eta0),
            m,
        )?,
    };
    match &i.perturbation {
        None => Ok(base),
        Some(p) => {
            let shape = match p.shape {
                PerturbShape::Bump => Shape::Bump { width: p.width },
                PerturbShape::Gaussian => Shape::Gaussian { width: p.width },
            };
            let unit = Profile::single(Complex64::new(1.0, 0.0), shape)?;
            let target = p.relative_l2 * l2_norm(base.full_psi());
            let scale = Complex64::from_polar(target / l2_norm(&unit), p.phase);
            Ok(base.perturbed(&unit.scaled(scale), &Profile::zero())?)
        }
    }
}

fn taper(t: TaperName) -> Taper {
    match t {
        TaperName::Hann => Taper::Hann,
        TaperName::Rect => Taper::Rect,
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct WindowSummary {
    pub t1: f64,
    pub t2: f64,
    pub omega_hat: Option<f64>,
    pub concentration_ratio: Option<f64>,
    pub gap_fraction: Option<f64>,
    pub outside_gap_weighted_mass: f64,
    pub bin: f64,
}

fn summarize_window(sw: &SpectrumWindow, m: Mass, delta: f64) -> WindowSummary {
    let (omega_hat, ratio) = match concentration(sw, delta) {
        Ok((w, r)) => (Some(w), Some(r)),
        Err(_) => (None, None),
    };
    WindowSummary {
        t1: sw.t1,
        t2: sw.t2,
        omega_hat,
        concentration_ratio: ratio,
        gap_fraction: gap_mass_fraction(sw, m).ok(),
        outside_gap_weighted_mass: outside_gap_weighted_mass(sw, m),
        bin: sw.bin,
    }
}

fn spectra(
    traj: &Trajectory,
    cfg: &RunConfig,
    m: Mass,
    dir: &Path,
    csv: bool,
) -> Result<Vec<WindowSummary>, CliError> {
    let d = &cfg.diagnostics;
    let mut out = Vec::new();
    for (k, w) in d.spectrum_windows.iter().enumerate() {
        if w[1] > traj.t_end() + 1e-9 {
            continue;
        }
        let sw = windowed_spectrum(traj, w[0], w[1], taper(d.taper))?;
        if csv {
            write_csv(
                &dir.join(format!("spectrum_{k}.csv")),
                &["omega", "density"],
                sw.omega.iter().zip(&sw.density).map(|(&a, &b)| vec![a, b]),
            )?;
        }
        out.push(summarize_window(&sw, m, d.delta * m.get()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SamplePoint {
    pub t: f64,
    pub energy: f64,
    pub tail_estimate: f64,
    pub tail_warning: bool,
    pub dist: f64,
    pub omega_best: f64,
    pub q_best: f64,
    pub domain_defect: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub schema_version: u32,
    pub config_hash: String,
    pub status: String,
    pub fault: Option<String>,
    pub t_end: f64,
    pub steps: usize,
    pub omega_hat: Option<f64>,
    pub q_hat: Option<f64>,
    pub concentration_ratio: Option<f64>,
    pub gap_fraction: Option<f64>,
    pub qsol_residual: Option<f64>,
    pub sup_abs_zeta: f64,
    pub abs_zeta_trend: Option<f64>,
    pub energy_max_relative_drift: Option<f64>,
    pub domain_defect_max: Option<f64>,
    pub final_dist: Option<f64>,
    pub zeta_dot_initial_mismatch: f64,
    pub windows: Vec<WindowSummary>,
}

/// Everything a simulation produces, also returned to library callers.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub summary: Summary,
    pub trajectory: Trajectory,
    pub samples: Vec<SamplePoint>,
    pub state: RadialState,
}

fn sample_times(every: f64, t_end: f64) -> Vec<f64> {
    if every <= 0.0 {
        return Vec::new();
    }
    let n = (t_end / every + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * every).collect()
}

#[derive(Debug, Serialize)]
struct Timing {
    trace_and_solve: f64,
    samples: f64,
    spectra: f64,
    total: f64,
}

fn sample(
    state: &RadialState,
    traj: &Trajectory,
    t: f64,
    cfg: &RunConfig,
    r: &Resolved,
    quad: &QuadratureConfig,
) -> Result<(FieldSnapshot, SamplePoint), CliError> {
    let snap = snapshot(state, traj, t, &r.grid, r.mass, quad)?;
    let e = energy(&snap, &r.potential, r.mass);
    let (dist, w) = manifold_distance(&snap, &r.potential, r.mass, cfg.diagnostics.r_max)?;
    let defect = domain_condition_defect(&snap, &r.potential, r.mass);
    let point = SamplePoint {
        t,
        energy: e.value,
        tail_estimate: e.tail_estimate,
        tail_warning: e.tail_warning,
        dist,
        omega_best: w.omega(),
        q_best: w.q(),
        domain_defect: defect,
    };
    Ok((snap, point))
}

/// Runs the configured experiment and writes the artifacts into `dir`.
///
/// A blow-up or corrector failure still writes every artifact computable from the
/// partial trajectory, marks `status = "numerical_fault"` and returns the error.
pub fn simulate(cfg: &RunConfig, dir: &Path, log: Log) -> Result<SimulationResult, CliError> {
    let r = cfg.resolve()?;
    std::fs::create_dir_all(dir)?;
    let csv = cfg.output.formats.contains(&Format::Csv);
    let json = cfg.output.formats.contains(&Format::Json);
    let start = Instant::now();
    let state = initial_state(cfg, &r)?;
    log.say(format!(
        "simulate: T = {}, dt = {}, {} steps",
        r.solver.t_final(),
        r.solver.dt(),
        r.solver.steps()
    ));

    let (traj, fault) = match solve_reduced(&state, &r.potential, r.mass, &r.solver) {
        Ok(t) => (t, None),
        Err(e) if e.is_numerical_fault() => {
            let t = e
                .partial_trajectory()
                .cloned()
                .expect("faults carry the partial run");
            log.say(format!("simulate: {e}"));
            (t, Some(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let t_solve = start.elapsed().as_secs_f64();

    if csv {
        write_csv(
            &dir.join("trajectory.csv"),
            &TRAJECTORY_HEADER,
            trajectory_rows(
                (0..traj.len()).map(|k| traj.time(k)),
                traj.zeta(),
                traj.lambda(),
            ),
        )?;
    }

    let quad = QuadratureConfig::default();
    let times = sample_times(cfg.diagnostics.sample_every, traj.t_end());
    let mut samples = Vec::with_capacity(times.len());
    for &t in &times {
        let (_, point) = sample(&state, &traj, t, cfg, &r, &quad)?;
        log.say(format!(
            "  t = {t:>8.3}  H = {:.10e}  dist = {:.3e}",
            point.energy, point.dist
        ));
        samples.push(point);
    }
    for &t in &cfg.diagnostics.snapshot_times {
        if t > traj.t_end() + 1e-12 {
            continue;
        }
        let snap = snapshot(&state, &traj, t, &r.grid, r.mass, &quad)?;
        if csv {
            write_csv(
                &dir.join(field_file_name(t)),
                &["r", "re_psi", "im_psi", "re_psi_dot", "im_psi_dot"],
                snap.r_grid()
                    .iter()
                    .zip(snap.psi.iter().zip(&snap.psi_dot))
                    .map(|(&x, (p, d))| vec![x, p.re, p.im, d.re, d.im]),
            )?;
        }
    }
    if csv {
        write_csv(
            &dir.join("energy.csv"),
            &["t", "H", "tail_estimate"],
            samples.iter().map(|s| vec![s.t, s.energy, s.tail_estimate]),
        )?;
        write_csv(
            &dir.join("attraction.csv"),
            &["t", "dist", "omega_best", "q_best"],
            samples
                .iter()
                .map(|s| vec![s.t, s.dist, s.omega_best, s.q_best]),
        )?;
    }
    let t_samples = start.elapsed().as_secs_f64() - t_solve;

    let windows = spectra(&traj, cfg, r.mass, dir, csv)?;
    let t_spectra = start.elapsed().as_secs_f64() - t_solve - t_samples;

    let last = windows.last();
    let omega_hat = last.and_then(|w| w.omega_hat);
    let q_hat = last.and_then(|w| mean_modulus(&traj, w.t1, w.t2).ok());
    let qsol_residual = match (omega_hat, q_hat) {
        (Some(w), Some(q)) if w.abs() < r.mass.get() => {
            Some(stationary_residual(&r.potential, r.mass, w, q))
        }
        _ => None,
    };
    let half = 0.5 * traj.t_end();
    let trend = if traj.len() >= 6 {
        modulus_trend(
            &traj,
            traj.time(traj.index_of(half).unwrap_or(0)),
            traj.t_end(),
        )
        .ok()
    } else {
        None
    };
    let h0 = samples.first().map(|s| s.energy);
    let drift = h0.map(|h0| {
        let scale = h0.abs().max(f64::MIN_POSITIVE);
        samples
            .iter()
            .filter(|s| s.t <= cfg.grid.r_out - 5.0)
            .map(|s| (s.energy - h0).abs() / scale)
            .fold(0.0, f64::max)
    });
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        config_hash: cfg.hash(),
        status: if fault.is_some() {
            "numerical_fault"
        } else {
            "ok"
        }
        .into(),
        fault: fault.clone(),
        t_end: traj.t_end(),
        steps: traj.len().saturating_sub(1),
        omega_hat,
        q_hat,
        concentration_ratio: last.and_then(|w| w.concentration_ratio),
        gap_fraction: last.and_then(|w| w.gap_fraction),
        qsol_residual,
        sup_abs_zeta: traj.zeta().iter().map(|z| z.norm()).fold(0.0, f64::max),
        abs_zeta_trend: trend,
        energy_max_relative_drift: drift,
        domain_defect_max: samples.iter().map(|s| s.domain_defect).reduce(f64::max),
        final_dist: samples.last().map(|s| s.dist),
        zeta_dot_initial_mismatch: traj
            .zeta_dot()
            .first()
            .map_or(0.0, |d| (d - state.eta0()).norm()),
        windows,
    };
    if json {
        write_json(&dir.join("summary.json"), &summary)?;
        let total = start.elapsed().as_secs_f64();
        write_json(
            &dir.join("timing.json"),
            &Timing {
                trace_and_solve: t_solve,
                samples: t_samples,
                spectra: t_spectra,
                total,
            },
        )?;
    }
    log.say(format!(
        "simulate: done in {:.1} s",
        start.elapsed().as_secs_f64()
    ));
    if let Some(f) = fault {
        return Err(CliError::Numerical(f));
    }
    Ok(SimulationResult {
        summary,
        trajectory: traj,
        samples,
        state,
    })
}

/// Runs the kernel oracle suite and prints a pass/fail table.
pub fn verify_kernels(cfg: &RunConfig, log: Log) -> Result<(), CliError> {
    let r = cfg.resolve()?;
    let checks = run_kernel_checks(r.mass, &r.tolerances);
    println!(
        "{:<28} {:>12} {:>12}  result",
        "check", "max_error", "tolerance"
    );
    for ch in &checks {
        println!(
            "{:<28} {:>12.3e} {:>12.3e}  {}",
            ch.name,
            ch.max_error,
            ch.tolerance,
            if ch.passed { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        log.say(format!(
            "verify-kernels: all {} checks passed (m = {})",
            checks.len(),
            r.mass.get()
        ));
        Ok(())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub omega: f64,
    pub q: f64,
    pub residual: f64,
}

/// Amplitudes and residuals on the symmetric frequency grid of the configuration.
pub fn scan_rows(
    p: &PolynomialPotential,
    m: Mass,
    points: usize,
    edge: f64,
) -> Result<Vec<ScanRow>, CliError> {
    let half = (points - 1) as f64 / 2.0;
    let mut rows = Vec::new();
    for k in 0..points {
        let omega = edge * m.get() * (k as f64 - half) / half;
        for q in solve_amplitudes(p, omega, m)? {
            rows.push(ScanRow {
                omega,
                q,
                residual: stationary_residual(p, m, omega, q),
            });
        }
    }
    Ok(rows)
}

pub fn soliton_scan(cfg: &RunConfig, dir: &Path, log: Log) -> Result<Vec<ScanRow>, CliError> {
    let r = cfg.resolve()?;
    std::fs::create_dir_all(dir)?;
    let rows = scan_rows(&r.potential, r.mass, cfg.scan.points, cfg.scan.edge)?;
    write_csv(
        &dir.join("soliton_scan.csv"),
        &["omega", "q", "residual"],
        rows.iter().map(|x| vec![x.omega, x.q, x.residual]),
    )?;
    let worst = rows.iter().map(|x| x.residual).fold(0.0, f64::max);
    log.say(format!(
        "soliton-scan: {} rows, max residual {worst:.3e}",
        rows.len()
    ));
    Ok(rows)
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    schema_version: u32,
    config_hash: String,
    source: String,
    windows: Vec<WindowSummary>,
}

/// Recomputes the spectra from an existing `trajectory.csv`.
pub fn spectrum(
    cfg: &RunConfig,
    input: &Path,
    dir: &Path,
    log: Log,
) -> Result<Vec<WindowSummary>, CliError> {
    let r = cfg.resolve()?;
    let (t, z) = read_trajectory(input)?;
    if t.len() < 2 || t[0] != 0.0 {
        return Err(CliError::Config(format!(
            "{}: trajectory must start at t = 0",
            input.display()
        )));
    }
    let dt = t[1] - t[0];
    if t.iter()
        .enumerate()
        .any(|(k, &x)| (x - k as f64 * dt).abs() > 1e-9 * (1.0 + x))
    {
        return Err(CliError::Config(format!(
            "{}: column t is not uniformly spaced",
            input.display()
        )));
    }
    let traj = Trajectory::from_samples(r.mass, dt, z)?;
    std::fs::create_dir_all(dir)?;
    let windows = spectra(&traj, cfg, r.mass, dir, true)?;
    write_json(
        &dir.join("spectrum_summary.json"),
        &SpectrumSummary {
            schema_version: SCHEMA_VERSION,
            config_hash: cfg.hash(),
            source: input
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            windows: windows.clone(),
        },
    )?;
    log.say(format!(
        "spectrum: {} windows from {}",
        windows.len(),
        input.display()
    ));
    Ok(windows)
}

/// Output directory: the flag wins over the configuration.
pub fn out_dir(cfg: &RunConfig, flag: Option<&PathBuf>) -> PathBuf {
    flag.cloned()
        .unwrap_or_else(|| cfg.output.directory.clone())
}

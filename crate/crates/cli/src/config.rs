//! Run configuration: a TOML file with a fixed schema and no unknown keys.

use std::path::{Path, PathBuf};

use kgpoint::field::RadialGrid;
use kgpoint::specfun::oracles::KernelTolerances;
use kgpoint::volterra::{ConvMode, SolverConfig};
use kgpoint::{Mass, PolynomialPotential};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub initial_data: InitialData,
    pub solver: SolverSection,
    pub grid: GridSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub kernels: KernelSection,
    #[serde(default)]
    pub scan: ScanSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub m: f64,
    /// `u₀, u₁, …, u_N` of `U(ζ) = Σ uₙ |ζ|^{2n}`.
    pub potential: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Zero,
    Soliton,
    Gaussian,
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Largest,
    Smallest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub preset: Preset,
    /// Soliton frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Which amplitude root when several exist.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Gaussian amplitude and width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Point charges of the `zeta0·G`, `eta0·G` parts for the gaussian and green presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta0: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            preset: Preset::Zero,
            omega: None,
            branch: None,
            theta: None,
            amplitude: None,
            width: None,
            zeta0: None,
            eta0: None,
            perturbation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbShape {
    Bump,
    Gaussian,
}

/// Added to the regular part of `ψ₀`, scaled to `relative_l2` times the `L²` norm of `ψ₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub shape: PerturbShape,
    pub width: f64,
    pub relative_l2: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvModeName {
    Naive,
    BlockedFft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_conv_mode")]
    pub conv_mode: ConvModeName,
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
}

fn default_conv_mode() -> ConvModeName {
    ConvModeName::BlockedFft
}

fn default_blowup() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dr: f64,
    pub r_out: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaperName {
    Hann,
    Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Spacing of energy and attraction samples; `0` disables them.
    #[serde(default = "default_sample_every")]
    pub sample_every: f64,
    /// Times at which full field dumps are written.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// `[t1, t2]` windows for the spectra, in increasing order of `t1`.
    #[serde(default)]
    pub spectrum_windows: Vec<[f64; 2]>,
    #[serde(default = "default_taper")]
    pub taper: TaperName,
    #[serde(default = "default_r_max")]
    pub r_max: u32,
    /// Half-width of the concentration band, in units of `m`.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_sample_every() -> f64 {
    10.0
}

fn default_taper() -> TaperName {
    TaperName::Hann
}

fn default_r_max() -> u32 {
    8
}

fn default_delta() -> f64 {
    0.05
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            sample_every: default_sample_every(),
            snapshot_times: Vec::new(),
            spectrum_windows: Vec::new(),
            taper: default_taper(),
            r_max: default_r_max(),
            delta: default_delta(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub k_hat_transform: f64,
    pub l_hat_limit: f64,
    pub j1_series: f64,
    pub j1_derivative_identity: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        let t = KernelTolerances::default();
        Self {
            k_hat_transform: t.k_hat_transform,
            l_hat_limit: t.l_hat_limit,
            j1_series: t.j1_series,
            j1_derivative_identity: t.j1_derivative_identity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Number of frequencies, spread over `[−edge·m, edge·m]`.
    #[serde(default = "default_scan_points")]
    pub points: usize,
    #[serde(default = "default_scan_edge")]
    pub edge: f64,
}

fn default_scan_points() -> usize {
    201
}

fn default_scan_edge() -> f64 {
    0.999
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            points: default_scan_points(),
            edge: default_scan_edge(),
        }
    }
}

/// The validated pieces of a configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub mass: Mass,
    pub potential: PolynomialPotential,
    pub solver: SolverConfig,
    pub grid: RadialGrid,
    pub tolerances: KernelTolerances,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical re-emitted TOML.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Checks every component invariant and builds the library objects.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let mass = Mass::new(self.model.m)?;
        let potential = PolynomialPotential::new(self.model.potential.clone())?;
        let mode = match self.solver.conv_mode {
            ConvModeName::Naive => ConvMode::Naive,
            ConvModeName::BlockedFft => ConvMode::BlockedFft,
        };
        let mut solver = SolverConfig::new(self.solver.dt, self.solver.t_final)?.with_mode(mode);
        if !(self.solver.blowup_threshold > 0.0) {
            return Err(config_err("solver.blowup_threshold must be positive"));
        }
        solver.blowup_threshold = self.solver.blowup_threshold;
        let grid = RadialGrid::new(self.grid.dr, self.grid.r_out)?;

        let d = &self.diagnostics;
        if !(d.sample_every >= 0.0 && d.sample_every.is_finite()) {
            return Err(config_err("diagnostics.sample_every must be >= 0"));
        }
        if d.r_max == 0 || d.r_max as f64 > self.grid.r_out {
            return Err(config_err(format!(
                "diagnostics.r_max = {} must lie in [1, grid.r_out]",
                d.r_max
            )));
        }
        if !(d.delta > 0.0) {
            return Err(config_err("diagnostics.delta must be positive"));
        }
        for &t in &d.snapshot_times {
            if !(0.0..=self.solver.t_final).contains(&t) {
                return Err(config_err(format!(
                    "snapshot time {t} outside [0, t_final]"
                )));
            }
        }
        for w in &d.spectrum_windows {
            if !(0.0 <= w[0] && w[0] < w[1] && w[1] <= self.solver.t_final) {
                return Err(config_err(format!(
                    "spectrum window {w:?} outside [0, t_final]"
                )));
            }
        }
        if self.scan.points < 2 || !(self.scan.edge > 0.0 && self.scan.edge < 1.0) {
            return Err(config_err("scan needs points >= 2 and 0 < edge < 1"));
        }
        let k = &self.kernels;
        let tolerances = KernelTolerances {
            k_hat_transform: k.k_hat_transform,
            l_hat_limit: k.l_hat_limit,
            j1_series: k.j1_series,
            j1_derivative_identity: k.j1_derivative_identity,
        };
        if [
            k.k_hat_transform,
            k.l_hat_limit,
            k.j1_series,
            k.j1_derivative_identity,
        ]
        .iter()
        .any(|t| !(*t > 0.0))
        {
            return Err(config_err("kernel tolerances must be positive"));
        }
        self.check_initial_data()?;
        Ok(Resolved {
            mass,
            potential,
            solver,
            grid,
            tolerances,
        })
    }

    fn check_initial_data(&self) -> Result<(), CliError> {
        let i = &self.initial_data;
        let forbid = |name: &str, present: bool| {
            if present {
                Err(config_err(format!(
                    "initial_data.{name} is not used by preset {:?}",
                    i.preset
                )))
            } else {
                Ok(())
            }
        };
        match i.preset {
            Preset::Zero => {
                forbid("omega", i.omega.is_some())?;
                forbid("amplitude", i.amplitude.is_some())?;
                forbid("width", i.width.is_some())?;
                forbid("zeta0", i.zeta0.is_some())?;
                forbid("eta0", i.eta0.is_some())?;
            }
            Preset::Soliton => {
                if i.omega.is_none() {
                    return Err(config_err(
                        "initial_data.omega is required for the soliton preset",
                    ));
                }
                forbid("amplitude", i.amplitude.is_some())?;
                forbid("width", i.width.is_some())?;
                forbid("zeta0", i.zeta0.is_some())?;
                forbid("eta0", i.eta0.is_some())?;
            }
            Preset::Gaussian => {
                forbid("omega", i.omega.is_some())?;
                if !i.width.is_some_and(|w| w > 0.0) {
                    return Err(config_err(
                        "initial_data.width > 0 is required for the gaussian preset",
                    ));
                }
            }
            Preset::Green => {
                forbid("omega", i.omega.is_some())?;
                forbid("amplitude", i.amplitude.is_some())?;
                forbid("width", i.width.is_some())?;
            }
        }
        if i.preset != Preset::Soliton {
            forbid("branch", i.branch.is_some())?;
            forbid("theta", i.theta.is_some())?;
        }
        if let Some(p) = &i.perturbation {
            if !(p.width > 0.0 && p.relative_l2 >= 0.0 && p.relative_l2.is_finite()) {
                return Err(config_err(
                    "perturbation needs width > 0 and relative_l2 >= 0",
                ));
            }
        }
        Ok(())
    }
}

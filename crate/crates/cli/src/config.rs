//! Job configuration: a TOML document with `[filter]`, `[sweep]`,
//! `[qubit]`, `[io]`, `[families]`, `[fit]`, and `[device]` sections.
//!
//! Frequencies in configs are plain Hz (lab convention) and are converted
//! to angular frequency at this boundary. An unbounded quality factor is
//! spelled `inf`. Unknown keys anywhere are errors, so typos cannot pass
//! silently.

use crate::CliError;
use mpfilter::bvd::{Quality, ResonatorSpec};
use mpfilter::io::DeviceRecord;
use mpfilter::network::LadderFilterSpec;
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub filter: Option<FilterSection>,
    pub sweep: Option<SweepSection>,
    pub qubit: Option<QubitSection>,
    #[serde(default)]
    pub io: IoSection,
    pub families: Option<FamiliesSection>,
    pub fit: Option<FitSection>,
    pub device: Option<DeviceRecord>,
}

/// One resonator description: resonance in Hz, coupling, quality factor
/// (`inf` for lossless), static capacitance in farads.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSection {
    pub f_hz: f64,
    pub k2: f64,
    pub q: f64,
    pub cg_f: f64,
}

impl ResonatorSection {
    pub fn to_spec(&self, section: &str) -> Result<ResonatorSpec, CliError> {
        let q = Quality::from_f64(self.q)
            .map_err(|e| CliError::Config(format!("{section}.q: {e}")))?;
        ResonatorSpec::from_hz(self.f_hz, self.k2, q, self.cg_f)
            .map_err(|e| CliError::Config(format!("{section}: {e}")))
    }
}

fn default_z0() -> f64 {
    50.0
}

fn default_multiplicity() -> usize {
    2
}

fn default_points() -> usize {
    2001
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub order: usize,
    pub series: ResonatorSection,
    pub shunt: ResonatorSection,
    #[serde(default = "default_z0")]
    pub z0: f64,
    #[serde(default = "default_multiplicity")]
    pub shunt_multiplicity: usize,
}

impl FilterSection {
    pub fn to_spec(&self) -> Result<LadderFilterSpec, CliError> {
        let series = self.series.to_spec("filter.series")?;
        let shunt = self.shunt.to_spec("filter.shunt")?;
        LadderFilterSpec::new(self.order, series, shunt, self.shunt_multiplicity, self.z0)
            .map_err(|e| CliError::Config(format!("filter: {e}")))
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub start_hz: f64,
    pub stop_hz: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

impl SweepSection {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        mpfilter::network::linear_grid(self.start_hz, self.stop_hz, self.points)
            .map_err(|e| CliError::Config(format!("sweep: {e}")))
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    pub f_r_hz: f64,
    pub g_hz: f64,
    pub kappa_hz: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    /// Input file (Touchstone) for `t1 --s2p`-less measured mode and `fit`.
    pub input: Option<PathBuf>,
    /// Output data file; `--out` overrides.
    pub output: Option<PathBuf>,
    /// Optional Touchstone emission path for `simulate`.
    pub touchstone: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamiliesSection {
    /// Quality-factor family applied to both resonator populations
    /// (`inf` allowed).
    pub q: Option<Vec<f64>>,
    /// Additive detunings of the series resonance, Hz.
    pub series_detuning_hz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModelKind {
    Bvd,
    Ladder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitObservable {
    S11,
    S21,
    /// Shunt admittance inferred from port-1 reflection,
    /// `Y = (1/z0)(1 − S11)/(1 + S11)`.
    Admittance,
}

fn default_observable() -> FitObservable {
    FitObservable::S21
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub model: FitModelKind,
    #[serde(default = "default_observable")]
    pub observable: FitObservable,
    #[serde(default)]
    pub magnitude_only: bool,
    pub max_iterations: Option<usize>,
    /// Initial single-resonator guess; required for `model = "bvd"`
    /// (ladder fits start from `[filter]`).
    pub initial: Option<ResonatorSection>,
}

/// Parses and validates a TOML job configuration.
pub fn parse_job_config(text: &str) -> Result<JobConfig, CliError> {
    let cfg: JobConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    if let Some(dev) = &cfg.device {
        dev.validate()
            .map_err(|e| CliError::Config(format!("device: {e}")))?;
    }
    Ok(cfg)
}

/// Reads a configuration file from disk.
pub fn load_job_config(path: &std::path::Path) -> Result<JobConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_job_config(&text)
}

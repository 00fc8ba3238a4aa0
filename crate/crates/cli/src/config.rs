//! Scenario configuration: JSON file plus command-line overrides.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use cvmem_core::model::{derive, DerivedParams, MemoryParams};
use cvmem_core::profiles::PulseShape;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_GRID_POINTS: usize = 256;
/// Smallest half-width, in units of `T`, for Gaussian pulses.
pub const MIN_GAUSSIAN_SPAN: f64 = 8.0;

const DEFAULT_ETA: f64 = 0.8;
const DEFAULT_GT0T: f64 = 2.5;
const DEFAULT_R: f64 = 1.0;
const DEFAULT_ATOMS: f64 = 1e6;
const DEFAULT_POINTS: usize = 4096;
const DEFAULT_SPAN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    WriteSweep,
    EmissionProfile,
    ReadoutSweep,
    NoCloning,
    ToyEquivalence,
    AdiabaticCheck,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::WriteSweep => "write-sweep",
            Scenario::EmissionProfile => "emission-profile",
            Scenario::ReadoutSweep => "readout-sweep",
            Scenario::NoCloning => "no-cloning",
            Scenario::ToyEquivalence => "toy-equivalence",
            Scenario::AdiabaticCheck => "adiabatic-check",
        }
    }

    fn default_gt0t(self) -> f64 {
        match self {
            Scenario::EmissionProfile => 5.0,
            _ => DEFAULT_GT0T,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Memory parameters, either physical rates or the `(eta, gamma_tilde0 T, N)`
/// shortcut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsSpec {
    Physical(MemoryParams),
    Composites(Composites),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Composites {
    pub eta: Option<f64>,
    #[serde(rename = "gt0T")]
    pub gt0t: Option<f64>,
    pub atoms: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: Option<usize>,
    /// Half-width of the time window in units of the pulse time scale.
    pub span: Option<f64>,
}

/// Contents of a config file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub params: Option<ParamsSpec>,
    #[serde(default)]
    pub shape: Option<PulseShape>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: None,
            params: None,
            shape: None,
            r: None,
            grid: GridSpec::default(),
            out_dir: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub out_dir: Option<PathBuf>,
    pub grid_points: Option<usize>,
    pub span: Option<f64>,
    pub r: Option<f64>,
    pub eta: Option<f64>,
    pub gt0t: Option<f64>,
}

/// Fully resolved and validated run settings.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub scenario: Scenario,
    pub derived: DerivedParams,
    pub physical: Option<MemoryParams>,
    pub shape: PulseShape,
    /// Time unit `T` of the shape.
    pub time_scale: f64,
    pub r: f64,
    pub points: usize,
    pub span: f64,
    pub out_dir: PathBuf,
}

impl RunSettings {
    pub fn resolve(cfg: ScenarioConfig, ov: Overrides) -> Result<Self, CliError> {
        let scenario = ov
            .scenario
            .or(cfg.scenario)
            .ok_or_else(|| CliError::Validation("no scenario given".into()))?;
        let shape = cfg.shape.unwrap_or(PulseShape::Gaussian { duration: 1.0 });
        shape.validate()?;
        let time_scale = shape.time_scale();

        let (mut derived, physical) = match cfg.params {
            Some(ParamsSpec::Physical(p)) => (derive(&p)?, Some(p)),
            Some(ParamsSpec::Composites(c)) => (
                DerivedParams::from_composites(
                    c.eta.unwrap_or(DEFAULT_ETA),
                    c.gt0t.unwrap_or(scenario.default_gt0t()) / time_scale,
                    c.atoms.unwrap_or(DEFAULT_ATOMS),
                )?,
                None,
            ),
            None => (
                DerivedParams::from_composites(DEFAULT_ETA, scenario.default_gt0t() / time_scale, DEFAULT_ATOMS)?,
                None,
            ),
        };
        if let Some(eta) = ov.eta {
            derived = derived.with_eta(eta)?;
        }
        if let Some(gt) = ov.gt0t {
            derived = DerivedParams::from_composites(derived.eta, gt / time_scale, derived.atoms)?;
        }
        let r = ov.r.or(cfg.r).or(physical.map(|p| p.r)).unwrap_or(DEFAULT_R);
        if !(r.is_finite() && r >= 0.0) {
            return Err(CliError::Validation(format!("r must be finite and non-negative, got {r}")));
        }

        let points = ov.grid_points.or(cfg.grid.points).unwrap_or(DEFAULT_POINTS);
        if points < MIN_GRID_POINTS {
            return Err(CliError::Validation(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {points}"
            )));
        }
        let span = ov.span.or(cfg.grid.span).unwrap_or(DEFAULT_SPAN);
        if !(span.is_finite() && span > 0.0) {
            return Err(CliError::Validation(format!("span must be positive, got {span}")));
        }
        if matches!(shape, PulseShape::Gaussian { .. }) && span < MIN_GAUSSIAN_SPAN {
            return Err(CliError::Validation(format!(
                "span must be at least {MIN_GAUSSIAN_SPAN} T for a Gaussian pulse, got {span}"
            )));
        }
        let out_dir = ov.out_dir.or(cfg.out_dir).unwrap_or_else(|| PathBuf::from("."));

        Ok(Self {
            scenario,
            derived,
            physical,
            shape,
            time_scale,
            r,
            points,
            span,
            out_dir,
        })
    }

    /// `points` equally spaced times over `[-span T, span T]`.
    pub fn grid(&self) -> Vec<f64> {
        let half = self.span * self.time_scale;
        let n = self.points;
        (0..n)
            .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn gt0t(&self) -> f64 {
        self.derived.gamma_tilde0 * self.time_scale
    }

    /// Duration of a Gaussian shape, or a validation error naming the scenario.
    pub fn gaussian_duration(&self) -> Result<f64, CliError> {
        match self.shape {
            PulseShape::Gaussian { duration } => Ok(duration),
            _ => Err(CliError::Validation(format!(
                "scenario {} needs a Gaussian pulse",
                self.scenario
            ))),
        }
    }
}

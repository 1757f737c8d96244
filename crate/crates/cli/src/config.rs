//! Run configuration, stored as TOML.
//!
//! ```toml
//! schema_version = 1
//!
//! [model]
//! kind = "three-level"          # or "four-level"
//! g = 14.0
//! kappa = 1.0
//! level_energies = [0.0, 1.0, 2.0]   # optional
//! hot = { gamma = 32.0, occupation = 1.0 }
//! cold = { gamma = 32.0, occupation = 0.05 }
//! # ancilla = { gamma = 32.0, occupation = 0.1 }   # four-level only
//!
//! [temperatures]                # optional; fills missing occupations
//! hot = 10.0
//! cold = 1.0
//!
//! [sweep]
//! variable = "n_h"
//! start = 0.05
//! stop = 20.0
//! points = 60
//! spacing = "log"               # or "linear"
//! ```
//!
//! Further optional sections: `[thresholds]`, `[distribution]`,
//! `[numerics]` and `[output]`; see the field docs below.

use std::path::{Path, PathBuf};

use heatlaser::compare::NumericsOptions;
use heatlaser::solver::{SteadyStateMethod, SteadyStateOptions};
use heatlaser::{planck_occupation, BathSpec, EngineKind, EngineModel};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<TemperatureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ThreeLevel,
    FourLevel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: Kind,
    pub g: f64,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_energies: Option<Vec<f64>>,
    pub hot: BathConfig,
    pub cold: BathConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<BathConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub gamma: f64,
    /// Mean thermal occupation; taken from `[temperatures]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation: Option<f64>,
}

/// Bath temperatures; frequencies come from the level energies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureConfig {
    pub hot: f64,
    pub cold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Only `n_h` (the hot-bath occupation) is supported.
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    /// Bracket on n_h searched for G = κ.
    pub lower: f64,
    pub upper: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig { lower: 1e-4, upper: 50.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub n_h: f64,
    #[serde(default)]
    pub wigner: bool,
    #[serde(default = "default_wigner_extent")]
    pub wigner_extent: f64,
    #[serde(default = "default_wigner_points")]
    pub wigner_points: usize,
}

fn default_wigner_extent() -> f64 {
    4.0
}

fn default_wigner_points() -> usize {
    101
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NullSpace,
    TimeEvolution,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Fock truncation; the engine default (40 or 60) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub method: Method,
    /// Times n_max may grow by half when the top Fock level is occupied.
    pub max_retries: usize,
    /// Stopping threshold on ‖dρ/dt‖ for time evolution.
    pub derivative_tol: f64,
    /// Time-evolution budget in units of 1/κ.
    pub max_time: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let d = NumericsOptions::default();
        NumericsConfig {
            n_max: None,
            method: Method::NullSpace,
            max_retries: d.max_retries,
            derivative_tol: d.steady.derivative_tol,
            max_time: d.steady.max_time,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
    /// Prepended to every output file name.
    #[serde(default)]
    pub prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), format: Format::Csv, prefix: String::new() }
    }
}

/// Invalid configuration, with the offending field or TOML location.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {msg}"))
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        self.model()?;
        self.thermal_model()?;
        if let Some(s) = &self.sweep {
            if s.variable != "n_h" {
                return Err(invalid("sweep.variable", format!("unknown variable {:?}; only \"n_h\" is supported", s.variable)));
            }
            if !(s.start > 0.0) || !(s.stop > 0.0) || !s.start.is_finite() || !s.stop.is_finite() {
                return Err(invalid("sweep", "start and stop must be positive"));
            }
            if s.points == 0 {
                return Err(invalid("sweep.points", "must be at least 1"));
            }
            if s.points > 1 && s.stop <= s.start {
                return Err(invalid("sweep.stop", "must exceed sweep.start"));
            }
        }
        let t = &self.thresholds;
        if !(t.lower > 0.0) || !(t.upper > t.lower) || !t.upper.is_finite() {
            return Err(invalid("thresholds", "need 0 < lower < upper"));
        }
        if let Some(d) = &self.distribution {
            if !(d.n_h >= 0.0) || !d.n_h.is_finite() {
                return Err(invalid("distribution.n_h", "must be finite and >= 0"));
            }
            if !(d.wigner_extent > 0.0) || d.wigner_points < 2 {
                return Err(invalid("distribution", "wigner_extent must be > 0 and wigner_points >= 2"));
            }
        }
        let n = &self.numerics;
        if n.n_max.is_some_and(|v| v < 1) {
            return Err(invalid("numerics.n_max", "must be at least 1"));
        }
        if !(n.derivative_tol > 0.0) || !(n.max_time > 0.0) {
            return Err(invalid("numerics", "derivative_tol and max_time must be positive"));
        }
        Ok(())
    }

    fn levels(&self) -> Vec<f64> {
        self.model.level_energies.clone().unwrap_or_else(|| match self.model.kind {
            Kind::ThreeLevel => vec![0.0, 1.0, 2.0],
            Kind::FourLevel => vec![0.0, 1.0, 2.0, 3.0],
        })
    }

    fn kind(&self) -> EngineKind {
        match self.model.kind {
            Kind::ThreeLevel => EngineKind::ThreeLevel,
            Kind::FourLevel => EngineKind::FourLevel,
        }
    }

    /// (ω_h, ω_c, ω_a) from the level energies.
    fn bath_frequencies(&self) -> (f64, f64, Option<f64>) {
        let e = self.levels();
        let top = *e.last().expect("levels are non-empty");
        let omega_a = (e.len() == 4).then(|| e[3] - e[2]);
        (top - e[0], e[1] - e[0], omega_a)
    }

    /// Engine with occupations as configured (or from temperatures).
    pub fn model(&self) -> Result<EngineModel, ConfigError> {
        let m = &self.model;
        let (wh, wc, wa) = self.bath_frequencies();
        let temps = self.temperatures;
        let bath = |name: &str, cfg: &BathConfig, omega: Option<f64>, temp: Option<f64>| -> Result<BathSpec, ConfigError> {
            let field = format!("model.{name}");
            let occupation = match (cfg.occupation, temp, omega) {
                (Some(n), _, _) => n,
                (None, Some(t), Some(w)) => planck_occupation(w, t).map_err(|e| invalid(&format!("temperatures.{name}"), e))?,
                _ => return Err(invalid(&field, "needs an occupation or a temperature")),
            };
            BathSpec::new(cfg.gamma, occupation).map_err(|e| invalid(&field, e))
        };
        let hot = bath("hot", &m.hot, Some(wh), temps.map(|t| t.hot))?;
        let cold = bath("cold", &m.cold, Some(wc), temps.map(|t| t.cold))?;
        let ancilla = match (&m.ancilla, m.kind) {
            (Some(a), Kind::FourLevel) => Some(bath("ancilla", a, wa, temps.and_then(|t| t.ancilla))?),
            (None, Kind::FourLevel) => return Err(invalid("model.ancilla", "required for a four-level engine")),
            (Some(_), Kind::ThreeLevel) => return Err(invalid("model.ancilla", "not allowed for a three-level engine")),
            (None, Kind::ThreeLevel) => None,
        };
        EngineModel::new(self.kind(), hot, cold, ancilla, m.g, m.kappa)
            .and_then(|model| model.with_level_energies(self.levels()))
            .map_err(|e| invalid("model", e))
    }

    /// Engine with Planck baths at the configured temperatures, if any.
    pub fn thermal_model(&self) -> Result<Option<EngineModel>, ConfigError> {
        let Some(t) = self.temperatures else { return Ok(None) };
        let m = &self.model;
        let (wh, wc, wa) = self.bath_frequencies();
        let thermal = |name: &str, gamma: f64, omega: f64, temp: f64| {
            BathSpec::thermal(gamma, omega, temp).map_err(|e| invalid(&format!("temperatures.{name}"), e))
        };
        let hot = thermal("hot", m.hot.gamma, wh, t.hot)?;
        let cold = thermal("cold", m.cold.gamma, wc, t.cold)?;
        let ancilla = match (m.kind, &m.ancilla, wa) {
            (Kind::FourLevel, Some(a), Some(w)) => {
                let temp = t.ancilla.ok_or_else(|| invalid("temperatures.ancilla", "required for a four-level engine"))?;
                Some(thermal("ancilla", a.gamma, w, temp)?)
            }
            _ => None,
        };
        EngineModel::new(self.kind(), hot, cold, ancilla, m.g, m.kappa)
            .map(Some)
            .map_err(|e| invalid("temperatures", e))
    }

    pub fn sweep_values(&self) -> Result<Vec<f64>, ConfigError> {
        let s = self.sweep.as_ref().ok_or_else(|| invalid("sweep", "section missing"))?;
        if s.points == 1 {
            return Ok(vec![s.start]);
        }
        let last = (s.points - 1) as f64;
        Ok((0..s.points)
            .map(|k| {
                let f = k as f64 / last;
                match s.spacing {
                    Spacing::Linear => s.start + f * (s.stop - s.start),
                    Spacing::Log => s.start * (s.stop / s.start).powf(f),
                }
            })
            .collect())
    }

    pub fn numerics_options(&self) -> NumericsOptions {
        let n = &self.numerics;
        NumericsOptions {
            n_max: n.n_max,
            steady: SteadyStateOptions {
                method: match n.method {
                    Method::NullSpace => SteadyStateMethod::NullSpace,
                    Method::TimeEvolution => SteadyStateMethod::TimeEvolution,
                },
                derivative_tol: n.derivative_tol,
                max_time: n.max_time,
                ..SteadyStateOptions::default()
            },
            max_retries: n.max_retries,
        }
    }
}

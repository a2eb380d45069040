//! TOML experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Structural,
    Distribution,
    Collapse,
    Pitop,
    Asymptotics,
    Teleport,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Structural => "structural",
            Experiment::Distribution => "distribution",
            Experiment::Collapse => "collapse",
            Experiment::Pitop => "pitop",
            Experiment::Asymptotics => "asymptotics",
            Experiment::Teleport => "teleport",
        };
        f.write_str(s)
    }
}

/// Sweep axes. Unset axes fall back to per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_mag: Option<Vec<f64>>,
    /// Real signal amplitude (teleport: the input coherent state).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo_mag: Option<Vec<f64>>,
    /// Structural total photon numbers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_tot: Option<Vec<usize>>,
    /// Outcomes for the phase-integral check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<i64>>,
    /// Overrides the default total cutoff rule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    /// Teleport outcome `(x₋, p₊)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homodyne_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_shots: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projector: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_law: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_integral: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    /// Sampling: allowed mean deviation in standard errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<f64>,
}

impl Tolerances {
    pub fn projector(&self) -> f64 {
        self.projector.unwrap_or(1e-10)
    }
    pub fn unitary(&self) -> f64 {
        self.unitary.unwrap_or(1e-12)
    }
    pub fn group_law(&self) -> f64 {
        self.group_law.unwrap_or(1e-10)
    }
    pub fn phase_integral(&self) -> f64 {
        self.phase_integral.unwrap_or(1e-8)
    }
    pub fn closed_form(&self) -> f64 {
        self.closed_form.unwrap_or(1e-10)
    }
    pub fn sigmas(&self) -> f64 {
        self.sigmas.unwrap_or(3.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub tolerance: Tolerances,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.sweep;
        let lists: [(&str, Option<&[f64]>); 6] = [
            ("alpha_mag", s.alpha_mag.as_deref()),
            ("beta", s.beta.as_deref()),
            ("x", s.x.as_deref()),
            ("theta", s.theta.as_deref()),
            ("q", s.q.as_deref()),
            ("lo_mag", s.lo_mag.as_deref()),
        ];
        for (name, list) in lists {
            if let Some(v) = list {
                if v.is_empty() {
                    return Err(ConfigError(format!("sweep.{name} must not be empty")));
                }
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(ConfigError(format!("sweep.{name} contains {bad}")));
                }
            }
        }
        if s.n_tot.as_ref().is_some_and(Vec::is_empty) || s.l.as_ref().is_some_and(Vec::is_empty) {
            return Err(ConfigError("sweep lists must not be empty".into()));
        }
        for name in ["alpha_mag", "lo_mag"] {
            let v = if name == "alpha_mag" { &s.alpha_mag } else { &s.lo_mag };
            if v.as_ref().is_some_and(|v| v.iter().any(|&a| a <= 0.0)) {
                return Err(ConfigError(format!("sweep.{name} entries must be positive")));
            }
        }
        if s.q.as_ref().is_some_and(|v| v.iter().any(|q| q.abs() >= 1.0)) || s.homodyne_q.is_some_and(|q| q.abs() >= 1.0) {
            return Err(ConfigError("q must satisfy |q| < 1".into()));
        }
        if let Some([a, b]) = s.interval {
            if !(a < b) {
                return Err(ConfigError(format!("sweep.interval needs a < b, got [{a}, {b}]")));
            }
        }
        if s.n_shots == Some(0) || s.kernel_dim == Some(0) || s.channel_cutoff == Some(0) {
            return Err(ConfigError("n_shots, kernel_dim and channel_cutoff must be positive".into()));
        }
        let t = &self.tolerance;
        for (name, v) in [
            ("projector", t.projector),
            ("unitary", t.unitary),
            ("group_law", t.group_law),
            ("phase_integral", t.phase_integral),
            ("closed_form", t.closed_form),
            ("sigmas", t.sigmas),
        ] {
            if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return Err(ConfigError(format!("tolerance.{name} must be positive")));
            }
        }
        Ok(())
    }
}

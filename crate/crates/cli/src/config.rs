//! Versioned JSON experiment configuration.

use std::path::{Path, PathBuf};

use modeport::continuum::ProfileFamily;
use modeport::noise::{NoiseModel, ThresholdState, TimeScaling};
use modeport::resources::ResourceSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Teleport,
    Sweep,
    Noise,
    Converge,
    GroundState,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Teleport => "teleport",
            Self::Sweep => "sweep",
            Self::Noise => "noise",
            Self::Converge => "converge",
            Self::GroundState => "ground_state",
        }
    }
}

/// Either an explicit list or a generated grid of particle numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuGrid {
    List(Vec<usize>),
    /// `start, start+step, … ≤ stop`.
    Linear { start: usize, stop: usize, step: usize },
    /// `round(start·factor^i) ≤ stop`, duplicates removed.
    Geometric { start: usize, stop: usize, factor: f64 },
}

impl NuGrid {
    pub fn points(&self) -> Result<Vec<usize>, CliError> {
        let pts = match self {
            Self::List(v) => v.clone(),
            Self::Linear { start, stop, step } => {
                if *step == 0 {
                    return Err(CliError::Config("nu_grid step must be positive".into()));
                }
                (*start..=*stop).step_by(*step).collect()
            }
            Self::Geometric { start, stop, factor } => {
                if !(*factor > 1.0) || *start == 0 {
                    return Err(CliError::Config("geometric nu_grid needs start >= 1 and factor > 1".into()));
                }
                let mut out: Vec<usize> = Vec::new();
                let mut x = *start as f64;
                while x.round() as usize <= *stop {
                    let v = x.round() as usize;
                    if out.last() != Some(&v) {
                        out.push(v);
                    }
                    x *= factor;
                }
                out
            }
        };
        if pts.is_empty() {
            return Err(CliError::Config("nu_grid is empty".into()));
        }
        if pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("nu_grid must be strictly increasing".into()));
        }
        Ok(pts)
    }
}

/// Families for convergence studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    MaxEntangled,
    /// `σ = ν^β` centred at imbalance `center` (0 is the middle).
    Gaussian {
        beta: f64,
        #[serde(default)]
        center: f64,
    },
    Noon,
    Fock {
        fraction: f64,
    },
    /// `c₁|χ¹⟩ + c₂|χ²⟩` of two non-negative pure families.
    Superposition {
        first: Box<FamilySpec>,
        second: Box<FamilySpec>,
        c1: f64,
        c2: f64,
    },
}

impl FamilySpec {
    pub fn family(&self) -> Result<ProfileFamily, CliError> {
        Ok(match self {
            Self::MaxEntangled => ProfileFamily::max_entangled(),
            Self::Gaussian { beta, center } if *center == 0.0 => ProfileFamily::gaussian(*beta),
            Self::Gaussian { beta, center } => ProfileFamily::gaussian_at(*center, *beta),
            Self::Noon => ProfileFamily::noon(),
            Self::Fock { fraction } => ProfileFamily::fock(*fraction),
            Self::Superposition { .. } => {
                return Err(CliError::Config("superposition families cannot be nested".into()));
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Writes a gnuplot script that plots `data`.
    #[serde(default)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub n: usize,
    #[serde(default)]
    pub nu: Option<usize>,
    #[serde(default)]
    pub nu_grid: Option<NuGrid>,
    #[serde(default)]
    pub resource: Option<ResourceSpec>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub noise: Option<NoiseModel>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    /// `t(ν)` for noisy convergence sweeps.
    #[serde(default)]
    pub time_scaling: Option<TimeScaling>,
    #[serde(default)]
    pub threshold_state: Option<ThresholdState>,
    /// Input amplitudes `[re, im]`; Haar-random from the seed when absent.
    #[serde(default)]
    pub input: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub monte_carlo: Option<MonteCarloConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        if cfg.n == 0 {
            return Err(CliError::Config("n must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn check_kind(&self, kind: ExperimentKind) -> Result<(), CliError> {
        match self.experiment {
            Some(k) if k != kind => Err(CliError::Config(format!(
                "config is for experiment '{}' but '{}' was requested",
                k.name(),
                kind.name()
            ))),
            _ => Ok(()),
        }
    }

    pub fn nu(&self) -> Result<usize, CliError> {
        self.nu.ok_or_else(|| CliError::Config("missing field 'nu'".into()))
    }

    pub fn grid(&self) -> Result<Vec<usize>, CliError> {
        self.nu_grid.as_ref().ok_or_else(|| CliError::Config("missing field 'nu_grid'".into()))?.points()
    }

    pub fn resource(&self) -> Result<&ResourceSpec, CliError> {
        self.resource.as_ref().ok_or_else(|| CliError::Config("missing field 'resource'".into()))
    }

    /// Time grid; must be non-negative and non-decreasing.
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let t = self.times.clone().ok_or_else(|| CliError::Config("missing field 'times'".into()))?;
        if t.is_empty() {
            return Err(CliError::Config("times is empty".into()));
        }
        if t.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || t.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Config("times must be finite, non-negative and non-decreasing".into()));
        }
        Ok(t)
    }
}

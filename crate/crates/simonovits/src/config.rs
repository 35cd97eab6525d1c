//! Experiment configuration, stored as TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use simonovits_core::bounds::{Constants, PAPER_DEFAULTS};

use crate::error::AppError;
use crate::lemmas::Lemma;

pub const DEFAULT_MULTIPLIERS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    ScanThreshold,
    VerifyLemma,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Either the name of a shipped bundle or an explicit table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantsSpec {
    Named(String),
    Table(Constants),
}

impl Default for ConstantsSpec {
    fn default() -> Self {
        ConstantsSpec::Named(PAPER_DEFAULTS.to_string())
    }
}

impl ConstantsSpec {
    pub fn resolve(&self) -> Result<Constants, AppError> {
        let c = match self {
            ConstantsSpec::Named(name) => {
                Constants::named(name).ok_or_else(|| AppError::Config(format!("unknown constants bundle {name:?}")))?
            }
            ConstantsSpec::Table(c) => c.clone(),
        };
        c.validate().map_err(|e| AppError::Config(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Built-in name or graph file.
    pub pattern: String,
    pub n_grid: Vec<usize>,
    /// Absolute edge probabilities; takes precedence over the multipliers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    /// Multiples of `p_threshold(n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_multipliers: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub constants: ConstantsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<Lemma>,
    pub output: Output,
}

/// How the `p` axis of a scan is specified.
#[derive(Clone, Debug, PartialEq)]
pub enum PAxis {
    Absolute(Vec<f64>),
    Multipliers(Vec<f64>),
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, AppError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn p_axis(&self) -> PAxis {
        match (&self.p_grid, &self.p_multipliers) {
            (Some(g), _) => PAxis::Absolute(g.clone()),
            (None, Some(m)) => PAxis::Multipliers(m.clone()),
            (None, None) => PAxis::Multipliers(DEFAULT_MULTIPLIERS.to_vec()),
        }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |m: String| Err(AppError::Config(m));
        if self.n_grid.is_empty() {
            return bad("n_grid is empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        match self.p_axis() {
            PAxis::Absolute(g) if g.is_empty() => return bad("p_grid is empty".into()),
            PAxis::Absolute(g) if g.iter().any(|p| !(0.0..=1.0).contains(p)) => {
                return bad("p_grid values must lie in [0, 1]".into())
            }
            PAxis::Multipliers(m) if m.is_empty() => return bad("p_multipliers is empty".into()),
            PAxis::Multipliers(m) if m.iter().any(|x| !(x.is_finite() && *x >= 0.0)) => {
                return bad("p_multipliers must be non-negative".into())
            }
            _ => {}
        }
        if self.task == Task::VerifyLemma && self.lemma.is_none() {
            return bad("task verify-lemma needs a lemma".into());
        }
        self.constants.resolve()?;
        Ok(())
    }
}

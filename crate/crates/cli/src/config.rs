//! Experiment configuration file for `simulate`.
//!
//! JSON, for example:
//!
//! ```json
//! {
//!   "dataset": { "kind": "synthetic", "noise": 0.15 },
//!   "strategies": ["random", "uncertainty", "suggestive"],
//!   "k": 8,
//!   "K": 16,
//!   "budgets": [0.1, 0.3, 0.5],
//!   "seeds": [1, 2, 3, 4, 5],
//!   "ensemble_size": 4,
//!   "output_dir": "curves"
//! }
//! ```
//!
//! `seeds` and `output_dir` are required; everything else defaults to the
//! values shown. Seeds must be spelled out — there is no ambient entropy.

use std::path::PathBuf;

use serde::Deserialize;
use suggestor_core::simulation::StrategyKind;

use crate::error::CliError;

fn default_batch() -> usize {
    8
}

fn default_candidates() -> usize {
    16
}

fn default_budgets() -> Vec<f64> {
    vec![0.1, 0.3, 0.5]
}

fn default_ensemble() -> usize {
    4
}

fn default_noise() -> f64 {
    0.15
}

fn default_strategies() -> Vec<String> {
    vec![
        "random".to_string(),
        "uncertainty".to_string(),
        "suggestive".to_string(),
    ]
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetConfig {
    /// The built-in clustered benchmark.
    Synthetic {
        #[serde(default = "default_noise")]
        noise: f64,
    },
    /// Feature and binary label tensors on disk, paired by sorted file name.
    Tensors {
        features_dir: PathBuf,
        labels_dir: PathBuf,
        #[serde(default = "default_noise")]
        noise: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_batch")]
    pub k: usize,
    #[serde(rename = "K", default = "default_candidates")]
    pub candidates: usize,
    #[serde(default = "default_budgets")]
    pub budgets: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn strategy_kinds(&self) -> Result<Vec<StrategyKind>, CliError> {
        self.strategies
            .iter()
            .map(|name| name.parse::<StrategyKind>().map_err(CliError::from))
            .collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Validation(
                "config must list at least one seed".into(),
            ));
        }
        if self.strategies.is_empty() {
            return Err(CliError::Validation(
                "config must list at least one strategy".into(),
            ));
        }
        self.strategy_kinds()?;
        if self.k == 0 || self.k > self.candidates {
            return Err(CliError::Validation(format!(
                "k = {} and K = {} must satisfy 1 <= k <= K",
                self.k, self.candidates
            )));
        }
        if self.ensemble_size < 2 {
            return Err(CliError::Validation(format!(
                "ensemble_size must be at least 2, got {}",
                self.ensemble_size
            )));
        }
        if self.budgets.is_empty() {
            return Err(CliError::Validation("budgets must be nonempty".into()));
        }
        for (index, &budget) in self.budgets.iter().enumerate() {
            if !budget.is_finite() || budget <= 0.0 || budget > 1.0 {
                return Err(CliError::Validation(format!(
                    "budget {budget} at position {index} is outside (0, 1]"
                )));
            }
            if index > 0 && self.budgets[index - 1] >= budget {
                return Err(CliError::Validation(
                    "budgets must be strictly increasing".into(),
                ));
            }
        }
        let noise = match &self.dataset {
            DatasetConfig::Synthetic { noise } => *noise,
            DatasetConfig::Tensors { noise, .. } => *noise,
        };
        if !noise.is_finite() || !(0.0..0.5).contains(&noise) {
            return Err(CliError::Validation(format!(
                "noise {noise} must lie in [0, 0.5)"
            )));
        }
        Ok(())
    }
}

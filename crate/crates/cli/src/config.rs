//! Run configuration: one JSON file plus flag overrides fully determines a
//! run.
//!
//! Unknown fields are rejected so schema typos surface as config errors.
//! The resolved configuration (defaults applied, overrides folded in) is
//! written next to every run's outputs; worker count is an execution knob
//! and deliberately not part of it.

use std::path::{Path, PathBuf};

use eprune_core::bde::BdeParams;
use eprune_core::trainer::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Blobs {
        per_class: usize,
        classes: usize,
        dim: usize,
        spread: f64,
        seed: u64,
        test_per_class: usize,
    },
    Spirals {
        per_class: usize,
        classes: usize,
        turns: f64,
        noise: f64,
        seed: u64,
        test_per_class: usize,
    },
    Csv {
        train_path: PathBuf,
        label_column: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_per_class: Option<usize>,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_images: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_labels: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_per_class: Option<usize>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub hidden: Vec<usize>,
}

/// Mirror of [`TrainConfig`] with serde defaults.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: u32,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_step_epochs: u32,
    pub lr_gamma: f64,
    pub weight_decay: f64,
    pub stagnation_threshold: u32,
    pub population_size: usize,
    pub f_mut: f64,
    pub crossover_rate: f64,
    pub seed: u64,
    pub topk: Vec<usize>,
    pub reevaluate_parents: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let core = TrainConfig::default();
        Self {
            epochs: core.epochs,
            batch_size: core.batch_size,
            lr: core.lr,
            lr_step_epochs: core.lr_step_epochs,
            lr_gamma: core.lr_gamma,
            weight_decay: core.weight_decay,
            stagnation_threshold: core.stagnation_threshold,
            population_size: core.population_size,
            f_mut: core.bde.mutation_factor,
            crossover_rate: core.bde.crossover_rate,
            seed: core.seed,
            topk: core.topk,
            reevaluate_parents: core.reevaluate_parents,
        }
    }
}

impl TrainSection {
    pub fn to_core(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            lr_step_epochs: self.lr_step_epochs,
            lr_gamma: self.lr_gamma,
            weight_decay: self.weight_decay,
            stagnation_threshold: self.stagnation_threshold,
            population_size: self.population_size,
            bde: BdeParams {
                mutation_factor: self.f_mut,
                crossover_rate: self.crossover_rate,
                seed: 0,
            },
            seed: self.seed,
            topk: self.topk.clone(),
            reevaluate_parents: self.reevaluate_parents,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    /// Target kept-parameter ratio in (0, 1].
    pub rate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSection {
    pub objective: BenchObjective,
    pub dim: usize,
    pub steps: usize,
    pub seeds: usize,
    pub base_seed: u64,
    pub population_size: usize,
    pub f_mut: f64,
    pub crossover_rate: f64,
    /// Seed of the lookup table for `random_table`.
    pub table_seed: u64,
}

impl Default for BenchSection {
    fn default() -> Self {
        let bde = BdeParams::default();
        Self {
            objective: BenchObjective::Onemax,
            dim: 12,
            steps: 500,
            seeds: 100,
            base_seed: 0,
            population_size: 8,
            f_mut: bde.mutation_factor,
            crossover_rate: bde.crossover_rate,
            table_seed: 7,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BenchObjective {
    Onemax,
    RandomTable,
}

/// Flag-level overrides; flags beat file values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub epochs: Option<u32>,
    pub out: Option<PathBuf>,
    pub rate: Option<f64>,
    pub reevaluate_parents: bool,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(&format!("config {}", path.display()), e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn apply_overrides(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.train.seed = seed;
            if let Some(bench) = &mut self.bench {
                bench.base_seed = seed;
            }
        }
        if let Some(epochs) = overrides.epochs {
            self.train.epochs = epochs;
        }
        if let Some(out) = &overrides.out {
            self.out_dir = Some(out.clone());
        }
        if overrides.reevaluate_parents {
            self.train.reevaluate_parents = true;
        }
        if let Some(rate) = overrides.rate {
            self.baseline = Some(BaselineSection { rate });
        }
    }

    pub fn require_dataset(&self) -> Result<&DatasetSpec, CliError> {
        self.dataset
            .as_ref()
            .ok_or_else(|| CliError::Config("config needs a `dataset` section".into()))
    }

    pub fn require_network(&self) -> Result<&NetworkSpec, CliError> {
        let net = self
            .network
            .as_ref()
            .ok_or_else(|| CliError::Config("config needs a `network` section".into()))?;
        if net.hidden.is_empty() || net.hidden.iter().any(|&w| w == 0) {
            return Err(CliError::Config(
                "network.hidden must hold positive widths".into(),
            ));
        }
        Ok(net)
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.out_dir
            .as_deref()
            .ok_or_else(|| CliError::Config("no output directory (set out_dir or --out)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_match_core() {
        let section = TrainSection::default();
        let core = section.to_core();
        assert_eq!(core, TrainConfig::default());
        let json = serde_json::to_string(&section).unwrap();
        let back: TrainSection = serde_json::from_str(&json).unwrap();
        assert_eq!(section, back);
    }

    #[test]
    fn unknown_fields_are_schema_errors() {
        let bad = r#"{ "train": { "epochz": 3 } }"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
    }

    #[test]
    fn overrides_beat_file_values() {
        let mut config: RunConfig =
            serde_json::from_str(r#"{ "train": { "seed": 5, "epochs": 100 } }"#).unwrap();
        config.apply_overrides(&Overrides {
            seed: Some(9),
            epochs: Some(3),
            out: Some(PathBuf::from("/tmp/x")),
            rate: Some(0.4),
            reevaluate_parents: true,
        });
        assert_eq!(config.train.seed, 9);
        assert_eq!(config.train.epochs, 3);
        assert!(config.train.reevaluate_parents);
        assert_eq!(config.baseline.unwrap().rate, 0.4);
        assert_eq!(config.out_dir.unwrap(), PathBuf::from("/tmp/x"));
    }

    #[test]
    fn dataset_spec_is_tagged() {
        let spec: DatasetSpec = serde_json::from_str(
            r#"{ "kind": "blobs", "per_class": 10, "classes": 4, "dim": 2,
                 "spread": 1.0, "seed": 7, "test_per_class": 2 }"#,
        )
        .unwrap();
        assert!(matches!(spec, DatasetSpec::Blobs { classes: 4, .. }));
    }
}

//! Builds train/test dataset pairs from a config's dataset spec.

use eprune_core::data::Dataset;

use crate::config::DatasetSpec;
use crate::csv_data;
use crate::error::CliError;
use crate::idx;

pub struct BuiltData {
    pub train: Dataset,
    pub test: Dataset,
    /// Original label tokens per class index, when the source was a CSV.
    pub label_map: Option<Vec<String>>,
}

pub fn build_datasets(spec: &DatasetSpec) -> Result<BuiltData, CliError> {
    match spec {
        DatasetSpec::Blobs {
            per_class,
            classes,
            dim,
            spread,
            seed,
            test_per_class,
        } => {
            let ds = eprune_core::data::gen_blobs(*per_class, *classes, *dim, *spread, *seed)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let (train, test) = ds
                .split_per_class(*test_per_class)
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(BuiltData {
                train,
                test,
                label_map: None,
            })
        }
        DatasetSpec::Spirals {
            per_class,
            classes,
            turns,
            noise,
            seed,
            test_per_class,
        } => {
            let ds = eprune_core::data::gen_spirals(*per_class, *classes, *turns, *noise, *seed)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let (train, test) = ds
                .split_per_class(*test_per_class)
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(BuiltData {
                train,
                test,
                label_map: None,
            })
        }
        DatasetSpec::Csv {
            train_path,
            label_column,
            test_path,
            test_per_class,
        } => match (test_path, test_per_class) {
            (Some(test_path), _) => {
                let (train, test) = csv_data::load_csv_pair(train_path, test_path, label_column)?;
                Ok(BuiltData {
                    train: train.dataset,
                    test,
                    label_map: Some(train.label_map),
                })
            }
            (None, Some(test_per_class)) => {
                let loaded = csv_data::load_csv(train_path, label_column)?;
                let (train, test) = loaded
                    .dataset
                    .split_per_class(*test_per_class)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok(BuiltData {
                    train,
                    test,
                    label_map: Some(loaded.label_map),
                })
            }
            (None, None) => Err(CliError::Config(
                "csv dataset needs either test_path or test_per_class".into(),
            )),
        },
        DatasetSpec::Idx {
            images,
            labels,
            test_images,
            test_labels,
            test_per_class,
        } => match (test_images, test_labels, test_per_class) {
            (Some(test_images), Some(test_labels), _) => {
                // Shared class count so a split missing some class still
                // lines up.
                let train_raw = idx::read_idx_labels(labels)?;
                let test_raw = idx::read_idx_labels(test_labels)?;
                let classes = train_raw
                    .iter()
                    .chain(test_raw.iter())
                    .copied()
                    .max()
                    .unwrap_or(0) as usize
                    + 1;
                let classes = classes.max(2);
                let train = idx::load_idx_with_classes(images, labels, classes)?;
                let test = idx::load_idx_with_classes(test_images, test_labels, classes)?;
                Ok(BuiltData {
                    train,
                    test,
                    label_map: None,
                })
            }
            (None, None, Some(test_per_class)) => {
                let ds = idx::load_idx(images, labels)?;
                let (train, test) = ds
                    .split_per_class(*test_per_class)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok(BuiltData {
                    train,
                    test,
                    label_map: None,
                })
            }
            _ => Err(CliError::Config(
                "idx dataset needs either both test files or test_per_class".into(),
            )),
        },
    }
}

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{mean_and_std, train_one_fold, FoldReport, PreparedDataset, TrainError};
use crate::graph::{stratified_folds, ConfigError, Dataset};
use crate::nn::ModelConfig;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldFailure {
    pub fold: usize,
    pub repeat: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub config: ModelConfig,
    pub folds_per_repeat: usize,
    pub repeats: usize,
    pub folds: Vec<FoldReport>,
    pub failures: Vec<FoldFailure>,
}

impl ExperimentReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.test_accuracy).collect()
    }

    /// Mean and sample standard deviation of test accuracy over all
    /// successful folds of all repeats.
    pub fn mean_and_std(&self) -> (f64, f64) {
        mean_and_std(&self.accuracies())
    }
}

pub fn run_experiment<T: Scalar>(
    dataset: &Dataset,
    config: &ModelConfig,
    folds: usize,
    repeats: usize,
) -> Result<ExperimentReport, TrainError> {
    run_experiment_with::<T>(dataset, config, folds, repeats, &mut |_| {})
}

/// Runs `repeats` independent nested cross-validations. Repeat `i` uses
/// seed `config.seed + i` both for the fold partition and for the models.
/// A fold that fails is recorded and the run continues; configuration
/// errors that would hit every fold abort the run.
///
/// `on_fold` is called after each fold with its outcome.
pub fn run_experiment_with<T: Scalar>(
    dataset: &Dataset,
    config: &ModelConfig,
    folds: usize,
    repeats: usize,
    on_fold: &mut dyn FnMut(&Result<FoldReport, FoldFailure>),
) -> Result<ExperimentReport, TrainError> {
    config.validate().map_err(ConfigError::Invalid)?;
    if repeats == 0 {
        return Err(ConfigError::Invalid("need at least one repeat".into()).into());
    }
    let prepared = PreparedDataset::<T>::new(dataset, config.sp_range());
    let mut report = ExperimentReport {
        dataset: dataset.name.clone(),
        config: config.clone(),
        folds_per_repeat: folds,
        repeats,
        folds: Vec::new(),
        failures: Vec::new(),
    };
    for repeat in 0..repeats {
        let seed = config.seed.wrapping_add(repeat as u64);
        let splits = stratified_folds(dataset, folds, seed)?;
        let fold_config = ModelConfig {
            seed,
            ..config.clone()
        };
        for (fold, split) in splits.iter().enumerate() {
            let outcome = match train_one_fold(&prepared, split, &fold_config, fold, repeat) {
                Ok(r) => {
                    info!(
                        "{} {} repeat {repeat} fold {fold}: accuracy {:.4} (epoch {}, {:.1}s)",
                        dataset.name,
                        config.mode.label(),
                        r.test_accuracy,
                        r.best_epoch,
                        r.wall_time_seconds
                    );
                    Ok(r)
                }
                Err(e) if e.is_config() => return Err(e),
                Err(e) => {
                    warn!("{} repeat {repeat} fold {fold} failed: {e}", dataset.name);
                    Err(FoldFailure {
                        fold,
                        repeat,
                        message: e.to_string(),
                    })
                }
            };
            on_fold(&outcome);
            match outcome {
                Ok(r) => report.folds.push(r),
                Err(f) => report.failures.push(f),
            }
        }
    }
    Ok(report)
}

//! Nested cross-validation driver: per-fold training with epoch-level model
//! selection, repeated experiments, and report files.

mod experiment;
mod fold;
mod report;

use thiserror::Error;

use crate::graph::{ConfigError, Dataset};
use crate::matrix::Matrix;
use crate::nn::NnError;
use crate::scalar::Scalar;
use crate::sp::{compute_sp_tensor, SpTensor};

pub use experiment::{run_experiment, run_experiment_with, ExperimentReport, FoldFailure};
pub use fold::{
    train_one_fold, train_one_fold_observed, FoldObserver, FoldReport, NoObserver, Phase,
};
pub use report::{emit_report, parse_folds_csv, summary_text, FoldRow, ReportError};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] NnError),
    #[error("non-finite loss at epoch {epoch} on graph {graph}")]
    NonFiniteLoss { epoch: usize, graph: usize },
}

impl TrainError {
    /// Configuration problems as opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            TrainError::Config(_)
                | TrainError::Model(NnError::Config(_) | NnError::FeatureDim { .. })
        )
    }
}

/// A graph converted to the model's scalar type with its shortest-path
/// tensor precomputed.
#[derive(Clone, Debug)]
pub struct PreparedGraph<T> {
    pub features: Matrix<T>,
    pub sp: SpTensor<T>,
    pub target: usize,
}

impl<T: Scalar> PreparedGraph<T> {
    pub fn node_count(&self) -> usize {
        self.features.rows()
    }
}

/// A dataset with every graph prepared for a fixed distance range.
#[derive(Clone, Debug)]
pub struct PreparedDataset<T> {
    pub name: String,
    pub graphs: Vec<PreparedGraph<T>>,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub sp_range: usize,
}

impl<T: Scalar> PreparedDataset<T> {
    pub fn new(dataset: &Dataset, sp_range: usize) -> Self {
        let graphs = dataset
            .graphs
            .iter()
            .map(|g| PreparedGraph {
                features: g.features().cast(),
                sp: compute_sp_tensor(g, sp_range),
                target: g.target(),
            })
            .collect();
        Self {
            name: dataset.name.clone(),
            graphs,
            num_classes: dataset.num_classes,
            feature_dim: dataset.feature_dim,
            sp_range,
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for a single
/// value).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let (m, s) = mean_and_std(&[0.8, 0.9]);
        assert!((m - 0.85).abs() < 1e-15);
        assert!((s - 0.05f64.hypot(0.05)).abs() < 1e-15);
        assert_eq!(mean_and_std(&[0.4]), (0.4, 0.0));
    }
}

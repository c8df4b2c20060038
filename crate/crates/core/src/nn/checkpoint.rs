//! Self-describing JSON checkpoints: configuration, model geometry and every
//! parameter tensor with its shape. Values are stored as `f64` and parsed
//! with exact round-tripping, so `f64` and `f32` models reload bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Model, ModelConfig, NnError};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

const FORMAT: &str = "pgconv-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] NnError),
}

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    config: ModelConfig,
    feature_dim: usize,
    num_classes: usize,
    k: usize,
    tensors: Vec<TensorRecord>,
}

pub fn write_checkpoint<T: Scalar>(
    model: &Model<T>,
    path: impl AsRef<Path>,
) -> Result<(), CheckpointError> {
    let tensors = model
        .param_names()
        .into_iter()
        .zip(model.params())
        .map(|(name, p)| TensorRecord {
            name,
            rows: p.shape().0,
            cols: p.shape().1,
            data: p.value.as_slice().iter().map(|x| x.as_f64()).collect(),
        })
        .collect();
    let file = CheckpointFile {
        format: FORMAT.into(),
        version: VERSION,
        config: model.config().clone(),
        feature_dim: model.feature_dim(),
        num_classes: model.num_classes(),
        k: model.k(),
        tensors,
    };
    fs::write(path, serde_json::to_vec(&file)?)?;
    Ok(())
}

pub fn read_checkpoint<T: Scalar>(path: impl AsRef<Path>) -> Result<Model<T>, CheckpointError> {
    let file: CheckpointFile = serde_json::from_slice(&fs::read(path)?)?;
    if file.format != FORMAT || file.version != VERSION {
        return Err(CheckpointError::Format(format!(
            "unsupported format {} v{}",
            file.format, file.version
        )));
    }
    let mut model = Model::seeded(file.config, file.feature_dim, file.num_classes, file.k)?;
    let names = model.param_names();
    if names.len() != file.tensors.len() {
        return Err(CheckpointError::Format(format!(
            "expected {} tensors, found {}",
            names.len(),
            file.tensors.len()
        )));
    }
    let mut values = Vec::with_capacity(names.len());
    for (expected, t) in names.iter().zip(file.tensors) {
        if *expected != t.name {
            return Err(CheckpointError::Format(format!(
                "expected tensor {expected}, found {}",
                t.name
            )));
        }
        if t.data.len() != t.rows * t.cols {
            return Err(CheckpointError::Format(format!(
                "{}: data does not match its shape",
                t.name
            )));
        }
        values.push(Matrix::from_vec(
            t.rows,
            t.cols,
            t.data.into_iter().map(T::of).collect(),
        ));
    }
    model.set_param_values(&values)?;
    Ok(model)
}

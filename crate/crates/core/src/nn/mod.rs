//! Layers with hand-derived gradients, the classification head, the Adam
//! optimizer and the composed graph-classification network.

mod adam;
mod checkpoint;
mod config;
mod conv1d;
mod dense;
mod graph_conv;
mod loss;
mod model;
mod sortpool;

use rand::Rng;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub use adam::{adam_step, Adam, AdamConfig};
pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointError};
pub use config::{ConvMode, ModelConfig, SortPoolK};
pub use conv1d::{relu, relu_backward, Conv1d, MaxPool1d};
pub use dense::{Dense, Dropout};
pub use graph_conv::{concat_layers, dgcnn_forward, pgc_forward, GraphConv, GraphConvCache};
pub use loss::{softmax, softmax_cross_entropy};
pub use model::{Forward, Model, Trace};
pub use sortpool::{sortpool_backward, sortpool_forward, SortPoolRecord};

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("model configuration: {0}")]
    Config(String),
    #[error("input has feature dim {got}, model expects {expected}")]
    FeatureDim { expected: usize, got: usize },
    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),
}

/// A trainable tensor with its Adam moment buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct Param<T> {
    pub value: Matrix<T>,
    pub m: Matrix<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> Param<T> {
    pub fn new(value: Matrix<T>) -> Self {
        let (r, c) = value.shape();
        Self {
            value,
            m: Matrix::zeros(r, c),
            v: Matrix::zeros(r, c),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(Matrix::zeros(rows, cols))
    }

    /// Uniform in `±√(6 / (fan_in + fan_out))`.
    pub fn glorot(
        rows: usize,
        cols: usize,
        fan_in: usize,
        fan_out: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        Self::new(Matrix::from_fn(rows, cols, |_, _| {
            T::of(rng.gen_range(-bound..=bound))
        }))
    }

    pub fn shape(&self) -> (usize, usize) {
        self.value.shape()
    }
}

/// Gradients laid out in the same order as [`Model::params`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T>(pub Vec<Matrix<T>>);

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(params: &[&Param<T>]) -> Self {
        Self(
            params
                .iter()
                .map(|p| Matrix::zeros(p.shape().0, p.shape().1))
                .collect(),
        )
    }

    pub fn accumulate(&mut self, other: &Self) {
        assert_eq!(self.0.len(), other.0.len(), "gradient layout mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, s: T) {
        for g in &mut self.0 {
            g.scale(s);
        }
    }
}

//! Graph classification with parametric shortest-path graph convolutions.
//!
//! A parametric graph convolution aggregates, for every node, the mean
//! representation of the nodes at each exact shortest-path distance
//! `j = 0..=r`, transforms each distance block with its own weights and
//! concatenates the results. Stacked layers feed a SortPooling read-out
//! followed by 1D convolutions and a dense classifier.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision used by the experiment driver.

pub mod gradcheck;
pub mod graph;
pub mod matrix;
pub mod nn;
pub mod scalar;
pub mod sp;
pub mod train;

pub use graph::{Dataset, Graph};
pub use matrix::Matrix;
pub use nn::{ConvMode, Model, ModelConfig, SortPoolK};
pub use scalar::Scalar;
pub use sp::{compute_sp_tensor, SpTensor};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type SpTensor64 = SpTensor<f64>;
pub type SpTensor32 = SpTensor<f32>;
pub type Model64 = Model<f64>;
pub type Model32 = Model<f32>;

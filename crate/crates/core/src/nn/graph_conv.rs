//! Graph convolution layers.
//!
//! Parametric mode keeps one weight matrix per shortest-path distance
//! `j = 0..=r` and concatenates the `r + 1` activated blocks:
//!
//! ```text
//! H' = ‖_j tanh((D̂^j)⁻¹ SP^j H W^j + b^j)
//! ```
//!
//! Baseline mode is the random-walk normalized convolution over
//! `SP^0 + SP^1` with a single weight matrix.

use rand::Rng;

use super::{ConvMode, Param};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::sp::SpTensor;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphConv<T> {
    mode: ConvMode,
    weights: Vec<Param<T>>,
    biases: Vec<Param<T>>,
}

/// Per-block values kept from the forward pass.
#[derive(Clone, Debug)]
pub struct GraphConvCache<T> {
    /// Normalized propagated input of each block.
    propagated: Vec<Matrix<T>>,
    /// Activated output of each block.
    activated: Vec<Matrix<T>>,
}

impl<T: Scalar> GraphConv<T> {
    /// `r` is ignored in baseline mode.
    pub fn new(mode: ConvMode, r: usize, c_in: usize, c_out: usize, rng: &mut impl Rng) -> Self {
        let blocks = match mode {
            ConvMode::Parametric => r + 1,
            ConvMode::DgcnnBaseline => 1,
        };
        let weights = (0..blocks)
            .map(|_| Param::glorot(c_in, c_out, c_in, c_out, rng))
            .collect();
        let biases = (0..blocks).map(|_| Param::zeros(1, c_out)).collect();
        Self {
            mode,
            weights,
            biases,
        }
    }

    /// Builds a layer from explicit weights, with zero biases.
    pub fn from_weights(mode: ConvMode, weights: Vec<Matrix<T>>) -> Self {
        assert!(
            !weights.is_empty(),
            "graph convolution needs a weight matrix"
        );
        if mode == ConvMode::DgcnnBaseline {
            assert_eq!(
                weights.len(),
                1,
                "baseline convolution has one weight matrix"
            );
        }
        let c_out = weights[0].cols();
        let biases = weights.iter().map(|_| Param::zeros(1, c_out)).collect();
        Self {
            mode,
            weights: weights.into_iter().map(Param::new).collect(),
            biases,
        }
    }

    pub fn mode(&self) -> ConvMode {
        self.mode
    }

    pub fn blocks(&self) -> usize {
        self.weights.len()
    }

    pub fn in_width(&self) -> usize {
        self.weights[0].shape().0
    }

    pub fn block_width(&self) -> usize {
        self.weights[0].shape().1
    }

    pub fn out_width(&self) -> usize {
        self.blocks() * self.block_width()
    }

    /// Weight and bias of each block, interleaved.
    pub fn params(&self) -> Vec<&Param<T>> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    fn propagate(&self, sp: &SpTensor<T>, j: usize, h: &Matrix<T>) -> Matrix<T> {
        match self.mode {
            ConvMode::Parametric => sp.propagate(j, h),
            ConvMode::DgcnnBaseline => sp.propagate_joint(h),
        }
    }

    fn propagate_transpose(&self, sp: &SpTensor<T>, j: usize, g: &Matrix<T>) -> Matrix<T> {
        match self.mode {
            ConvMode::Parametric => sp.propagate_transpose(j, g),
            ConvMode::DgcnnBaseline => sp.propagate_joint_transpose(g),
        }
    }

    pub fn forward(&self, sp: &SpTensor<T>, h: &Matrix<T>) -> (Matrix<T>, GraphConvCache<T>) {
        assert_eq!(
            h.cols(),
            self.in_width(),
            "graph conv expects {} input channels, got {}",
            self.in_width(),
            h.cols()
        );
        let mut propagated = Vec::with_capacity(self.blocks());
        let mut activated = Vec::with_capacity(self.blocks());
        for (j, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let p = self.propagate(sp, j, h);
            let mut z = p.matmul(&w.value);
            let bias = b.value.row(0);
            for i in 0..z.rows() {
                for (x, &bb) in z.row_mut(i).iter_mut().zip(bias) {
                    *x = (*x + bb).tanh();
                }
            }
            propagated.push(p);
            activated.push(z);
        }
        let out = concat_layers(&activated);
        (
            out,
            GraphConvCache {
                propagated,
                activated,
            },
        )
    }

    /// Returns the input gradient and the parameter gradients in
    /// [`params`](Self::params) order.
    pub fn backward(
        &self,
        sp: &SpTensor<T>,
        cache: &GraphConvCache<T>,
        grad_out: &Matrix<T>,
    ) -> (Matrix<T>, Vec<Matrix<T>>) {
        let c = self.block_width();
        assert_eq!(grad_out.cols(), self.out_width(), "graph conv grad width");
        let n = grad_out.rows();
        let mut grad_in = Matrix::zeros(n, self.in_width());
        let mut grads = Vec::with_capacity(2 * self.blocks());
        for (j, w) in self.weights.iter().enumerate() {
            let y = &cache.activated[j];
            let mut dz = grad_out.col_block(j * c, c);
            for (g, &yy) in dz.as_mut_slice().iter_mut().zip(y.as_slice()) {
                *g *= T::one() - yy * yy;
            }
            grads.push(cache.propagated[j].t_matmul(&dz));
            grads.push(dz.col_sums());
            let dp = dz.matmul_t(&w.value);
            grad_in.add_assign(&self.propagate_transpose(sp, j, &dp));
        }
        (grad_in, grads)
    }
}

/// Horizontal concatenation of per-layer (or per-block) representations.
pub fn concat_layers<T: Scalar>(blocks: &[Matrix<T>]) -> Matrix<T> {
    let refs: Vec<&Matrix<T>> = blocks.iter().collect();
    Matrix::hcat(&refs)
}

/// Parametric convolution without bias: one weight matrix per distance
/// `0..=r`, where `r + 1 = weights.len()` must not exceed the tensor range.
pub fn pgc_forward<T: Scalar>(sp: &SpTensor<T>, h: &Matrix<T>, weights: &[Matrix<T>]) -> Matrix<T> {
    GraphConv::from_weights(ConvMode::Parametric, weights.to_vec())
        .forward(sp, h)
        .0
}

/// Baseline convolution without bias.
pub fn dgcnn_forward<T: Scalar>(sp: &SpTensor<T>, h: &Matrix<T>, weight: &Matrix<T>) -> Matrix<T> {
    GraphConv::from_weights(ConvMode::DgcnnBaseline, vec![weight.clone()])
        .forward(sp, h)
        .0
}

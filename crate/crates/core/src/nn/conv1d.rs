//! 1D convolution and max pooling over `channels × length` signals.

use rand::Rng;

use super::Param;
use crate::matrix::{axpy, Matrix};
use crate::scalar::Scalar;

/// Cross-correlation with `out_channels` filters of `in_channels × width`.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1d<T> {
    in_channels: usize,
    width: usize,
    stride: usize,
    /// `out_channels × (in_channels · width)`, channel-major within a row.
    pub weight: Param<T>,
    /// `1 × out_channels`
    pub bias: Param<T>,
}

impl<T: Scalar> Conv1d<T> {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        width: usize,
        stride: usize,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(
            width >= 1 && stride >= 1,
            "conv1d width and stride must be positive"
        );
        Self {
            in_channels,
            width,
            stride,
            weight: Param::glorot(
                out_channels,
                in_channels * width,
                in_channels * width,
                out_channels * width,
                rng,
            ),
            bias: Param::zeros(1, out_channels),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape().0
    }

    pub fn out_len(&self, len: usize) -> Option<usize> {
        (len >= self.width).then(|| (len - self.width) / self.stride + 1)
    }

    /// Rows are the receptive fields of successive output positions
    /// (`out_len × (in_channels · width)`, channel-major like the filters).
    fn patches(&self, x: &Matrix<T>, out_len: usize) -> Matrix<T> {
        let cols = self.in_channels * self.width;
        let mut p = Matrix::zeros(out_len, cols);
        for t in 0..out_len {
            let start = t * self.stride;
            let dst = p.row_mut(t);
            for c in 0..self.in_channels {
                dst[c * self.width..(c + 1) * self.width]
                    .copy_from_slice(&x.row(c)[start..start + self.width]);
            }
        }
        p
    }

    fn checked_out_len(&self, x: &Matrix<T>) -> usize {
        assert_eq!(x.rows(), self.in_channels, "conv1d input channels");
        let len = x.cols();
        self.out_len(len)
            .unwrap_or_else(|| panic!("signal of length {len} shorter than kernel {}", self.width))
    }

    pub fn forward(&self, x: &Matrix<T>) -> Matrix<T> {
        let out_len = self.checked_out_len(x);
        let w = &self.weight.value;
        let mut out = Matrix::zeros(self.out_channels(), out_len);
        if self.in_channels == 1 {
            // single channel: patches are a strided view of the signal
            T::gemm(
                w.rows(),
                self.width,
                out_len,
                w.as_slice(),
                (w.cols(), 1),
                x.as_slice(),
                (1, self.stride),
                out.as_mut_slice(),
            );
        } else {
            out = w.matmul_t(&self.patches(x, out_len));
        }
        let bias = self.bias.value.row(0);
        for (o, &b) in bias.iter().enumerate() {
            for v in out.row_mut(o) {
                *v += b;
            }
        }
        out
    }

    /// Returns `(grad_input, [grad_weight, grad_bias])`.
    pub fn backward(&self, x: &Matrix<T>, grad_out: &Matrix<T>) -> (Matrix<T>, Vec<Matrix<T>>) {
        let out_len = self.checked_out_len(x);
        assert_eq!(
            grad_out.shape(),
            (self.out_channels(), out_len),
            "conv1d grad shape"
        );
        let w = &self.weight.value;
        let grad_w = if self.in_channels == 1 {
            let mut gw = Matrix::zeros(w.rows(), w.cols());
            T::gemm(
                w.rows(),
                out_len,
                self.width,
                grad_out.as_slice(),
                (out_len, 1),
                x.as_slice(),
                (self.stride, 1),
                gw.as_mut_slice(),
            );
            gw
        } else {
            grad_out.matmul(&self.patches(x, out_len))
        };
        let grad_b = grad_out.transpose().col_sums();
        // scatter patch gradients back onto the signal
        let grad_p = grad_out.t_matmul(w);
        let mut grad_x = Matrix::zeros(x.rows(), x.cols());
        for t in 0..out_len {
            let start = t * self.stride;
            let src = grad_p.row(t);
            for c in 0..self.in_channels {
                axpy(
                    &mut grad_x.row_mut(c)[start..start + self.width],
                    T::one(),
                    &src[c * self.width..(c + 1) * self.width],
                );
            }
        }
        (grad_x, vec![grad_w, grad_b])
    }
}

/// Per-channel max pooling; ties resolve to the earliest position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxPool1d {
    pub width: usize,
    pub stride: usize,
}

impl MaxPool1d {
    pub fn out_len(&self, len: usize) -> Option<usize> {
        (len >= self.width).then(|| (len - self.width) / self.stride + 1)
    }

    /// Returns the pooled signal and the argmax position of every output.
    pub fn forward<T: Scalar>(&self, x: &Matrix<T>) -> (Matrix<T>, Vec<usize>) {
        let out_len = self.out_len(x.cols()).unwrap_or_else(|| {
            panic!(
                "signal of length {} shorter than pool {}",
                x.cols(),
                self.width
            )
        });
        let mut out = Matrix::zeros(x.rows(), out_len);
        let mut argmax = Vec::with_capacity(x.rows() * out_len);
        for c in 0..x.rows() {
            let row = x.row(c);
            for t in 0..out_len {
                let start = t * self.stride;
                let mut best = start;
                for p in start + 1..start + self.width {
                    if !row[best].is_nan() && (row[p] > row[best] || row[p].is_nan()) {
                        best = p;
                    }
                }
                out[(c, t)] = row[best];
                argmax.push(best);
            }
        }
        (out, argmax)
    }

    pub fn backward<T: Scalar>(
        &self,
        input_len: usize,
        argmax: &[usize],
        grad_out: &Matrix<T>,
    ) -> Matrix<T> {
        assert_eq!(
            argmax.len(),
            grad_out.rows() * grad_out.cols(),
            "stale pooling record"
        );
        let mut grad = Matrix::zeros(grad_out.rows(), input_len);
        for c in 0..grad_out.rows() {
            for t in 0..grad_out.cols() {
                grad[(c, argmax[c * grad_out.cols() + t])] += grad_out[(c, t)];
            }
        }
        grad
    }
}

pub fn relu<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    x.map(|v| if v <= T::zero() { T::zero() } else { v })
}

/// Gradient through a ReLU given either its input or its output.
pub fn relu_backward<T: Scalar>(out: &Matrix<T>, grad: &Matrix<T>) -> Matrix<T> {
    let mut g = grad.clone();
    for (gg, &o) in g.as_mut_slice().iter_mut().zip(out.as_slice()) {
        if o <= T::zero() {
            *gg = T::zero();
        }
    }
    g
}

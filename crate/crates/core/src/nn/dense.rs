use rand::Rng;

use super::Param;
use crate::matrix::{axpy, Matrix};
use crate::scalar::Scalar;

/// Affine map `y = W x + b` on a single vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    /// `out × in`
    pub weight: Param<T>,
    /// `1 × out`
    pub bias: Param<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn new(input: usize, output: usize, rng: &mut impl Rng) -> Self {
        Self {
            weight: Param::glorot(output, input, input, output, rng),
            bias: Param::zeros(1, output),
        }
    }

    pub fn input_len(&self) -> usize {
        self.weight.shape().1
    }

    pub fn output_len(&self) -> usize {
        self.weight.shape().0
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.input_len(), "dense input length");
        let w = &self.weight.value;
        (0..self.output_len())
            .map(|o| {
                w.row(o)
                    .iter()
                    .zip(x)
                    .fold(self.bias.value[(0, o)], |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Returns `(grad_input, [grad_weight, grad_bias])`.
    pub fn backward(&self, x: &[T], grad_out: &[T]) -> (Vec<T>, Vec<Matrix<T>>) {
        let w = &self.weight.value;
        let mut grad_x = vec![T::zero(); x.len()];
        let mut grad_w = Matrix::zeros(w.rows(), w.cols());
        for (o, &g) in grad_out.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            axpy(grad_w.row_mut(o), g, x);
            axpy(&mut grad_x, g, w.row(o));
        }
        let grad_b = Matrix::from_vec(1, grad_out.len(), grad_out.to_vec());
        (grad_x, vec![grad_w, grad_b])
    }
}

/// Inverted dropout: kept units are scaled by `1 / (1 - rate)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dropout<T> {
    pub scales: Vec<T>,
}

impl<T: Scalar> Dropout<T> {
    pub fn sample(len: usize, rate: f64, rng: &mut dyn rand::RngCore) -> Self {
        let keep = T::of(1.0 / (1.0 - rate));
        let scales = (0..len)
            .map(|_| {
                if rng.gen::<f64>() < rate {
                    T::zero()
                } else {
                    keep
                }
            })
            .collect();
        Self { scales }
    }

    pub fn identity(len: usize) -> Self {
        Self {
            scales: vec![T::one(); len],
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(&self.scales).map(|(&a, &s)| a * s).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn affine_values() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut d = Dense::<f64>::new(2, 2, &mut rng);
        d.weight.value = Matrix::from_rows(&[[1.0, 2.0], [0.0, -1.0]]);
        d.bias.value = Matrix::from_rows(&[[0.5, 0.0]]);
        assert_eq!(d.forward(&[1.0, 1.0]), vec![3.5, -1.0]);
        let (gx, gp) = d.backward(&[1.0, 2.0], &[1.0, 0.0]);
        assert_eq!(gx, vec![1.0, 2.0]);
        assert_eq!(gp[0], Matrix::from_rows(&[[1.0, 2.0], [0.0, 0.0]]));
        assert_eq!(gp[1], Matrix::from_rows(&[[1.0, 0.0]]));
    }

    #[test]
    fn dropout_rate_zero_keeps_everything() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let d = Dropout::<f64>::sample(100, 0.0, &mut rng);
        assert!(d.scales.iter().all(|&s| s == 1.0));
        let d = Dropout::<f64>::sample(10_000, 0.5, &mut rng);
        let kept = d.scales.iter().filter(|&&s| s == 2.0).count();
        assert!((4_500..5_500).contains(&kept));
    }
}

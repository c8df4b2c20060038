use serde::{Deserialize, Serialize};

use super::{NnError, Param};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            step_size: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected Adam update on one parameter. `t` is the 1-based step.
pub fn adam_step<T: Scalar>(param: &mut Param<T>, grad: &Matrix<T>, t: u64, config: &AdamConfig) {
    assert!(t >= 1, "adam step count starts at 1");
    assert_eq!(param.shape(), grad.shape(), "adam gradient shape");
    let b1 = T::of(config.beta1);
    let b2 = T::of(config.beta2);
    let c1 = T::one() - T::of(config.beta1.powi(t as i32));
    let c2 = T::one() - T::of(config.beta2.powi(t as i32));
    let lr = T::of(config.step_size);
    let eps = T::of(config.epsilon);
    let Param { value, m, v } = param;
    for (((p, m), v), &g) in value
        .as_mut_slice()
        .iter_mut()
        .zip(m.as_mut_slice())
        .zip(v.as_mut_slice())
        .zip(grad.as_slice())
    {
        *m = b1 * *m + (T::one() - b1) * g;
        *v = b2 * *v + (T::one() - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Optimizer state shared across a model's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    steps: u64,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Self { config, steps: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Checks every gradient for finiteness before touching any parameter.
    pub fn step<T: Scalar>(
        &mut self,
        params: Vec<&mut Param<T>>,
        names: &[String],
        grads: &[Matrix<T>],
    ) -> Result<(), NnError> {
        assert_eq!(params.len(), grads.len(), "gradient layout mismatch");
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            let name = names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("param[{i}]"));
            return Err(NnError::NonFiniteGradient(name));
        }
        self.steps += 1;
        for (p, g) in params.into_iter().zip(grads) {
            adam_step(p, g, self.steps, &self.config);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = Param::new(Matrix::from_rows(&[[0.5f64, -1.0]]));
        let before = p.value.clone();
        adam_step(&mut p, &Matrix::zeros(1, 2), 1, &AdamConfig::default());
        assert_eq!(p.value, before);
    }

    #[test]
    fn first_step_moves_by_step_size() {
        let cfg = AdamConfig {
            step_size: 1e-3,
            ..AdamConfig::default()
        };
        let mut p = Param::new(Matrix::from_rows(&[[0.0f64, 0.0, 0.0]]));
        adam_step(&mut p, &Matrix::from_rows(&[[2.0, -0.5, 30.0]]), 1, &cfg);
        for (&x, sign) in p.value.as_slice().iter().zip([-1.0, 1.0, -1.0]) {
            assert!((x - sign * 1e-3).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn quadratic_descends_monotonically() {
        // f(x) = (x - 3)^2 from x = 0
        let cfg = AdamConfig {
            step_size: 1e-3,
            ..AdamConfig::default()
        };
        let mut p = Param::new(Matrix::from_rows(&[[0.0f64]]));
        let f = |x: f64| (x - 3.0).powi(2);
        let mut prev = f(0.0);
        for t in 1..=100 {
            let x = p.value[(0, 0)];
            adam_step(&mut p, &Matrix::from_rows(&[[2.0 * (x - 3.0)]]), t, &cfg);
            let now = f(p.value[(0, 0)]);
            assert!(now < prev, "step {t}: {now} >= {prev}");
            prev = now;
        }
    }

    #[test]
    fn non_finite_gradient_names_param() {
        let mut adam = Adam::new(AdamConfig::default());
        let mut a = Param::new(Matrix::from_rows(&[[1.0f64]]));
        let mut b = Param::new(Matrix::from_rows(&[[1.0f64]]));
        let names = vec!["a".to_string(), "b".to_string()];
        let err = adam
            .step(
                vec![&mut a, &mut b],
                &names,
                &[
                    Matrix::from_rows(&[[0.1]]),
                    Matrix::from_rows(&[[f64::NAN]]),
                ],
            )
            .unwrap_err();
        assert_eq!(err, NnError::NonFiniteGradient("b".into()));
        assert_eq!(a.value[(0, 0)], 1.0);
        assert_eq!(adam.steps(), 0);
    }
}

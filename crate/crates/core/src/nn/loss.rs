use crate::scalar::Scalar;

/// Max-shifted softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Cross-entropy of `softmax(logits)` against `target`, with its gradient
/// with respect to the logits.
pub fn softmax_cross_entropy<T: Scalar>(logits: &[T], target: usize) -> (T, Vec<T>) {
    assert!(logits.len() >= 2, "need at least two classes");
    assert!(target < logits.len(), "target {target} out of range");
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let log_total = logits.iter().map(|&z| (z - max).exp()).sum::<T>().ln();
    let loss = -(logits[target] - max - log_total);
    let mut grad = softmax(logits);
    grad[target] -= T::one();
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_logits_cost_ln2() {
        let (loss, grad) = softmax_cross_entropy(&[0.3f64, 0.3], 1);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(grad, vec![0.5, -0.5]);
    }

    #[test]
    fn confident_prediction_is_nearly_free() {
        let (loss, _) = softmax_cross_entropy(&[30.0f64, -30.0], 0);
        assert!((0.0..1e-12).contains(&loss));
        let (loss, _) = softmax_cross_entropy(&[1000.0f64, -1000.0], 1);
        assert!(loss.is_finite() && (loss - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let logits = [0.2f64, -1.3, 0.7, 2.1];
        let (_, grad) = softmax_cross_entropy(&logits, 2);
        let h = 1e-6;
        for i in 0..logits.len() {
            let mut up = logits;
            up[i] += h;
            let mut down = logits;
            down[i] -= h;
            let fd =
                (softmax_cross_entropy(&up, 2).0 - softmax_cross_entropy(&down, 2).0) / (2.0 * h);
            assert!(
                (fd - grad[i]).abs() / grad[i].abs().max(1e-3) < 1e-8,
                "{i}: {fd} vs {}",
                grad[i]
            );
        }
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn bad_target() {
        softmax_cross_entropy(&[0.0f64, 0.0], 2);
    }
}

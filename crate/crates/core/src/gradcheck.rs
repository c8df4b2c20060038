//! Central finite-difference checks of every hand-written gradient, layer
//! by layer and through the composed model, in `f64`.
//!
//! Piecewise-smooth operations (SortPooling, ReLU, max pooling) are only
//! differentiable away from their switching points, so every random
//! instance is resampled until sort keys are separated by more than
//! [`SORT_KEY_GAP`] and ReLU / pooling inputs sit at least [`KINK_MARGIN`]
//! away from their kinks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::nn::{
    relu, relu_backward, softmax_cross_entropy, sortpool_backward, sortpool_forward, Conv1d,
    ConvMode, Dense, Forward, GraphConv, MaxPool1d, Model, ModelConfig, SortPoolK,
};
use crate::sp::{compute_sp_tensor, SpTensor};

pub const STEP: f64 = 1e-6;
/// Composed model.
pub const TOLERANCE: f64 = 1e-5;
/// Individual layers.
pub const LAYER_TOLERANCE: f64 = 1e-6;
/// Softmax cross-entropy against its logits.
pub const LOSS_TOLERANCE: f64 = 1e-8;
pub const SORT_KEY_GAP: f64 = 1e-2;
pub const KINK_MARGIN: f64 = 1e-4;
/// Gradients whose norms are both below this are treated as zero.
pub const NORM_FLOOR: f64 = 1e-6;

const MAX_ATTEMPTS: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub name: String,
    pub rel_error: f64,
    pub tolerance: f64,
}

impl GradCheck {
    pub fn passed(&self) -> bool {
        self.rel_error < self.tolerance
    }
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, NORM_FLOOR)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "gradient lengths differ");
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied())
        .max(norm(&mut b.iter().copied()))
        .max(NORM_FLOOR);
    diff / scale
}

/// Central differences of a scalar function of `len` coordinates, where
/// `eval(i, delta)` returns the function with coordinate `i` shifted by
/// `delta`.
pub fn numerical_gradient(len: usize, mut eval: impl FnMut(usize, f64) -> f64) -> Vec<f64> {
    (0..len)
        .map(|i| (eval(i, STEP) - eval(i, -STEP)) / (2.0 * STEP))
        .collect()
}

fn check(name: String, analytic: &[f64], numeric: &[f64]) -> GradCheck {
    GradCheck {
        rel_error: relative_error(analytic, numeric),
        name,
        tolerance: LAYER_TOLERANCE,
    }
}

fn shifted(m: &Matrix<f64>, i: usize, delta: f64) -> Matrix<f64> {
    let mut m = m.clone();
    m.as_mut_slice()[i] += delta;
    m
}

fn uniform(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
}

fn project(r: &Matrix<f64>, y: &Matrix<f64>) -> f64 {
    r.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| a * b)
        .sum()
}

/// Erdős–Rényi graph with continuous random node features.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, feature_dim: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    let x = Matrix::from_fn(n, feature_dim, |_, _| rng.gen::<f64>());
    Graph::new(n, edges, x, 0)
}

/// True when all values are pairwise further apart than `gap`.
pub fn well_separated(values: &[f64], gap: f64) -> bool {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.windows(2).all(|w| w[1] - w[0] > gap)
}

fn clear_of_kink(values: &[f64]) -> bool {
    values.iter().all(|v| v.abs() > KINK_MARGIN)
}

/// Every pooling window either holds an exact tie (identical functions, as
/// for zero padding) or a clear winner.
fn pool_windows_decided(x: &Matrix<f64>, pool: MaxPool1d) -> bool {
    let Some(len) = pool.out_len(x.cols()) else {
        return true;
    };
    (0..x.rows()).all(|c| {
        (0..len).all(|t| {
            let w = &x.row(c)[t * pool.stride..t * pool.stride + pool.width];
            let mut s = w.to_vec();
            s.sort_by(|a, b| b.total_cmp(a));
            s.len() < 2 || s[0] == s[1] || s[0] - s[1] > KINK_MARGIN
        })
    })
}

fn graph_conv_checks(rng: &mut ChaCha8Rng, mode: ConvMode, r: usize) -> Vec<GradCheck> {
    let label = match mode {
        ConvMode::Parametric => format!("graph_conv(parametric, r={r})"),
        ConvMode::DgcnnBaseline => "graph_conv(dgcnn)".to_string(),
    };
    let g = random_graph(rng, 7, 0.35, 3);
    let sp: SpTensor<f64> = compute_sp_tensor(&g, r.max(1));
    let mut layer = GraphConv::<f64>::new(mode, r, 3, 2, rng);
    for p in layer.params_mut() {
        p.value = uniform(rng, p.value.rows(), p.value.cols(), 0.8);
    }
    let h = uniform(rng, 7, 3, 1.0);
    let proj = uniform(rng, 7, layer.out_width(), 1.0);
    let (_, cache) = layer.forward(&sp, &h);
    let (grad_in, grads) = layer.backward(&sp, &cache, &proj);

    let mut out = Vec::new();
    let numeric = numerical_gradient(h.as_slice().len(), |i, d| {
        project(&proj, &layer.forward(&sp, &shifted(&h, i, d)).0)
    });
    out.push(check(
        format!("{label} input"),
        grad_in.as_slice(),
        &numeric,
    ));
    for (p, analytic) in grads.iter().enumerate() {
        let numeric = numerical_gradient(analytic.as_slice().len(), |i, d| {
            let mut l = layer.clone();
            l.params_mut()[p].value.as_mut_slice()[i] += d;
            project(&proj, &l.forward(&sp, &h).0)
        });
        let kind = if p % 2 == 0 { "weight" } else { "bias" };
        out.push(check(
            format!("{label} {kind}[{}]", p / 2),
            analytic.as_slice(),
            &numeric,
        ));
    }
    out
}

fn sortpool_checks(rng: &mut ChaCha8Rng) -> Result<Vec<GradCheck>, String> {
    let mut out = Vec::new();
    for (n, k) in [(8, 5), (5, 8)] {
        let h = (0..MAX_ATTEMPTS)
            .map(|_| uniform(rng, n, 4, 1.0))
            .find(|h| well_separated(&(0..n).map(|i| h[(i, 3)]).collect::<Vec<_>>(), SORT_KEY_GAP))
            .ok_or("could not sample separated sort keys")?;
        let proj = uniform(rng, k, 4, 1.0);
        let (_, record) = sortpool_forward(&h, k);
        let analytic = sortpool_backward(&proj, &record);
        let numeric = numerical_gradient(n * 4, |i, d| {
            project(&proj, &sortpool_forward(&shifted(&h, i, d), k).0)
        });
        out.push(check(
            format!("sortpool(n={n}, k={k}) input"),
            analytic.as_slice(),
            &numeric,
        ));
    }
    Ok(out)
}

fn conv1d_checks(rng: &mut ChaCha8Rng) -> Vec<GradCheck> {
    let mut out = Vec::new();
    for (channels, width, stride, len) in [(1, 4, 4, 16), (2, 3, 1, 9), (3, 2, 2, 11)] {
        let mut conv = Conv1d::<f64>::new(channels, 3, width, stride, rng);
        conv.bias.value = uniform(rng, 1, 3, 0.5);
        let x = uniform(rng, channels, len, 1.0);
        let proj = uniform(rng, 3, conv.out_len(len).unwrap(), 1.0);
        let (gx, grads) = conv.backward(&x, &proj);
        let label = format!("conv1d(in={channels}, width={width}, stride={stride})");
        let numeric = numerical_gradient(x.as_slice().len(), |i, d| {
            project(&proj, &conv.forward(&shifted(&x, i, d)))
        });
        out.push(check(format!("{label} input"), gx.as_slice(), &numeric));
        let numeric = numerical_gradient(grads[0].as_slice().len(), |i, d| {
            let mut c = conv.clone();
            c.weight.value.as_mut_slice()[i] += d;
            project(&proj, &c.forward(&x))
        });
        out.push(check(
            format!("{label} weight"),
            grads[0].as_slice(),
            &numeric,
        ));
        let numeric = numerical_gradient(3, |i, d| {
            let mut c = conv.clone();
            c.bias.value.as_mut_slice()[i] += d;
            project(&proj, &c.forward(&x))
        });
        out.push(check(
            format!("{label} bias"),
            grads[1].as_slice(),
            &numeric,
        ));
    }
    out
}

fn pool_and_relu_checks(rng: &mut ChaCha8Rng) -> Result<Vec<GradCheck>, String> {
    let pool = MaxPool1d {
        width: 2,
        stride: 2,
    };
    let x = (0..MAX_ATTEMPTS)
        .map(|_| uniform(rng, 2, 9, 1.0))
        .find(|x| pool_windows_decided(x, pool) && clear_of_kink(x.as_slice()))
        .ok_or("could not sample decided pooling windows")?;
    let (pooled, argmax) = pool.forward(&x);
    let proj = uniform(rng, 2, pooled.cols(), 1.0);
    let analytic = pool.backward(x.cols(), &argmax, &proj);
    let numeric = numerical_gradient(18, |i, d| {
        project(&proj, &pool.forward(&shifted(&x, i, d)).0)
    });
    let mut out = vec![check(
        "maxpool1d input".into(),
        analytic.as_slice(),
        &numeric,
    )];

    let proj = uniform(rng, 2, 9, 1.0);
    let analytic = relu_backward(&x, &proj);
    let numeric = numerical_gradient(18, |i, d| project(&proj, &relu(&shifted(&x, i, d))));
    out.push(check("relu input".into(), analytic.as_slice(), &numeric));
    Ok(out)
}

fn dense_and_loss_checks(rng: &mut ChaCha8Rng) -> Vec<GradCheck> {
    let mut dense = Dense::<f64>::new(5, 3, rng);
    dense.bias.value = uniform(rng, 1, 3, 0.5);
    let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let proj: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dot = |y: Vec<f64>| y.iter().zip(&proj).map(|(a, b)| a * b).sum::<f64>();
    let (gx, grads) = dense.backward(&x, &proj);
    let mut out = Vec::new();
    let numeric = numerical_gradient(5, |i, d| {
        let mut x = x.clone();
        x[i] += d;
        dot(dense.forward(&x))
    });
    out.push(check("dense input".into(), &gx, &numeric));
    for (p, kind) in [(0, "weight"), (1, "bias")] {
        let numeric = numerical_gradient(grads[p].as_slice().len(), |i, d| {
            let mut l = dense.clone();
            let target = if p == 0 { &mut l.weight } else { &mut l.bias };
            target.value.as_mut_slice()[i] += d;
            dot(l.forward(&x))
        });
        out.push(check(
            format!("dense {kind}"),
            grads[p].as_slice(),
            &numeric,
        ));
    }

    let logits: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let (_, analytic) = softmax_cross_entropy(&logits, 2);
    let numeric = numerical_gradient(4, |i, d| {
        let mut z = logits.clone();
        z[i] += d;
        softmax_cross_entropy(&z, 2).0
    });
    out.push(GradCheck {
        tolerance: LOSS_TOLERANCE,
        ..check("softmax cross-entropy logits".into(), &analytic, &numeric)
    });
    out
}

/// Small configuration used for the composed-model checks.
pub fn small_config(mode: ConvMode, r: usize) -> ModelConfig {
    ModelConfig {
        mode,
        r,
        conv_layers: 2,
        channels: 2,
        sortpool_k: SortPoolK::Fixed(6),
        conv1_filters: 2,
        conv2_filters: 2,
        conv2_width: 2,
        dense_width: 4,
        ..ModelConfig::default()
    }
}

/// True when the forward pass of `model` on this input is away from every
/// non-differentiable point.
pub fn model_input_is_smooth(model: &Model<f64>, x: &Matrix<f64>, sp: &SpTensor<f64>) -> bool {
    let Ok(f) = model.forward(x, sp, None) else {
        return false;
    };
    let concat = f.trace.node_representation();
    let keys: Vec<f64> = (0..concat.rows())
        .map(|i| concat[(i, concat.cols() - 1)])
        .collect();
    let pool = MaxPool1d {
        width: model.config().pool_width,
        stride: model.config().pool_width,
    };
    well_separated(&keys, SORT_KEY_GAP)
        && f.trace.relu_inputs().iter().all(|v| clear_of_kink(v))
        && pool_windows_decided(&f.trace.pool_input(), pool)
}

/// Cross-entropy on class 1, in evaluation mode or with a fixed dropout
/// mask (the same seed reproduces it on every pass).
fn model_loss(
    model: &Model<f64>,
    x: &Matrix<f64>,
    sp: &SpTensor<f64>,
    dropout: bool,
) -> (f64, Forward<f64>) {
    let mut drop = ChaCha8Rng::seed_from_u64(7);
    let rng: Option<&mut dyn rand::RngCore> = if dropout { Some(&mut drop) } else { None };
    let f = model.forward(x, sp, rng).expect("checked input");
    (softmax_cross_entropy(&f.logits, 1).0, f)
}

fn model_gradients(
    model: &Model<f64>,
    x: &Matrix<f64>,
    sp: &SpTensor<f64>,
    dropout: bool,
) -> (Vec<Matrix<f64>>, Matrix<f64>) {
    let (_, f) = model_loss(model, x, sp, dropout);
    let (_, grad_logits) = softmax_cross_entropy(&f.logits, 1);
    let (grads, grad_x) = model.backward(sp, &f.trace, &grad_logits);
    (grads.0, grad_x)
}

fn model_checks(
    rng: &mut ChaCha8Rng,
    mode: ConvMode,
    r: usize,
    n: usize,
    dropout: bool,
) -> Result<Vec<GradCheck>, String> {
    let config = small_config(mode, r);
    let label = format!(
        "model({}, r={r}, n={n}{})",
        mode.label(),
        if dropout { ", dropout" } else { "" }
    );
    let nonzero = |m: &Matrix<f64>| m.frobenius() > NORM_FLOOR;
    let (model, x, sp, grads, grad_x) = (0..MAX_ATTEMPTS)
        .find_map(|_| {
            let mut model = Model::<f64>::new(config.clone(), 3, 3, 6, rng).ok()?;
            // nonzero biases keep zero padding rows off the ReLU kinks
            for p in model.params_mut() {
                if p.value.rows() == 1 {
                    p.value = uniform(rng, 1, p.value.cols(), 0.5);
                }
            }
            let g = random_graph(rng, n, 0.4, 3);
            let sp = compute_sp_tensor(&g, config.sp_range());
            let x = g.features().clone();
            if !model_input_is_smooth(&model, &x, &sp) {
                return None;
            }
            // dead ReLUs would make every comparison vacuous
            let (grads, grad_x) = model_gradients(&model, &x, &sp, dropout);
            (nonzero(&grad_x) && grads.iter().all(nonzero)).then_some((model, x, sp, grads, grad_x))
        })
        .ok_or_else(|| format!("{label}: could not sample a smooth instance"))?;

    let mut out = Vec::new();
    let numeric = numerical_gradient(x.as_slice().len(), |i, d| {
        model_loss(&model, &shifted(&x, i, d), &sp, dropout).0
    });
    let model_check = |name: String, a: &[f64], n: &[f64]| GradCheck {
        tolerance: TOLERANCE,
        ..check(name, a, n)
    };
    out.push(model_check(
        format!("{label} input"),
        grad_x.as_slice(),
        &numeric,
    ));
    for ((p, analytic), name) in grads.iter().enumerate().zip(model.param_names()) {
        let mut probe = model.clone();
        let numeric = numerical_gradient(analytic.as_slice().len(), |i, d| {
            let orig = probe.params()[p].value.as_slice()[i];
            probe.params_mut()[p].value.as_mut_slice()[i] = orig + d;
            let l = model_loss(&probe, &x, &sp, dropout).0;
            probe.params_mut()[p].value.as_mut_slice()[i] = orig;
            l
        });
        out.push(model_check(
            format!("{label} {name}"),
            analytic.as_slice(),
            &numeric,
        ));
    }
    Ok(out)
}

/// Runs every check. Fails only if no admissible random instance could be
/// drawn; individual results carry their own pass/fail state.
pub fn run_suite(seed: u64) -> Result<Vec<GradCheck>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for r in 0..=3 {
        out.extend(graph_conv_checks(&mut rng, ConvMode::Parametric, r));
    }
    out.extend(graph_conv_checks(&mut rng, ConvMode::DgcnnBaseline, 1));
    out.extend(sortpool_checks(&mut rng)?);
    out.extend(conv1d_checks(&mut rng));
    out.extend(pool_and_relu_checks(&mut rng)?);
    out.extend(dense_and_loss_checks(&mut rng));
    for (mode, r) in [
        (ConvMode::Parametric, 1),
        (ConvMode::Parametric, 2),
        (ConvMode::DgcnnBaseline, 1),
    ] {
        // smaller and larger than k
        for n in [4, 9] {
            out.extend(model_checks(&mut rng, mode, r, n, false)?);
        }
    }
    out.extend(model_checks(&mut rng, ConvMode::Parametric, 2, 9, true)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_basics() {
        assert_eq!(relative_error(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!((relative_error(&[1.0, 0.0], &[0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!(relative_error(&[1.0, 2.0], &[1.0, 2.0 + 1e-9]) < 1e-9);
    }

    #[test]
    fn numerical_gradient_of_quadratic() {
        let x = [0.3, -1.2];
        let g = numerical_gradient(2, |i, d| {
            let mut y = x;
            y[i] += d;
            y[0] * y[0] + 3.0 * y[0] * y[1]
        });
        assert!(relative_error(&g, &[2.0 * 0.3 + 3.0 * -1.2, 3.0 * 0.3]) < 1e-8);
    }

    #[test]
    fn separation() {
        assert!(well_separated(&[0.0, 0.5, -0.5], 0.1));
        assert!(!well_separated(&[0.0, 0.05], 0.1));
    }
}

//! The full network: graph convolutions → concatenation → SortPooling →
//! 1D conv → max-pool → 1D conv → dense → dropout → dense → softmax.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::conv1d::{relu, relu_backward};
use super::{
    concat_layers, softmax, sortpool_backward, sortpool_forward, Conv1d, Dense, Dropout, Gradients,
    GraphConv, GraphConvCache, MaxPool1d, ModelConfig, NnError, Param, SortPoolRecord,
};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::sp::SpTensor;

#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    config: ModelConfig,
    feature_dim: usize,
    num_classes: usize,
    k: usize,
    graph_convs: Vec<GraphConv<T>>,
    conv1: Conv1d<T>,
    pool: MaxPool1d,
    conv2: Conv1d<T>,
    hidden: Dense<T>,
    output: Dense<T>,
}

/// Everything the backward pass needs from one forward pass.
#[derive(Clone, Debug)]
pub struct Trace<T> {
    conv_caches: Vec<GraphConvCache<T>>,
    concat: Matrix<T>,
    record: SortPoolRecord,
    signal: Matrix<T>,
    conv1_pre: Matrix<T>,
    pool_argmax: Vec<usize>,
    pooled: Matrix<T>,
    conv2_pre: Matrix<T>,
    flat: Vec<T>,
    hidden_pre: Vec<T>,
    dropout: Dropout<T>,
    dropped: Vec<T>,
}

impl<T: Scalar> Trace<T> {
    /// Concatenated graph-convolution output, the SortPooling input.
    pub fn node_representation(&self) -> &Matrix<T> {
        &self.concat
    }

    pub fn sortpool_record(&self) -> &SortPoolRecord {
        &self.record
    }

    /// Pre-activation values of the three ReLU layers.
    pub fn relu_inputs(&self) -> [&[T]; 3] {
        [
            self.conv1_pre.as_slice(),
            self.conv2_pre.as_slice(),
            &self.hidden_pre,
        ]
    }

    /// Max-pooling input (`conv1_filters × k`, after ReLU).
    pub fn pool_input(&self) -> Matrix<T> {
        relu(&self.conv1_pre)
    }
}

pub struct Forward<T> {
    pub logits: Vec<T>,
    pub probs: Vec<T>,
    pub trace: Trace<T>,
}

impl<T: Scalar> Model<T> {
    /// Builds a freshly initialized model for inputs of width `feature_dim`,
    /// `num_classes` outputs and SortPooling size `k`.
    pub fn new(
        config: ModelConfig,
        feature_dim: usize,
        num_classes: usize,
        k: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<Self, NnError> {
        config.validate().map_err(NnError::Config)?;
        if num_classes < 2 {
            return Err(NnError::Config(format!(
                "need at least two classes, got {num_classes}"
            )));
        }
        if k == 0 {
            return Err(NnError::Config("sortpool k must be positive".into()));
        }
        let pool = MaxPool1d {
            width: config.pool_width,
            stride: config.pool_width,
        };
        let pooled_len = pool.out_len(k).ok_or_else(|| {
            NnError::Config(format!(
                "k = {k} is shorter than the pooling window {}",
                pool.width
            ))
        })?;
        if pooled_len < config.conv2_width {
            return Err(NnError::Config(format!(
                "pooled signal of length {pooled_len} (k = {k}) is shorter than the second conv kernel {}",
                config.conv2_width
            )));
        }
        let conv2_len = pooled_len - config.conv2_width + 1;

        let mut graph_convs = Vec::with_capacity(config.conv_layers);
        let mut c_in = feature_dim;
        for _ in 0..config.conv_layers {
            let layer = GraphConv::new(config.mode, config.r, c_in, config.channels, rng);
            c_in = layer.out_width();
            graph_convs.push(layer);
        }
        let total = config.total_channels();
        debug_assert_eq!(
            total,
            graph_convs.iter().map(GraphConv::out_width).sum::<usize>()
        );
        let conv1 = Conv1d::new(1, config.conv1_filters, total, total, rng);
        let conv2 = Conv1d::new(
            config.conv1_filters,
            config.conv2_filters,
            config.conv2_width,
            1,
            rng,
        );
        let hidden = Dense::new(config.conv2_filters * conv2_len, config.dense_width, rng);
        let output = Dense::new(config.dense_width, num_classes, rng);
        Ok(Self {
            config,
            feature_dim,
            num_classes,
            k,
            graph_convs,
            conv1,
            pool,
            conv2,
            hidden,
            output,
        })
    }

    /// Initializes from `config.seed`.
    pub fn seeded(
        config: ModelConfig,
        feature_dim: usize,
        num_classes: usize,
        k: usize,
    ) -> Result<Self, NnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::new(config, feature_dim, num_classes, k, &mut rng)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn graph_convs(&self) -> &[GraphConv<T>] {
        &self.graph_convs
    }

    pub fn params(&self) -> Vec<&Param<T>> {
        let mut out: Vec<&Param<T>> = self
            .graph_convs
            .iter()
            .flat_map(GraphConv::params)
            .collect();
        out.extend([
            &self.conv1.weight,
            &self.conv1.bias,
            &self.conv2.weight,
            &self.conv2.bias,
            &self.hidden.weight,
            &self.hidden.bias,
            &self.output.weight,
            &self.output.bias,
        ]);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut out: Vec<&mut Param<T>> = self
            .graph_convs
            .iter_mut()
            .flat_map(GraphConv::params_mut)
            .collect();
        out.extend([
            &mut self.conv1.weight,
            &mut self.conv1.bias,
            &mut self.conv2.weight,
            &mut self.conv2.bias,
            &mut self.hidden.weight,
            &mut self.hidden.bias,
            &mut self.output.weight,
            &mut self.output.bias,
        ]);
        out
    }

    /// Human-readable names in [`params`](Self::params) order.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (l, conv) in self.graph_convs.iter().enumerate() {
            for j in 0..conv.blocks() {
                names.push(format!("graph_conv[{l}].weight[{j}]"));
                names.push(format!("graph_conv[{l}].bias[{j}]"));
            }
        }
        for layer in ["conv1", "conv2", "dense_hidden", "dense_out"] {
            names.push(format!("{layer}.weight"));
            names.push(format!("{layer}.bias"));
        }
        names
    }

    pub fn param_values(&self) -> Vec<Matrix<T>> {
        self.params().into_iter().map(|p| p.value.clone()).collect()
    }

    /// Overwrites parameter values; moment buffers are untouched.
    pub fn set_param_values(&mut self, values: &[Matrix<T>]) -> Result<(), NnError> {
        let names = self.param_names();
        let mut params = self.params_mut();
        if params.len() != values.len() {
            return Err(NnError::Config(format!(
                "expected {} parameter tensors, got {}",
                params.len(),
                values.len()
            )));
        }
        for ((p, v), name) in params.iter_mut().zip(values).zip(&names) {
            if p.shape() != v.shape() {
                return Err(NnError::Config(format!(
                    "{name}: shape {:?} does not match {:?}",
                    v.shape(),
                    p.shape()
                )));
            }
            p.value = v.clone();
        }
        Ok(())
    }

    fn check_input(&self, x: &Matrix<T>, sp: &SpTensor<T>) -> Result<(), NnError> {
        if x.cols() != self.feature_dim {
            return Err(NnError::FeatureDim {
                expected: self.feature_dim,
                got: x.cols(),
            });
        }
        assert_eq!(
            sp.node_count(),
            x.rows(),
            "shortest-path tensor does not match graph size"
        );
        assert!(
            sp.max_distance() >= self.config.sp_range(),
            "shortest-path tensor covers distance {} but the model needs {}",
            sp.max_distance(),
            self.config.sp_range()
        );
        Ok(())
    }

    /// Output of every graph convolution layer, starting from `H^0 = x`.
    pub fn conv_representations(
        &self,
        x: &Matrix<T>,
        sp: &SpTensor<T>,
    ) -> Result<Vec<Matrix<T>>, NnError> {
        self.check_input(x, sp)?;
        let mut h = x.clone();
        let mut out = Vec::with_capacity(self.graph_convs.len());
        for conv in &self.graph_convs {
            h = conv.forward(sp, &h).0;
            out.push(h.clone());
        }
        Ok(out)
    }

    /// Class probabilities for one graph. Dropout is applied only when a
    /// random source is supplied (training mode).
    pub fn forward(
        &self,
        x: &Matrix<T>,
        sp: &SpTensor<T>,
        dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<Forward<T>, NnError> {
        self.check_input(x, sp)?;
        let mut conv_caches = Vec::with_capacity(self.graph_convs.len());
        let mut layer_outputs = Vec::with_capacity(self.graph_convs.len());
        let mut h = x.clone();
        for conv in &self.graph_convs {
            let (out, cache) = conv.forward(sp, &h);
            conv_caches.push(cache);
            layer_outputs.push(out.clone());
            h = out;
        }
        let concat = concat_layers(&layer_outputs);
        let total = concat.cols();

        let (pooled_nodes, record) = sortpool_forward(&concat, self.k);
        let signal = pooled_nodes.reshape(1, self.k * total);
        let conv1_pre = self.conv1.forward(&signal);
        let (pooled, pool_argmax) = self.pool.forward(&relu(&conv1_pre));
        let conv2_pre = self.conv2.forward(&pooled);
        let flat = relu(&conv2_pre).into_vec();
        let hidden_pre = self.hidden.forward(&flat);
        let dropout = match dropout_rng {
            Some(rng) if self.config.dropout > 0.0 => {
                Dropout::sample(hidden_pre.len(), self.config.dropout, rng)
            }
            _ => Dropout::identity(hidden_pre.len()),
        };
        let hidden_out: Vec<T> = hidden_pre
            .iter()
            .map(|&v| if v <= T::zero() { T::zero() } else { v })
            .collect();
        let dropped = dropout.apply(&hidden_out);
        let logits = self.output.forward(&dropped);
        let probs = softmax(&logits);
        Ok(Forward {
            logits,
            probs,
            trace: Trace {
                conv_caches,
                concat,
                record,
                signal,
                conv1_pre,
                pool_argmax,
                pooled,
                conv2_pre,
                flat,
                hidden_pre,
                dropout,
                dropped,
            },
        })
    }

    /// Gradients of a scalar loss given `∂loss/∂logits`. Returns parameter
    /// gradients in [`params`](Self::params) order and the input gradient.
    pub fn backward(
        &self,
        sp: &SpTensor<T>,
        trace: &Trace<T>,
        grad_logits: &[T],
    ) -> (Gradients<T>, Matrix<T>) {
        assert_eq!(grad_logits.len(), self.num_classes, "logit gradient length");
        let (g_dropped, out_grads) = self.output.backward(&trace.dropped, grad_logits);
        let g_hidden: Vec<T> = g_dropped
            .iter()
            .zip(&trace.dropout.scales)
            .zip(&trace.hidden_pre)
            .map(|((&g, &s), &h)| if h <= T::zero() { T::zero() } else { g * s })
            .collect();
        let (g_flat, hidden_grads) = self.hidden.backward(&trace.flat, &g_hidden);
        let g_conv2 = Matrix::from_vec(trace.conv2_pre.rows(), trace.conv2_pre.cols(), g_flat);
        let g_conv2 = relu_backward(&trace.conv2_pre, &g_conv2);
        let (g_pooled, conv2_grads) = self.conv2.backward(&trace.pooled, &g_conv2);
        let g_conv1 = self
            .pool
            .backward(trace.conv1_pre.cols(), &trace.pool_argmax, &g_pooled);
        let g_conv1 = relu_backward(&trace.conv1_pre, &g_conv1);
        let (g_signal, conv1_grads) = self.conv1.backward(&trace.signal, &g_conv1);
        let total = trace.concat.cols();
        let g_concat = sortpool_backward(&g_signal.reshape(self.k, total), &trace.record);

        let mut conv_grads: Vec<Vec<Matrix<T>>> = vec![Vec::new(); self.graph_convs.len()];
        let mut offsets = Vec::with_capacity(self.graph_convs.len());
        let mut acc = 0;
        for conv in &self.graph_convs {
            offsets.push(acc);
            acc += conv.out_width();
        }
        let mut g_input = Matrix::zeros(0, 0);
        let mut downstream: Option<Matrix<T>> = None;
        for l in (0..self.graph_convs.len()).rev() {
            let conv = &self.graph_convs[l];
            let mut g = g_concat.col_block(offsets[l], conv.out_width());
            if let Some(d) = downstream.take() {
                g.add_assign(&d);
            }
            let (g_in, grads) = conv.backward(sp, &trace.conv_caches[l], &g);
            conv_grads[l] = grads;
            if l == 0 {
                g_input = g_in;
            } else {
                downstream = Some(g_in);
            }
        }

        let mut all: Vec<Matrix<T>> = conv_grads.into_iter().flatten().collect();
        all.extend(conv1_grads);
        all.extend(conv2_grads);
        all.extend(hidden_grads);
        all.extend(out_grads);
        (Gradients(all), g_input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::nn::{ConvMode, SortPoolK};
    use crate::sp::compute_sp_tensor;

    fn small_config(mode: ConvMode) -> ModelConfig {
        ModelConfig {
            mode,
            r: 2,
            conv_layers: 3,
            channels: 4,
            sortpool_k: SortPoolK::Fixed(10),
            conv1_filters: 3,
            conv2_filters: 4,
            dense_width: 6,
            ..ModelConfig::default()
        }
    }

    fn ring(n: usize) -> Graph {
        let x = Matrix::from_fn(n, 3, |i, j| if i % 3 == j { 1.0 } else { 0.0 });
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)), x, 0)
    }

    #[test]
    fn output_is_probability_vector() {
        for mode in [ConvMode::Parametric, ConvMode::DgcnnBaseline] {
            let model = Model::<f64>::seeded(small_config(mode), 3, 3, 10).unwrap();
            for n in [1, 5, 14] {
                let g = ring(n);
                let sp = compute_sp_tensor(&g, 2);
                let f = model.forward(g.features(), &sp, None).unwrap();
                assert!(f.probs.iter().all(|&p| p >= 0.0));
                assert!((f.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_readout_gives_uniform() {
        let mut model = Model::<f64>::seeded(small_config(ConvMode::Parametric), 3, 4, 10).unwrap();
        for p in model.params_mut().into_iter().rev().take(8) {
            p.value = Matrix::zeros(p.shape().0, p.shape().1);
        }
        let g = ring(7);
        let sp = compute_sp_tensor(&g, 2);
        let f = model.forward(g.features(), &sp, None).unwrap();
        for p in f.probs {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn backward_leaves_params_and_matches_layout() {
        let model = Model::<f64>::seeded(small_config(ConvMode::Parametric), 3, 2, 10).unwrap();
        let before = model.clone();
        let g = ring(12);
        let sp = compute_sp_tensor(&g, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = model.forward(g.features(), &sp, Some(&mut rng)).unwrap();
        let (grads, g_in) = model.backward(&sp, &f.trace, &[0.3, -0.3]);
        assert_eq!(model, before);
        assert_eq!(g_in.shape(), (12, 3));
        let params = model.params();
        assert_eq!(grads.0.len(), params.len());
        assert_eq!(model.param_names().len(), params.len());
        for (g, p) in grads.0.iter().zip(params) {
            assert_eq!(g.shape(), p.shape());
        }
    }

    #[test]
    fn rejects_bad_inputs_and_shapes() {
        let model = Model::<f64>::seeded(small_config(ConvMode::Parametric), 3, 2, 10).unwrap();
        let g = Graph::unlabeled(4, [(0, 1)], 0);
        let sp = compute_sp_tensor(&g, 2);
        assert!(matches!(
            model.forward(g.features(), &sp, None),
            Err(NnError::FeatureDim {
                expected: 3,
                got: 0
            })
        ));
        // k = 9 pools to 4 < kernel 5
        assert!(matches!(
            Model::<f64>::seeded(small_config(ConvMode::Parametric), 3, 2, 9),
            Err(NnError::Config(_))
        ));
    }

    #[test]
    fn f32_model_runs() {
        let model = Model::<f32>::seeded(small_config(ConvMode::Parametric), 3, 2, 10).unwrap();
        let g = ring(6);
        let sp = compute_sp_tensor::<f32>(&g, 2);
        let f = model.forward(&g.features().cast(), &sp, None).unwrap();
        assert!((f.probs.iter().sum::<f32>() - 1.0).abs() < 1e-6);
    }
}

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PreparedDataset, TrainError};
use crate::graph::{ConfigError, Split};
use crate::matrix::Matrix;
use crate::nn::{softmax_cross_entropy, Adam, Gradients, Model, ModelConfig};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Train,
    Validation,
    Test,
}

/// Hook notified every time a graph is fed through the model.
pub trait FoldObserver {
    fn on_graph(&mut self, phase: Phase, epoch: usize, index: usize);
}

pub struct NoObserver;

impl FoldObserver for NoObserver {
    fn on_graph(&mut self, _: Phase, _: usize, _: usize) {}
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub repeat: usize,
    pub test_accuracy: f64,
    /// 1-based epoch whose parameters were kept; 0 means untrained.
    pub best_epoch: usize,
    pub k: usize,
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
    pub validation_accuracy: Vec<f64>,
    pub wall_time_seconds: f64,
}

/// Mean loss and accuracy over `indices`; predictions are the arg-max class
/// (lowest index on ties).
fn evaluate<T: Scalar>(
    model: &Model<T>,
    data: &PreparedDataset<T>,
    indices: &[usize],
    phase: Phase,
    epoch: usize,
    observer: &mut dyn FoldObserver,
) -> Result<(f64, f64), TrainError> {
    if indices.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for &i in indices {
        observer.on_graph(phase, epoch, i);
        let g = &data.graphs[i];
        let f = model.forward(&g.features, &g.sp, None)?;
        let (l, _) = softmax_cross_entropy(&f.logits, g.target);
        loss += l.as_f64();
        let pred = f
            .probs
            .iter()
            .enumerate()
            .fold(0, |best, (c, &p)| if p > f.probs[best] { c } else { best });
        if pred == g.target {
            correct += 1;
        }
    }
    let n = indices.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

pub fn train_one_fold<T: Scalar>(
    data: &PreparedDataset<T>,
    split: &Split,
    config: &ModelConfig,
    fold: usize,
    repeat: usize,
) -> Result<FoldReport, TrainError> {
    train_one_fold_observed(data, split, config, fold, repeat, &mut NoObserver)
}

/// Trains on `split.train` for `config.epochs` epochs, keeps the parameters
/// of the epoch with the best validation accuracy (earliest on ties) and
/// evaluates them once on `split.test`.
///
/// Randomness (initialization, shuffling, dropout) comes from one ChaCha
/// stream seeded with `config.seed` on stream `fold`, so identical inputs
/// give identical reports apart from wall time.
pub fn train_one_fold_observed<T: Scalar>(
    data: &PreparedDataset<T>,
    split: &Split,
    config: &ModelConfig,
    fold: usize,
    repeat: usize,
    observer: &mut dyn FoldObserver,
) -> Result<FoldReport, TrainError> {
    let start = Instant::now();
    config.validate().map_err(ConfigError::Invalid)?;
    if data.sp_range < config.sp_range() {
        return Err(ConfigError::Invalid(format!(
            "data prepared for distance {} but the model needs {}",
            data.sp_range,
            config.sp_range()
        ))
        .into());
    }
    let mut seen = vec![false; data.len()];
    for &i in split
        .train
        .iter()
        .chain(&split.validation)
        .chain(&split.test)
    {
        if i >= data.len() || std::mem::replace(&mut seen[i], true) {
            return Err(
                ConfigError::Invalid(format!("split index {i} out of range or repeated")).into(),
            );
        }
    }
    if split.train.is_empty() {
        return Err(ConfigError::Invalid("empty training block".into()).into());
    }
    let mut per_class = vec![0usize; data.num_classes];
    for &i in &split.train {
        per_class[data.graphs[i].target] += 1;
    }
    if let Some(c) = per_class.iter().position(|&n| n == 0) {
        return Err(
            ConfigError::Invalid(format!("class {c} is absent from the training block")).into(),
        );
    }

    let sizes: Vec<usize> = split
        .train
        .iter()
        .map(|&i| data.graphs[i].node_count())
        .collect();
    let k = config.sortpool_k.resolve(&sizes);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(fold as u64);
    let mut model = Model::<T>::new(
        config.clone(),
        data.feature_dim,
        data.num_classes,
        k,
        &mut rng,
    )?;
    let names = model.param_names();
    let mut adam = Adam::new(config.optimizer);

    let mut best_epoch = 0;
    let mut best_accuracy = f64::NEG_INFINITY;
    let mut best_params: Option<Vec<Matrix<T>>> = None;
    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut validation_loss = Vec::with_capacity(config.epochs);
    let mut validation_accuracy = Vec::with_capacity(config.epochs);
    let mut order = split.train.clone();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = Gradients::zeros_like(&model.params());
            for &i in batch {
                observer.on_graph(Phase::Train, epoch, i);
                let g = &data.graphs[i];
                let f = model.forward(&g.features, &g.sp, Some(&mut rng))?;
                let (loss, grad_logits) = softmax_cross_entropy(&f.logits, g.target);
                if !loss.is_finite() {
                    return Err(TrainError::NonFiniteLoss { epoch, graph: i });
                }
                epoch_loss += loss.as_f64();
                let (g_params, _) = model.backward(&g.sp, &f.trace, &grad_logits);
                grads.accumulate(&g_params);
            }
            grads.scale(T::one() / T::of(batch.len() as f64));
            adam.step(model.params_mut(), &names, &grads.0)?;
        }
        train_loss.push(epoch_loss / order.len() as f64);

        let (v_loss, v_acc) = evaluate(
            &model,
            data,
            &split.validation,
            Phase::Validation,
            epoch,
            observer,
        )?;
        validation_loss.push(v_loss);
        validation_accuracy.push(v_acc);
        // NaN accuracy (empty validation block) never wins, so the last
        // epoch is kept in that case
        if v_acc > best_accuracy || (split.validation.is_empty() && epoch == config.epochs) {
            best_accuracy = v_acc;
            best_epoch = epoch;
            best_params = Some(model.param_values());
        }
    }

    if let Some(p) = best_params {
        model.set_param_values(&p)?;
    }
    let (_, test_accuracy) = evaluate(
        &model,
        data,
        &split.test,
        Phase::Test,
        config.epochs + 1,
        observer,
    )?;

    Ok(FoldReport {
        fold,
        repeat,
        test_accuracy,
        best_epoch,
        k,
        train_loss,
        validation_loss,
        validation_accuracy,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

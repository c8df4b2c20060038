mod common;

use std::collections::HashMap;

use pgconv::graph::{encode_degree_features, stratified_folds, Dataset, Graph, Split};
use pgconv::nn::{AdamConfig, ModelConfig, SortPoolK};
use pgconv::train::{
    emit_report, mean_and_std, parse_folds_csv, run_experiment, run_experiment_with,
    train_one_fold, train_one_fold_observed, FoldObserver, Phase, PreparedDataset, TrainError,
};

/// Ten cycles (class 0) and ten paths (class 1) of 5..=14 nodes, with
/// one-hot degree features: the classes differ by their degree-1 endpoints.
fn cycles_and_paths() -> Dataset {
    let mut graphs = Vec::new();
    for n in 5..15 {
        graphs.push(Graph::unlabeled(n, (0..n).map(|i| (i, (i + 1) % n)), 0));
        graphs.push(Graph::unlabeled(n, (0..n - 1).map(|i| (i, i + 1)), 1));
    }
    encode_degree_features(&Dataset::new("TOY", graphs, 2).unwrap())
}

fn toy_config(epochs: usize) -> ModelConfig {
    ModelConfig {
        channels: 8,
        sortpool_k: SortPoolK::Fixed(14),
        dense_width: 32,
        epochs,
        batch_size: 4,
        optimizer: AdamConfig {
            step_size: 1e-3,
            ..AdamConfig::default()
        },
        seed: 3,
        ..ModelConfig::default()
    }
}

#[test]
fn separates_cycles_from_paths() {
    // four validation graphs saturate at 100% within a few epochs, and the
    // earliest such epoch wins, so selection is disabled here by folding the
    // validation block into training (the last epoch is kept)
    let ds = cycles_and_paths();
    let cfg = toy_config(50);
    let data = PreparedDataset::<f64>::new(&ds, cfg.sp_range());
    for (fold, split) in stratified_folds(&ds, 5, 1).unwrap().iter().enumerate() {
        let mut split = split.clone();
        split.train.append(&mut split.validation);
        let rep = train_one_fold(&data, &split, &cfg, fold, 0).unwrap();
        assert_eq!(rep.test_accuracy, 1.0, "fold {fold}: {rep:?}");
        assert_eq!(rep.best_epoch, 50);
    }
}

#[test]
fn best_epoch_is_earliest_validation_argmax() {
    let ds = cycles_and_paths();
    let cfg = toy_config(30);
    let data = PreparedDataset::<f64>::new(&ds, cfg.sp_range());
    for (fold, split) in stratified_folds(&ds, 5, 6).unwrap().iter().enumerate() {
        let rep = train_one_fold(&data, split, &cfg, fold, 0).unwrap();
        let acc = &rep.validation_accuracy;
        assert_eq!(acc.len(), 30);
        assert_eq!((rep.train_loss.len(), rep.validation_loss.len()), (30, 30));
        let best = acc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let first = acc.iter().position(|&a| a == best).unwrap() + 1;
        assert_eq!(rep.best_epoch, first);
    }
}

#[test]
fn untrained_model_is_at_chance() {
    // identical graphs with balanced labels: every prediction is the same
    // class, so exactly half of any balanced test block is right
    let g = |t| Graph::unlabeled(6, (0..5).map(|i| (i, i + 1)), t);
    let ds = encode_degree_features(
        &Dataset::new("SAME", (0..20).map(|i| g(i % 2)).collect(), 2).unwrap(),
    );
    let cfg = toy_config(0);
    let data = PreparedDataset::<f64>::new(&ds, cfg.sp_range());
    for split in stratified_folds(&ds, 5, 9).unwrap() {
        let rep = train_one_fold(&data, &split, &cfg, 0, 0).unwrap();
        assert_eq!(rep.test_accuracy, 0.5);
        assert_eq!(rep.best_epoch, 0);
        assert!(rep.train_loss.is_empty());
    }
}

#[test]
fn identical_inputs_give_identical_reports() {
    let ds = cycles_and_paths();
    let cfg = toy_config(8);
    let data = PreparedDataset::<f64>::new(&ds, cfg.sp_range());
    let split = &stratified_folds(&ds, 4, 2).unwrap()[1];
    let strip = |mut r: pgconv::train::FoldReport| {
        r.wall_time_seconds = 0.0;
        r
    };
    let a = strip(train_one_fold(&data, split, &cfg, 1, 0).unwrap());
    let b = strip(train_one_fold(&data, split, &cfg, 1, 0).unwrap());
    assert_eq!(a, b);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.train_loss), bits(&b.train_loss));
}

#[derive(Default)]
struct Counter {
    touches: HashMap<(Phase, usize), usize>,
    last_non_test_epoch: usize,
    first_test_epoch: Option<usize>,
}

impl FoldObserver for Counter {
    fn on_graph(&mut self, phase: Phase, epoch: usize, index: usize) {
        *self.touches.entry((phase, index)).or_default() += 1;
        match phase {
            Phase::Test => {
                self.first_test_epoch.get_or_insert(epoch);
            }
            _ => {
                assert!(
                    self.first_test_epoch.is_none(),
                    "training resumed after the test pass"
                );
                self.last_non_test_epoch = epoch;
            }
        }
    }
}

#[test]
fn test_block_is_touched_once_after_selection() {
    let ds = cycles_and_paths();
    let cfg = toy_config(6);
    let data = PreparedDataset::<f64>::new(&ds, cfg.sp_range());
    let split = &stratified_folds(&ds, 5, 4).unwrap()[2];
    let mut counter = Counter::default();
    train_one_fold_observed(&data, split, &cfg, 2, 0, &mut counter).unwrap();
    for &i in &split.test {
        assert_eq!(counter.touches.get(&(Phase::Test, i)), Some(&1));
        assert!(!counter.touches.contains_key(&(Phase::Train, i)));
        assert!(!counter.touches.contains_key(&(Phase::Validation, i)));
    }
    for &i in &split.train {
        assert_eq!(counter.touches.get(&(Phase::Train, i)), Some(&6));
    }
    for &i in &split.validation {
        assert_eq!(counter.touches.get(&(Phase::Validation, i)), Some(&6));
    }
    let test_touches: usize = counter
        .touches
        .iter()
        .filter(|((p, _), _)| *p == Phase::Test)
        .map(|(_, c)| c)
        .sum();
    assert_eq!(test_touches, split.test.len());
    assert!(counter.first_test_epoch.unwrap() > counter.last_non_test_epoch);
}

#[test]
fn workload_is_folds_times_repeats() {
    let ds = cycles_and_paths();
    for (folds, repeats) in [(2, 1), (3, 2), (4, 3)] {
        let mut calls = 0;
        let rep =
            run_experiment_with::<f64>(&ds, &toy_config(1), folds, repeats, &mut |_| calls += 1)
                .unwrap();
        assert_eq!(calls, folds * repeats);
        assert_eq!(rep.folds.len() + rep.failures.len(), folds * repeats);
        let mut seen: Vec<(usize, usize)> = rep.folds.iter().map(|f| (f.repeat, f.fold)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), folds * repeats);
    }
}

#[test]
fn repeats_reseed_partitions() {
    let ds = cycles_and_paths();
    let a = stratified_folds(&ds, 5, 3).unwrap();
    let b = stratified_folds(&ds, 5, 4).unwrap();
    assert_ne!(a, b);
}

#[test]
fn report_files_reproduce_the_aggregate() {
    let ds = cycles_and_paths();
    let rep = run_experiment::<f64>(&ds, &toy_config(3), 2, 1).unwrap();
    assert_eq!(rep.folds.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    emit_report(&rep, dir.path()).unwrap();
    let rows = parse_folds_csv(dir.path().join("folds.csv")).unwrap();
    assert_eq!(rows.len(), rep.folds.len());
    for (row, f) in rows.iter().zip(&rep.folds) {
        assert_eq!(
            (row.fold, row.repeat, row.best_epoch),
            (f.fold, f.repeat, f.best_epoch)
        );
        assert_eq!(row.accuracy.to_bits(), f.test_accuracy.to_bits());
        assert_eq!(row.seconds.to_bits(), f.wall_time_seconds.to_bits());
        assert_eq!(
            (row.dataset.as_str(), row.mode.as_str(), row.r),
            ("TOY", "parametric", 2)
        );
    }
    let (mean, std) = mean_and_std(&rows.iter().map(|r| r.accuracy).collect::<Vec<_>>());
    let (m, s) = rep.mean_and_std();
    assert!((mean - m).abs() <= 1e-12 && (std - s).abs() <= 1e-12);

    // deterministic given the report
    let again = tempfile::tempdir().unwrap();
    emit_report(&rep, again.path()).unwrap();
    for file in ["folds.csv", "summary.txt"] {
        assert_eq!(
            std::fs::read(dir.path().join(file)).unwrap(),
            std::fs::read(again.path().join(file)).unwrap()
        );
    }
}

#[test]
fn missing_class_in_training_is_a_config_error() {
    let ds = cycles_and_paths();
    let data = PreparedDataset::<f64>::new(&ds, 2);
    let class0: Vec<usize> = (0..20).filter(|i| i % 2 == 0).collect();
    let split = Split {
        train: class0[..6].to_vec(),
        validation: vec![1, 3],
        test: vec![5, 7],
    };
    let err = train_one_fold(&data, &split, &toy_config(2), 0, 0).unwrap_err();
    assert!(err.is_config(), "{err}");
}

#[test]
fn overlapping_split_is_a_config_error() {
    let ds = cycles_and_paths();
    let data = PreparedDataset::<f64>::new(&ds, 2);
    let split = Split {
        train: vec![0, 1, 2, 3],
        validation: vec![4],
        test: vec![4, 5],
    };
    assert!(train_one_fold(&data, &split, &toy_config(2), 0, 0)
        .unwrap_err()
        .is_config());
}

#[test]
fn non_finite_loss_aborts_the_fold_but_not_the_experiment() {
    let mut ds = cycles_and_paths();
    let g = &ds.graphs[0];
    let mut x = g.features().clone();
    x[(0, 0)] = f64::NAN;
    ds.graphs[0] = g.clone().with_features(x);

    let data = PreparedDataset::<f64>::new(&ds, 2);
    let split = Split {
        train: (0..12).collect(),
        validation: (12..16).collect(),
        test: (16..20).collect(),
    };
    let err = train_one_fold(&data, &split, &toy_config(2), 0, 0).unwrap_err();
    assert!(
        matches!(err, TrainError::NonFiniteLoss { epoch: 1, graph: 0 }),
        "{err}"
    );
    assert!(!err.is_config());

    // the poisoned graph trains in every fold except those holding it out
    let rep = run_experiment::<f64>(&ds, &toy_config(2), 5, 1).unwrap();
    assert_eq!(rep.folds.len() + rep.failures.len(), 5);
    assert!(!rep.failures.is_empty() && !rep.folds.is_empty());
}

#[test]
fn f32_training_runs() {
    let ds = cycles_and_paths();
    let rep = run_experiment::<f32>(&ds, &toy_config(3), 2, 1).unwrap();
    assert_eq!(rep.folds.len(), 2);
    assert!(rep
        .folds
        .iter()
        .all(|f| (0.0..=1.0).contains(&f.test_accuracy)));
}

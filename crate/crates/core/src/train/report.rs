use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ExperimentReport;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report has no successful folds")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One line of `folds.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldRow {
    pub dataset: String,
    pub mode: String,
    pub r: usize,
    pub fold: usize,
    pub repeat: usize,
    pub accuracy: f64,
    pub best_epoch: usize,
    pub seconds: f64,
}

/// Human-readable summary; accuracy is reported in percent as
/// `mean ± sample std`.
pub fn summary_text(report: &ExperimentReport) -> String {
    let (mean, std) = report.mean_and_std();
    let mut s = String::new();
    s += &format!("dataset: {}\n", report.dataset);
    s += &format!("mode: {}\n", report.config.mode.label());
    s += &format!("r: {}\n", report.config.r);
    s += &format!(
        "folds: {} ({} x {} repeats)\n",
        report.folds.len(),
        report.folds_per_repeat,
        report.repeats
    );
    s += &format!("failed folds: {}\n", report.failures.len());
    for f in &report.failures {
        s += &format!("  repeat {} fold {}: {}\n", f.repeat, f.fold, f.message);
    }
    s += &format!("accuracy: {:.2} ± {:.2}\n", 100.0 * mean, 100.0 * std);
    s
}

/// Writes `folds.csv` and `summary.txt` into `dir` (created if needed).
pub fn emit_report(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<(), ReportError> {
    if report.folds.is_empty() {
        return Err(ReportError::Empty);
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("folds.csv"))?;
    for f in &report.folds {
        w.serialize(FoldRow {
            dataset: report.dataset.clone(),
            mode: report.config.mode.label().to_string(),
            r: report.config.r,
            fold: f.fold,
            repeat: f.repeat,
            accuracy: f.test_accuracy,
            best_epoch: f.best_epoch,
            seconds: f.wall_time_seconds,
        })?;
    }
    w.flush()?;
    fs::write(dir.join("summary.txt"), summary_text(report))?;
    Ok(())
}

pub fn parse_folds_csv(path: impl AsRef<Path>) -> Result<Vec<FoldRow>, ReportError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ModelConfig;
    use crate::train::FoldReport;

    fn fold(fold: usize, acc: f64) -> FoldReport {
        FoldReport {
            fold,
            repeat: 0,
            test_accuracy: acc,
            best_epoch: 3,
            k: 10,
            train_loss: vec![],
            validation_loss: vec![],
            validation_accuracy: vec![],
            wall_time_seconds: 0.1,
        }
    }

    fn report(folds: Vec<FoldReport>) -> ExperimentReport {
        ExperimentReport {
            dataset: "TOY".into(),
            config: ModelConfig::default(),
            folds_per_repeat: 2,
            repeats: 1,
            folds,
            failures: vec![],
        }
    }

    #[test]
    fn writes_and_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let rep = report(vec![fold(0, 0.8), fold(1, 0.9)]);
        emit_report(&rep, dir.path()).unwrap();
        let rows = parse_folds_csv(dir.path().join("folds.csv")).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].accuracy, 0.9);
        assert_eq!(rows[0].mode, "parametric");
        let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        // sample std of {0.8, 0.9}
        assert!(summary.contains("85.00 ± 7.07"), "{summary}");
    }

    #[test]
    fn refuses_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_report(&report(vec![]), dir.path()),
            Err(ReportError::Empty)
        ));
    }
}

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::warn;
use pgconv::graph::{encode_degree_features, load_tu_dataset, reference_stats, Dataset};
use pgconv::nn::{ConvMode, ModelConfig, SortPoolK};
use pgconv::train::{
    emit_report, run_experiment_with, summary_text, FoldFailure, FoldReport, ReportError,
    TrainError,
};

#[derive(Parser)]
#[command(
    name = "pgconv",
    version,
    about = "Parametric graph convolution graph classifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Parametric,
    Dgcnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated nested cross-validation on a benchmark dataset.
    Train {
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, value_enum, default_value = "parametric")]
        mode: Mode,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        epochs: Option<usize>,
        /// SortPooling size, or `auto` for the 60% node-count rule.
        #[arg(long, default_value = "auto", value_parser = parse_k)]
        k: SortPoolK,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Floating-point type used for training.
        #[arg(long, value_enum, default_value = "f64")]
        precision: Precision,
    },
    /// Print summary statistics of a dataset.
    InspectDataset {
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
    /// Finite-difference check of every gradient.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_k(s: &str) -> Result<SortPoolK, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(SortPoolK::default());
    }
    match s.parse::<usize>() {
        Ok(k) if k > 0 => Ok(SortPoolK::Fixed(k)),
        _ => Err(format!("expected a positive integer or `auto`, got {s:?}")),
    }
}

enum Failure {
    Config(String),
    Data(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Data(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// Loads a benchmark; graphs without node labels get one-hot degrees.
fn load(data_dir: &PathBuf, name: &str) -> Result<Dataset, Failure> {
    let ds = load_tu_dataset(data_dir, name).map_err(|e| Failure::Data(e.to_string()))?;
    Ok(if ds.has_features() {
        ds
    } else {
        encode_degree_features(&ds)
    })
}

#[allow(clippy::too_many_arguments)]
fn train(
    dataset: &str,
    data_dir: &PathBuf,
    mode: Mode,
    r: usize,
    folds: usize,
    repeats: usize,
    epochs: Option<usize>,
    k: SortPoolK,
    seed: u64,
    out: &PathBuf,
    precision: Precision,
) -> Result<(), Failure> {
    let ds = load(data_dir, dataset)?;
    let defaults = ModelConfig::default();
    let config = ModelConfig {
        mode: match mode {
            Mode::Parametric => ConvMode::Parametric,
            Mode::Dgcnn => ConvMode::DgcnnBaseline,
        },
        r,
        sortpool_k: k,
        epochs: epochs.unwrap_or(defaults.epochs),
        seed,
        ..defaults
    };
    let start = Instant::now();
    let total = folds * repeats;
    let mut done = 0;
    let mut on_fold = |outcome: &Result<FoldReport, FoldFailure>| {
        done += 1;
        match outcome {
            Ok(f) => eprintln!(
                "[{done}/{total}] repeat {} fold {}: {:.4} (best epoch {}, {:.1}s)",
                f.repeat, f.fold, f.test_accuracy, f.best_epoch, f.wall_time_seconds
            ),
            Err(f) => eprintln!(
                "[{done}/{total}] repeat {} fold {} FAILED: {}",
                f.repeat, f.fold, f.message
            ),
        }
    };
    let report = match precision {
        Precision::F32 => run_experiment_with::<f32>(&ds, &config, folds, repeats, &mut on_fold)?,
        Precision::F64 => run_experiment_with::<f64>(&ds, &config, folds, repeats, &mut on_fold)?,
    };
    match emit_report(&report, out) {
        Ok(()) => {}
        Err(ReportError::Empty) => return Err(Failure::Numerical("every fold failed".into())),
        Err(e) => return Err(Failure::Data(format!("writing report: {e}"))),
    }
    print!("{}", summary_text(&report));
    println!("elapsed: {:.1}s", start.elapsed().as_secs_f64());
    if !report.failures.is_empty() {
        return Err(Failure::Numerical(format!(
            "{} folds failed",
            report.failures.len()
        )));
    }
    Ok(())
}

fn inspect(dataset: &str, data_dir: &PathBuf) -> Result<(), Failure> {
    let ds = load(data_dir, dataset)?;
    let s = ds.stats();
    println!("dataset:        {}", ds.name);
    println!("graphs:         {}", s.graphs);
    println!("classes:        {}", s.classes);
    println!("nodes (max):    {}", s.max_nodes);
    println!("nodes (avg):    {:.2} ± {:.2}", s.mean_nodes, s.std_nodes);
    println!("edges (avg):    {:.2}", s.mean_edges);
    println!("feature dim:    {}", s.feature_dim);
    match reference_stats(dataset) {
        Some(reference) => println!(
            "reference:      {} graphs, max {} nodes, avg {:.2} nodes -> {}",
            reference.graphs,
            reference.max_nodes,
            reference.mean_nodes,
            if reference.matches(&s) {
                "match"
            } else {
                "MISMATCH"
            }
        ),
        None => println!("reference:      none"),
    }
    Ok(())
}

fn gradcheck(seed: u64) -> Result<(), Failure> {
    let start = Instant::now();
    let checks = pgconv::gradcheck::run_suite(seed).map_err(Failure::Numerical)?;
    let mut failed = 0;
    for c in &checks {
        let status = if c.passed() { "ok  " } else { "FAIL" };
        if !c.passed() {
            failed += 1;
        }
        println!(
            "{status} {:.3e} < {:.0e}  {}",
            c.rel_error, c.tolerance, c.name
        );
    }
    println!(
        "{} checks, {failed} failed, {:.2}s",
        checks.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        return Err(Failure::Numerical(format!(
            "{failed} gradient checks failed"
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage mistakes are configuration errors; clap would exit with 2
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Train {
            dataset,
            data_dir,
            mode,
            r,
            folds,
            repeats,
            epochs,
            k,
            seed,
            out,
            precision,
        } => train(
            dataset, data_dir, *mode, *r, *folds, *repeats, *epochs, *k, *seed, out, *precision,
        ),
        Command::InspectDataset { dataset, data_dir } => inspect(dataset, data_dir),
        Command::Gradcheck { seed } => gradcheck(*seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            warn!("exiting with code {}", f.exit_code());
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

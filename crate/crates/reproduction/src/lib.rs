//! Acceptance criteria for the whole stack, run by `tests/acceptance.rs`.
//!
//! Every criterion prints exactly one `[PASS]` or `[FAIL]` line on stdout
//! (bypassing the test harness capture) and then asserts, so a failing
//! criterion also fails its test.

use std::io::Write;
use std::path::PathBuf;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use pgconv::graph::{load_tu_dataset, Dataset};

/// Names tried, in order, for each benchmark with published statistics.
pub const BENCHMARKS: &[&[&str]] = &[
    &["MUTAG"],
    &["PTC_MR", "PTC"],
    &["NCI1"],
    &["PROTEINS"],
    &["DD"],
    &["COLLAB"],
    &["IMDB-BINARY"],
    &["IMDB-MULTI"],
];

static SERIAL: Mutex<()> = Mutex::new(());

/// Held for the duration of every timed criterion so runtimes are not
/// inflated by other tests sharing the CPU.
pub fn exclusive() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Benchmark data root: `$PGC_DATA_DIR`, else the workspace `data/`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("PGC_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// First of `names` that loads from the data root.
pub fn load_any(names: &[&str]) -> Result<Dataset, String> {
    let root = data_dir();
    let mut errors = Vec::new();
    for name in names {
        match load_tu_dataset(&root, name) {
            Ok(ds) => return Ok(ds),
            Err(e) => errors.push(format!("{name}: {e}")),
        }
    }
    Err(errors.join("; "))
}

pub fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let start = Instant::now();
    let r = f();
    (r, start.elapsed())
}

/// Prints the verdict line, then fails the calling test if `pass` is false.
pub fn verdict(criterion: &str, pass: bool, detail: impl AsRef<str>) {
    let line = format!(
        "\n[{}] {criterion}: {}\n",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "{criterion}: {}", detail.as_ref());
}

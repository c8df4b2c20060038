#![allow(dead_code)]

use std::path::PathBuf;

use pgconv::graph::Graph;
use pgconv::sp::SpTensor;
use pgconv::Matrix;
use rand::Rng;

/// Benchmark data root: `$PGC_DATA_DIR`, else the workspace `data/`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("PGC_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// All-pairs hop distances; `None` for disconnected pairs.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
        for &k in g.neighbors(i) {
            row[k] = Some(1);
        }
    }
    for m in 0..n {
        for i in 0..n {
            let Some(im) = d[i][m] else { continue };
            for k in 0..n {
                if let Some(mk) = d[m][k] {
                    if d[i][k].map_or(true, |cur| im + mk < cur) {
                        d[i][k] = Some(im + mk);
                    }
                }
            }
        }
    }
    d
}

/// Compares every SP matrix and normalizer against the oracle; returns the
/// first disagreement.
pub fn check_against_oracle(g: &Graph, sp: &SpTensor<f64>) -> Result<(), String> {
    let d = floyd_warshall(g);
    let n = g.node_count();
    for j in 0..=sp.max_distance() {
        let mat = sp.mat(j);
        for i in 0..n {
            let mut count = 0;
            for k in 0..n {
                let expect = d[i][k] == Some(j);
                count += expect as usize;
                if mat.contains(i, k) != expect {
                    return Err(format!("SP^{j}[{i}][{k}]: oracle distance {:?}", d[i][k]));
                }
            }
            let inv = if count == 0 { 0.0 } else { 1.0 / count as f64 };
            if sp.inv_degrees(j)[i] != inv {
                return Err(format!("inverse degree {j}/{i}"));
            }
        }
    }
    Ok(())
}

pub fn erdos_renyi(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, k));
            }
        }
    }
    Graph::unlabeled(n, edges, 0)
}

pub fn with_random_features(rng: &mut impl Rng, g: Graph, d: usize) -> Graph {
    let x = Matrix::from_fn(g.node_count(), d, |_, _| rng.gen::<f64>());
    g.with_features(x)
}

/// Erdős–Rényi graph with `d` continuous features per node.
pub fn featured_graph(rng: &mut impl Rng, n: usize, p: f64, d: usize) -> Graph {
    let g = erdos_renyi(rng, n, p);
    with_random_features(rng, g, d)
}

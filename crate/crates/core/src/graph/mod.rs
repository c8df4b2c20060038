//! Graph data model and benchmark-dataset ingestion.

mod features;
mod folds;
mod reference;
mod tu;

use std::collections::BTreeSet;
use std::path::PathBuf;

use thiserror::Error;

use crate::matrix::Matrix;

pub use features::{encode_degree_features, one_hot};
pub use folds::{stratified_folds, Split};
pub use reference::{reference_stats, ReferenceStats};
pub use tu::{load_tu_dataset, write_tu_dataset};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing dataset file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("graph {0} has no nodes")]
    EmptyGraph(usize),
    #[error("inconsistent dataset: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("class {class} has {count} graphs, fewer than {folds} folds")]
    SmallClass {
        class: usize,
        count: usize,
        folds: usize,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// A single labeled, undirected, simple graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    node_count: usize,
    /// Sorted neighbor lists; symmetric and self-loop free.
    adjacency: Vec<Vec<usize>>,
    features: Matrix<f64>,
    target: usize,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Self-loops and duplicate
    /// edges are dropped. Panics if an endpoint is out of range or the
    /// feature matrix has the wrong number of rows.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Matrix<f64>,
        target: usize,
    ) -> Self {
        assert!(node_count > 0, "graph must have at least one node");
        assert_eq!(features.rows(), node_count, "feature rows != node count");
        let mut sets = vec![BTreeSet::new(); node_count];
        for (a, b) in edges {
            assert!(
                a < node_count && b < node_count,
                "edge ({a},{b}) out of range"
            );
            if a != b {
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        Self {
            node_count,
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            features,
            target,
        }
    }

    /// Graph with an empty (`n × 0`) feature matrix.
    pub fn unlabeled(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        target: usize,
    ) -> Self {
        Self::new(node_count, edges, Matrix::zeros(node_count, 0), target)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, nb) in self.adjacency.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn features(&self) -> &Matrix<f64> {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn with_features(mut self, features: Matrix<f64>) -> Self {
        assert_eq!(
            features.rows(),
            self.node_count,
            "feature rows != node count"
        );
        self.features = features;
        self
    }

    /// Dense adjacency matrix, derived on demand.
    pub fn adjacency_matrix(&self) -> Matrix<f64> {
        let mut a = Matrix::zeros(self.node_count, self.node_count);
        for (i, nb) in self.adjacency.iter().enumerate() {
            for &j in nb {
                a[(i, j)] = 1.0;
            }
        }
        a
    }

    /// Relabels nodes: old node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.node_count, "permutation length");
        let mut features = Matrix::zeros(self.node_count, self.feature_dim());
        for v in 0..self.node_count {
            features
                .row_mut(perm[v])
                .copy_from_slice(self.features.row(v));
        }
        let edges = self.edges().into_iter().map(|(a, b)| (perm[a], perm[b]));
        Self::new(self.node_count, edges, features, self.target)
    }
}

/// An ordered collection of graphs sharing feature dimension and class set.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub num_classes: usize,
    pub feature_dim: usize,
}

impl Dataset {
    /// Validates the shared-shape invariants.
    pub fn new(
        name: impl Into<String>,
        graphs: Vec<Graph>,
        num_classes: usize,
    ) -> Result<Self, DataError> {
        let feature_dim = graphs.first().map_or(0, Graph::feature_dim);
        for (i, g) in graphs.iter().enumerate() {
            if g.feature_dim() != feature_dim {
                return Err(DataError::Inconsistent(format!(
                    "graph {i} has feature dim {} instead of {feature_dim}",
                    g.feature_dim()
                )));
            }
            if g.target() >= num_classes {
                return Err(DataError::Inconsistent(format!(
                    "graph {i} has target {} outside 0..{num_classes}",
                    g.target()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            graphs,
            num_classes,
            feature_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn targets(&self) -> Vec<usize> {
        self.graphs.iter().map(Graph::target).collect()
    }

    pub fn has_features(&self) -> bool {
        self.feature_dim > 0
    }

    pub fn stats(&self) -> DatasetStats {
        let sizes: Vec<f64> = self.graphs.iter().map(|g| g.node_count() as f64).collect();
        let n = sizes.len().max(1) as f64;
        let mean = sizes.iter().sum::<f64>() / n;
        let var = sizes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        DatasetStats {
            graphs: self.graphs.len(),
            classes: self.num_classes,
            max_nodes: self.graphs.iter().map(Graph::node_count).max().unwrap_or(0),
            mean_nodes: mean,
            std_nodes: var.sqrt(),
            mean_edges: self
                .graphs
                .iter()
                .map(|g| g.edge_count() as f64)
                .sum::<f64>()
                / n,
            feature_dim: self.feature_dim,
        }
    }
}

/// Summary statistics in the shape of the benchmark summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetStats {
    pub graphs: usize,
    pub classes: usize,
    pub max_nodes: usize,
    pub mean_nodes: f64,
    pub std_nodes: f64,
    pub mean_edges: f64,
    pub feature_dim: usize,
}

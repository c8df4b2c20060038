use std::collections::BTreeSet;

use super::{Dataset, Graph};
use crate::matrix::Matrix;

/// One row per entry of `labels`, with a single 1 at the label's column.
pub fn one_hot(labels: &[usize], width: usize) -> Matrix<f64> {
    let mut m = Matrix::zeros(labels.len(), width);
    for (i, &l) in labels.iter().enumerate() {
        assert!(l < width, "label {l} outside one-hot width {width}");
        m[(i, l)] = 1.0;
    }
    m
}

/// Replaces node features with a one-hot encoding of node degree, over the
/// sorted set of degrees that occur anywhere in the dataset.
pub fn encode_degree_features(dataset: &Dataset) -> Dataset {
    let degrees: BTreeSet<usize> = dataset
        .graphs
        .iter()
        .flat_map(|g| (0..g.node_count()).map(move |v| g.degree(v)))
        .collect();
    let index: Vec<usize> = degrees.iter().copied().collect();
    let width = index.len();
    let graphs: Vec<Graph> = dataset
        .graphs
        .iter()
        .map(|g| {
            let labels: Vec<usize> = (0..g.node_count())
                .map(|v| index.binary_search(&g.degree(v)).expect("degree indexed"))
                .collect();
            g.clone().with_features(one_hot(&labels, width))
        })
        .collect();
    Dataset {
        name: dataset.name.clone(),
        graphs,
        num_classes: dataset.num_classes,
        feature_dim: width,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_degrees() {
        let g = Graph::unlabeled(3, [(0, 1), (1, 2)], 0);
        let ds = encode_degree_features(&Dataset::new("p", vec![g], 1).unwrap());
        assert_eq!(ds.feature_dim, 2);
        let x = ds.graphs[0].features();
        assert_eq!(x.row(0), &[1.0, 0.0]);
        assert_eq!(x.row(1), &[0.0, 1.0]);
        assert_eq!(x.row(2), &[1.0, 0.0]);
    }

    #[test]
    fn isolated_node_gets_single_column() {
        let g = Graph::unlabeled(1, [], 0);
        let ds = encode_degree_features(&Dataset::new("i", vec![g], 1).unwrap());
        assert_eq!(ds.feature_dim, 1);
        assert_eq!(ds.graphs[0].features().row(0), &[1.0]);
    }

    #[test]
    fn alphabet_spans_whole_dataset() {
        let a = Graph::unlabeled(2, [(0, 1)], 0);
        let b = Graph::unlabeled(4, [(0, 1), (0, 2), (0, 3)], 1);
        let ds = encode_degree_features(&Dataset::new("s", vec![a, b], 2).unwrap());
        // degrees {1, 3}
        assert_eq!(ds.feature_dim, 2);
        assert_eq!(ds.graphs[0].features().row(0), &[1.0, 0.0]);
        assert_eq!(ds.graphs[1].features().row(0), &[0.0, 1.0]);
        for g in &ds.graphs {
            for v in 0..g.node_count() {
                assert_eq!(g.features().row(v).iter().sum::<f64>(), 1.0);
            }
        }
    }
}

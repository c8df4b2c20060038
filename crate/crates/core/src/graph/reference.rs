//! Published summary statistics of the standard graph-classification
//! benchmarks, used to sanity-check downloaded copies.

use super::DatasetStats;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceStats {
    pub name: &'static str,
    pub graphs: usize,
    pub max_nodes: usize,
    /// Rounded to two decimals.
    pub mean_nodes: f64,
}

const TABLE: [(&[&str], ReferenceStats); 8] = [
    (
        &["MUTAG"],
        ReferenceStats {
            name: "MUTAG",
            graphs: 188,
            max_nodes: 28,
            mean_nodes: 17.93,
        },
    ),
    (
        &["PTC", "PTC_MR"],
        ReferenceStats {
            name: "PTC",
            graphs: 344,
            max_nodes: 109,
            mean_nodes: 25.56,
        },
    ),
    (
        &["NCI1"],
        ReferenceStats {
            name: "NCI1",
            graphs: 4110,
            max_nodes: 111,
            mean_nodes: 29.87,
        },
    ),
    (
        &["PROTEINS"],
        ReferenceStats {
            name: "PROTEINS",
            graphs: 1113,
            max_nodes: 620,
            mean_nodes: 39.06,
        },
    ),
    (
        &["DD", "D&D"],
        ReferenceStats {
            name: "D&D",
            graphs: 1178,
            max_nodes: 5748,
            mean_nodes: 284.32,
        },
    ),
    (
        &["COLLAB"],
        ReferenceStats {
            name: "COLLAB",
            graphs: 5000,
            max_nodes: 492,
            mean_nodes: 74.49,
        },
    ),
    (
        &["IMDB-BINARY", "IMDB-B"],
        ReferenceStats {
            name: "IMDB-B",
            graphs: 1000,
            max_nodes: 136,
            mean_nodes: 19.77,
        },
    ),
    (
        &["IMDB-MULTI", "IMDB-M"],
        ReferenceStats {
            name: "IMDB-M",
            graphs: 1500,
            max_nodes: 89,
            mean_nodes: 13.00,
        },
    ),
];

/// Reference statistics for a benchmark, matched case-insensitively on its
/// usual directory names.
pub fn reference_stats(name: &str) -> Option<ReferenceStats> {
    TABLE
        .iter()
        .find(|(aliases, _)| aliases.iter().any(|a| a.eq_ignore_ascii_case(name)))
        .map(|(_, s)| *s)
}

impl ReferenceStats {
    /// Graph and max-node counts must agree exactly; the mean within 0.01.
    pub fn matches(&self, stats: &DatasetStats) -> bool {
        stats.graphs == self.graphs
            && stats.max_nodes == self.max_nodes
            && (stats.mean_nodes - self.mean_nodes).abs() <= 0.01
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases() {
        assert_eq!(reference_stats("ptc_mr").unwrap().graphs, 344);
        assert_eq!(reference_stats("IMDB-BINARY").unwrap().max_nodes, 136);
        assert!(reference_stats("CORA").is_none());
    }
}

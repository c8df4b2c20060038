//! Reader and writer for the public graph-benchmark text format
//! (`<name>_A.txt`, `<name>_graph_indicator.txt`, `<name>_graph_labels.txt`,
//! optional `<name>_node_labels.txt`). Files are 1-indexed; everything in
//! memory is 0-indexed.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::debug;

use super::{features::one_hot, DataError, Dataset, Graph};
use crate::matrix::Matrix;

fn file_path(root: &Path, name: &str, suffix: &str) -> PathBuf {
    root.join(format!("{name}_{suffix}.txt"))
}

fn read_required(path: &Path) -> Result<String, DataError> {
    if !path.is_file() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    Ok(fs::read_to_string(path)?)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> DataError {
    DataError::Parse {
        file: path.file_name().map_or_else(
            || path.display().to_string(),
            |f| f.to_string_lossy().into_owned(),
        ),
        line,
        msg: msg.into(),
    }
}

/// Parses every non-blank line into its comma-separated integer tokens,
/// keeping 1-based line numbers.
fn parse_int_lines(path: &Path, text: &str) -> Result<Vec<(usize, Vec<i64>)>, DataError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut vals = Vec::with_capacity(2);
        for tok in line.split(',') {
            let tok = tok.trim();
            let v = tok
                .parse::<i64>()
                .map_err(|_| parse_err(path, idx + 1, format!("not an integer: {tok:?}")))?;
            vals.push(v);
        }
        out.push((idx + 1, vals));
    }
    Ok(out)
}

fn single_column(path: &Path, text: &str) -> Result<Vec<(usize, i64)>, DataError> {
    parse_int_lines(path, text)?
        .into_iter()
        .map(|(line, vals)| match vals.as_slice() {
            [v] => Ok((line, *v)),
            // node label files occasionally carry extra columns; the first is the label
            [v, ..] => Ok((line, *v)),
            [] => Err(parse_err(path, line, "empty line")),
        })
        .collect()
}

/// Loads a dataset in the benchmark text format from `root`.
///
/// Edge labels and attributes are ignored. Graph classes are remapped to
/// `0..C` in sorted order of the original labels; node labels, when present,
/// are one-hot encoded over the sorted distinct labels of the whole dataset.
/// Without a node-label file every graph gets an `n × 0` feature matrix (see
/// [`super::encode_degree_features`]).
///
/// The files may also sit in a `root/<name>/` subdirectory, the layout of
/// the public download archives.
pub fn load_tu_dataset(root: impl AsRef<Path>, name: &str) -> Result<Dataset, DataError> {
    let nested = root.as_ref().join(name);
    let root = if !file_path(root.as_ref(), name, "graph_indicator").exists()
        && file_path(&nested, name, "graph_indicator").exists()
    {
        nested.as_path()
    } else {
        root.as_ref()
    };
    let a_path = file_path(root, name, "A");
    let ind_path = file_path(root, name, "graph_indicator");
    let lab_path = file_path(root, name, "graph_labels");
    let node_lab_path = file_path(root, name, "node_labels");

    let ind_text = read_required(&ind_path)?;
    let lab_text = read_required(&lab_path)?;
    let a_text = read_required(&a_path)?;

    let labels = single_column(&lab_path, &lab_text)?;
    let num_graphs = labels.len();
    let class_map: BTreeMap<i64, usize> = labels
        .iter()
        .map(|&(_, l)| l)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();

    // node -> (graph, local index)
    let indicator = single_column(&ind_path, &ind_text)?;
    let mut node_graph = Vec::with_capacity(indicator.len());
    let mut sizes = vec![0usize; num_graphs];
    for &(line, gid) in &indicator {
        if gid < 1 || gid as usize > num_graphs {
            return Err(parse_err(
                &ind_path,
                line,
                format!("graph id {gid} outside 1..={num_graphs}"),
            ));
        }
        let g = gid as usize - 1;
        node_graph.push((g, sizes[g]));
        sizes[g] += 1;
    }
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(DataError::EmptyGraph(g));
    }
    let total_nodes = node_graph.len();

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    let mut self_loops = 0usize;
    for (line, vals) in parse_int_lines(&a_path, &a_text)? {
        let [a, b] = vals[..] else {
            return Err(parse_err(&a_path, line, "expected two node ids"));
        };
        let in_range = |v: i64| v >= 1 && v as usize <= total_nodes;
        if !in_range(a) || !in_range(b) {
            return Err(parse_err(
                &a_path,
                line,
                format!("node id out of range 1..={total_nodes}"),
            ));
        }
        let (ga, la) = node_graph[a as usize - 1];
        let (gb, lb) = node_graph[b as usize - 1];
        if ga != gb {
            return Err(parse_err(&a_path, line, "edge joins two different graphs"));
        }
        if la == lb {
            self_loops += 1;
            continue;
        }
        edges[ga].push((la, lb));
    }

    let node_labels = if node_lab_path.is_file() {
        let text = fs::read_to_string(&node_lab_path)?;
        let labels = single_column(&node_lab_path, &text)?;
        if labels.len() != total_nodes {
            return Err(DataError::Inconsistent(format!(
                "{} node labels for {total_nodes} nodes",
                labels.len()
            )));
        }
        Some(labels.into_iter().map(|(_, l)| l).collect::<Vec<_>>())
    } else {
        None
    };

    let label_index: Option<BTreeMap<i64, usize>> = node_labels.as_ref().map(|ls| {
        let distinct: std::collections::BTreeSet<i64> = ls.iter().copied().collect();
        distinct
            .into_iter()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect()
    });

    let mut per_graph_labels: Vec<Vec<usize>> =
        sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    if let (Some(ls), Some(index)) = (&node_labels, &label_index) {
        for (node, &l) in ls.iter().enumerate() {
            per_graph_labels[node_graph[node].0].push(index[&l]);
        }
    }

    let mut duplicates = 0usize;
    let mut graphs = Vec::with_capacity(num_graphs);
    for (g, edge_list) in edges.into_iter().enumerate() {
        let directed = edge_list.len();
        let mut uniq = edge_list;
        uniq.sort_unstable();
        uniq.dedup();
        duplicates += directed - uniq.len();
        let features = match &label_index {
            Some(index) => one_hot(&per_graph_labels[g], index.len()),
            None => Matrix::zeros(sizes[g], 0),
        };
        let target = class_map[&labels[g].1];
        graphs.push(Graph::new(sizes[g], uniq, features, target));
    }
    if self_loops + duplicates > 0 {
        debug!("{name}: dropped {self_loops} self-loops and {duplicates} duplicate edges");
    }

    Dataset::new(name, graphs, class_map.len())
}

/// Writes `dataset` in the benchmark text format. Edges are written in both
/// directions; node labels are the index of the hot entry in each feature
/// row and are omitted for featureless datasets.
pub fn write_tu_dataset(
    dataset: &Dataset,
    root: impl AsRef<Path>,
    name: &str,
) -> Result<(), DataError> {
    let root = root.as_ref();
    fs::create_dir_all(root)?;
    let mut a = BufWriter::new(fs::File::create(file_path(root, name, "A"))?);
    let mut ind = BufWriter::new(fs::File::create(file_path(root, name, "graph_indicator"))?);
    let mut lab = BufWriter::new(fs::File::create(file_path(root, name, "graph_labels"))?);
    let mut node_lab = if dataset.has_features() {
        Some(BufWriter::new(fs::File::create(file_path(
            root,
            name,
            "node_labels",
        ))?))
    } else {
        None
    };

    let mut offset = 1usize;
    for (gi, g) in dataset.graphs.iter().enumerate() {
        writeln!(lab, "{}", g.target())?;
        for v in 0..g.node_count() {
            writeln!(ind, "{}", gi + 1)?;
            for &u in g.neighbors(v) {
                writeln!(a, "{}, {}", offset + v, offset + u)?;
            }
            if let Some(w) = node_lab.as_mut() {
                let row = g.features().row(v);
                let hot = row.iter().position(|&x| x == 1.0).ok_or_else(|| {
                    DataError::Inconsistent(format!("graph {gi} node {v} is not one-hot"))
                })?;
                writeln!(w, "{hot}")?;
            }
        }
        offset += g.node_count();
    }
    a.flush()?;
    ind.flush()?;
    lab.flush()?;
    if let Some(mut w) = node_lab {
        w.flush()?;
    }
    Ok(())
}

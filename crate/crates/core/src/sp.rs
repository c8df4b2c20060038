//! Shortest-path indicator matrices and the propagation operators built on
//! them.
//!
//! `SP^j` has a 1 at `(i, k)` iff the shortest-path distance between `i` and
//! `k` is exactly `j`. `SP^0` is the identity and `SP^1` the adjacency
//! matrix. Each is row-normalized by its own row sums, with the convention
//! that an empty row has inverse degree 0.

use std::collections::VecDeque;

use crate::graph::Graph;
use crate::matrix::{axpy, Matrix};
use crate::scalar::Scalar;

/// Square binary matrix stored as sorted column lists per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePattern {
    offsets: Vec<usize>,
    cols: Vec<usize>,
}

impl SparsePattern {
    fn from_rows(rows: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let mut cols = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for mut r in rows {
            r.sort_unstable();
            cols.extend_from_slice(&r);
            offsets.push(cols.len());
        }
        Self { offsets, cols }
    }

    pub fn size(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        &self.cols[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn contains(&self, i: usize, k: usize) -> bool {
        self.row(i).binary_search(&k).is_ok()
    }

    pub fn to_dense<T: Scalar>(&self) -> Matrix<T> {
        let n = self.size();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for &k in self.row(i) {
                m[(i, k)] = T::one();
            }
        }
        m
    }
}

/// The family `SP^0 … SP^r` for one graph with per-distance inverse row sums.
#[derive(Clone, Debug, PartialEq)]
pub struct SpTensor<T> {
    max_distance: usize,
    mats: Vec<SparsePattern>,
    inv_degrees: Vec<Vec<T>>,
    /// `1 / (1 + deg)`: the joint normalizer of `SP^0 + SP^1`.
    inv_joint: Vec<T>,
}

/// Depth-limited BFS from every node.
pub fn compute_sp_tensor<T: Scalar>(graph: &Graph, r: usize) -> SpTensor<T> {
    let n = graph.node_count();
    let mut rows: Vec<Vec<Vec<usize>>> = (0..=r).map(|_| vec![Vec::new(); n]).collect();
    let mut dist = vec![usize::MAX; n];
    let mut touched = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        dist[s] = 0;
        touched.push(s);
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            rows[d][s].push(v);
            if d == r {
                continue;
            }
            for &u in graph.neighbors(v) {
                if dist[u] == usize::MAX {
                    dist[u] = d + 1;
                    touched.push(u);
                    queue.push_back(u);
                }
            }
        }
        for v in touched.drain(..) {
            dist[v] = usize::MAX;
        }
    }

    let inv = |len: usize| {
        if len == 0 {
            T::zero()
        } else {
            T::one() / T::of(len as f64)
        }
    };
    let inv_degrees = rows
        .iter()
        .map(|per_node| per_node.iter().map(|row| inv(row.len())).collect())
        .collect();
    let inv_joint = (0..n).map(|v| inv(1 + graph.degree(v))).collect();
    SpTensor {
        max_distance: r,
        mats: rows.into_iter().map(SparsePattern::from_rows).collect(),
        inv_degrees,
        inv_joint,
    }
}

impl<T: Scalar> SpTensor<T> {
    /// The largest distance `r` covered.
    pub fn max_distance(&self) -> usize {
        self.max_distance
    }

    pub fn node_count(&self) -> usize {
        self.mats[0].size()
    }

    pub fn mat(&self, j: usize) -> &SparsePattern {
        &self.mats[j]
    }

    pub fn inv_degrees(&self, j: usize) -> &[T] {
        &self.inv_degrees[j]
    }

    fn check(&self, j: usize, h: &Matrix<T>) {
        assert!(
            j <= self.max_distance,
            "distance {j} exceeds tensor range 0..={}",
            self.max_distance
        );
        assert_eq!(h.rows(), self.node_count(), "row count != node count");
    }

    /// `(D̂^j)⁻¹ SP^j h`: row `i` is the mean of `h` over nodes at distance
    /// exactly `j` from `i`, or zero if there are none.
    pub fn propagate(&self, j: usize, h: &Matrix<T>) -> Matrix<T> {
        self.check(j, h);
        let mut out = Matrix::zeros(h.rows(), h.cols());
        let inv = &self.inv_degrees[j];
        for i in 0..h.rows() {
            let dst = out.row_mut(i);
            for &k in self.mats[j].row(i) {
                axpy(dst, T::one(), h.row(k));
            }
            for x in dst.iter_mut() {
                *x *= inv[i];
            }
        }
        out
    }

    /// Adjoint of [`propagate`](Self::propagate): `SP^j (D̂^j)⁻¹ g`, using
    /// the symmetry of `SP^j`.
    pub fn propagate_transpose(&self, j: usize, g: &Matrix<T>) -> Matrix<T> {
        self.check(j, g);
        let mut out = Matrix::zeros(g.rows(), g.cols());
        let inv = &self.inv_degrees[j];
        for k in 0..g.rows() {
            let dst = out.row_mut(k);
            for &i in self.mats[j].row(k) {
                axpy(dst, inv[i], g.row(i));
            }
        }
        out
    }

    /// `D̃⁻¹ (SP^0 + SP^1) h`: mean over the node itself and its neighbors.
    pub fn propagate_joint(&self, h: &Matrix<T>) -> Matrix<T> {
        self.check(1, h);
        let mut out = Matrix::zeros(h.rows(), h.cols());
        for i in 0..h.rows() {
            let dst = out.row_mut(i);
            dst.copy_from_slice(h.row(i));
            for &k in self.mats[1].row(i) {
                axpy(dst, T::one(), h.row(k));
            }
            for x in dst.iter_mut() {
                *x *= self.inv_joint[i];
            }
        }
        out
    }

    /// Adjoint of [`propagate_joint`](Self::propagate_joint).
    pub fn propagate_joint_transpose(&self, g: &Matrix<T>) -> Matrix<T> {
        self.check(1, g);
        let mut out = Matrix::zeros(g.rows(), g.cols());
        for k in 0..g.rows() {
            let dst = out.row_mut(k);
            axpy(dst, self.inv_joint[k], g.row(k));
            for &i in self.mats[1].row(k) {
                axpy(dst, self.inv_joint[i], g.row(i));
            }
        }
        out
    }
}

//! SortPooling: orders node rows canonically and unifies their count to `k`.

use std::cmp::Ordering;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Which input row landed in each output row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortPoolRecord {
    input_rows: usize,
    cols: usize,
    /// `None` marks a zero padding row.
    sources: Vec<Option<usize>>,
}

impl SortPoolRecord {
    pub fn sources(&self) -> &[Option<usize>] {
        &self.sources
    }
}

/// Descending lexicographic order starting from the last column; exact ties
/// fall back to ascending node index.
fn compare_rows<T: Scalar>(h: &Matrix<T>, a: usize, b: usize) -> Ordering {
    let (ra, rb) = (h.row(a), h.row(b));
    for c in (0..ra.len()).rev() {
        match rb[c].partial_cmp(&ra[c]) {
            Some(Ordering::Equal) | None => continue,
            Some(ord) => return ord,
        }
    }
    a.cmp(&b)
}

/// Sorts rows, keeps the first `k` and zero-pads when the graph is smaller.
pub fn sortpool_forward<T: Scalar>(h: &Matrix<T>, k: usize) -> (Matrix<T>, SortPoolRecord) {
    assert!(k >= 1, "sortpool k must be positive");
    let (n, c) = h.shape();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| compare_rows(h, a, b));
    let mut out = Matrix::zeros(k, c);
    let mut sources = vec![None; k];
    for (dst, &src) in order.iter().take(k).enumerate() {
        out.row_mut(dst).copy_from_slice(h.row(src));
        sources[dst] = Some(src);
    }
    (
        out,
        SortPoolRecord {
            input_rows: n,
            cols: c,
            sources,
        },
    )
}

/// Routes each output-row gradient back to its source node. Truncated nodes
/// and padding rows contribute nothing.
pub fn sortpool_backward<T: Scalar>(grad_out: &Matrix<T>, record: &SortPoolRecord) -> Matrix<T> {
    assert_eq!(
        grad_out.shape(),
        (record.sources.len(), record.cols),
        "gradient shape does not match the sortpool record"
    );
    let mut grad = Matrix::zeros(record.input_rows, record.cols);
    for (i, src) in record.sources.iter().enumerate() {
        if let Some(s) = *src {
            grad.row_mut(s).copy_from_slice(grad_out.row(i));
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_and_truncates() {
        let h = Matrix::from_rows(&[[1.0], [3.0], [2.0]]);
        let (out, rec) = sortpool_forward(&h, 2);
        assert_eq!(out, Matrix::from_rows(&[[3.0], [2.0]]));
        assert_eq!(rec.sources(), &[Some(1), Some(2)]);
        let g = sortpool_backward(&Matrix::from_rows(&[[10.0], [20.0]]), &rec);
        assert_eq!(g, Matrix::from_rows(&[[0.0], [10.0], [20.0]]));
    }

    #[test]
    fn pads_small_graphs() {
        let h = Matrix::from_rows(&[[5.0, 6.0]]);
        let (out, rec) = sortpool_forward(&h, 3);
        assert_eq!(
            out,
            Matrix::from_rows(&[[5.0, 6.0], [0.0, 0.0], [0.0, 0.0]])
        );
        assert_eq!(rec.sources(), &[Some(0), None, None]);
        let g = sortpool_backward(
            &Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]),
            &rec,
        );
        assert_eq!(g, Matrix::from_rows(&[[1.0, 2.0]]));
    }

    #[test]
    fn last_column_first_then_earlier_columns() {
        let h = Matrix::from_rows(&[[0.0, 1.0], [2.0, 1.0], [9.0, 0.5]]);
        let (out, _) = sortpool_forward(&h, 3);
        assert_eq!(
            out,
            Matrix::from_rows(&[[2.0, 1.0], [0.0, 1.0], [9.0, 0.5]])
        );
    }

    #[test]
    fn identical_rows_any_order() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [0.0, 3.0]]);
        let b = Matrix::from_rows(&[[0.0, 3.0], [1.0, 2.0], [1.0, 2.0]]);
        assert_eq!(sortpool_forward(&a, 2).0, sortpool_forward(&b, 2).0);
    }

    #[test]
    fn full_k_backward_is_permutation() {
        let h = Matrix::from_rows(&[[0.3], [0.1], [0.2]]);
        let (_, rec) = sortpool_forward(&h, 3);
        let g = Matrix::from_rows(&[[1.0], [2.0], [3.0]]);
        let back = sortpool_backward(&g, &rec);
        let mut got: Vec<f64> = back.as_slice().to_vec();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![1.0, 2.0, 3.0]);
        assert_eq!(back, Matrix::from_rows(&[[1.0], [3.0], [2.0]]));
    }

    #[test]
    #[should_panic(expected = "does not match")]
    fn stale_record_panics() {
        let (_, rec) = sortpool_forward(&Matrix::from_rows(&[[1.0]]), 2);
        sortpool_backward(&Matrix::<f64>::zeros(3, 1), &rec);
    }
}

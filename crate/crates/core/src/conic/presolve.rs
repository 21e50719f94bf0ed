//! Removal of linearly dependent equality rows.

use super::cones::dot;
use super::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub(super) struct RowReduction {
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// False when a dropped row contradicts the rows it depends on.
    pub consistent: bool,
}

/// Greedy rank-revealing pass over the rows of `a` by modified Gram–Schmidt
/// (with one re-orthogonalization). The right-hand side is carried along so
/// that dependent rows can be checked for consistency.
pub(super) fn reduce_rows(a: &CsrMatrix, b: &[f64], rank_tol: f64) -> RowReduction {
    let n = a.ncols();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut basis_rhs: Vec<f64> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut consistent = true;

    for i in 0..a.nrows() {
        let mut row = vec![0.0; n];
        for (j, v) in a.row(i) {
            row[j] = v;
        }
        let row_norm = dot(&row, &row).sqrt();
        let mut rhs = b[i];
        if row_norm == 0.0 {
            if rhs.abs() > rank_tol.sqrt() * (1.0 + b[i].abs()) {
                consistent = false;
            }
            dropped.push(i);
            continue;
        }
        for _ in 0..2 {
            for (q, &qb) in basis.iter().zip(&basis_rhs) {
                let c = dot(q, &row);
                if c != 0.0 {
                    for (r, qv) in row.iter_mut().zip(q) {
                        *r -= c * qv;
                    }
                    rhs -= c * qb;
                }
            }
        }
        let res = dot(&row, &row).sqrt();
        if res <= rank_tol * row_norm {
            if rhs.abs() > rank_tol.sqrt() * (1.0 + b[i].abs()) {
                consistent = false;
            }
            dropped.push(i);
        } else {
            row.iter_mut().for_each(|v| *v /= res);
            basis.push(row);
            basis_rhs.push(rhs / res);
            kept.push(i);
        }
    }
    RowReduction {
        kept,
        dropped,
        consistent,
    }
}

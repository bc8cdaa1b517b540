//! Small named instances used across tests, examples and the CLI corpus.

use crate::matrix::{Matrix, Symbol};

/// A `2w x 2w` linear matrix whose hypergraph is a single rainbow `2w`-cycle.
///
/// Row `i` gives columns `i` and `i + 1 (mod 2w)` the shared symbol 0; every
/// other entry of the row is a distinct nonzero symbol, so `q = 2w - 1`.
pub fn cycle_pattern(w: usize) -> Matrix {
    assert!(w >= 2, "cycle pattern needs w >= 2");
    let k = 2 * w;
    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        let shared = [i, (i + 1) % k];
        let mut next: Symbol = 1;
        let row = (0..k)
            .map(|j| {
                if shared.contains(&j) {
                    0
                } else {
                    next += 1;
                    next - 1
                }
            })
            .collect();
        rows.push(row);
    }
    Matrix::from_rows(k as u32 - 1, &rows).expect("valid pattern")
}

/// The four-column rainbow 4-cycle instance: columns `A1..A4` with
/// `v1` shared by `A1, A2` in row 0, `v2` by `A2, A3` in row 1,
/// `v3` by `A3, A4` in row 2 and `v4` by `A4, A1` in row 3.
pub fn table1() -> Matrix {
    cycle_pattern(2)
}

/// An `N x n` matrix whose columns are pairwise disjoint as hyperedges:
/// column `j` has symbol `j` in every row, `q = n`.
pub fn disjoint_columns(rows: usize, n: usize) -> Matrix {
    let data = (0..rows).flat_map(|_| 0..n as Symbol).collect();
    Matrix::new(rows, n, n.max(1) as u32, data).expect("valid pattern")
}

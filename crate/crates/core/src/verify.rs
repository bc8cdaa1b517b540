//! Separation oracles over representation matrices.
//!
//! [`find_violation`] is the definitional check: it searches the disjoint part
//! tuples of a separation type and returns the lexicographically first tuple that
//! no row separates. The greedy special-column extraction for four-row
//! `{2,2}`-separating families also lives here.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::separation::SeparationType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("column {column} out of range for a matrix with {cols} columns")]
    ColumnOutOfRange { column: usize, cols: usize },
    #[error("row {row} out of range for a matrix with {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("column {0} appears in more than one part")]
    OverlappingParts(usize),
    #[error("expected a matrix with {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("input is not {{2,2}}-separating: parts {:?} are not separated", .0.parts)]
    NotSeparating(ViolationWitness),
    #[error("columns {0} and {1} agree in more than one row")]
    NonLinear(usize, usize),
}

/// Pairwise-disjoint column sets that no row of the matrix separates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationWitness {
    pub parts: Vec<Vec<usize>>,
    pub checked_rows: usize,
}

/// A column with a special coordinate: at `row`, at most one other column shares its symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpecialColumnReport {
    pub column: usize,
    pub row: usize,
    pub sharers: usize,
}

fn check_parts(matrix: &Matrix, parts: &[Vec<usize>]) -> Result<(), VerifyError> {
    let mut seen = vec![false; matrix.cols()];
    for &c in parts.iter().flatten() {
        if c >= matrix.cols() {
            return Err(VerifyError::ColumnOutOfRange {
                column: c,
                cols: matrix.cols(),
            });
        }
        if std::mem::replace(&mut seen[c], true) {
            return Err(VerifyError::OverlappingParts(c));
        }
    }
    Ok(())
}

/// True iff the symbol sets of `parts` on row `row` are pairwise disjoint.
pub fn row_separates(matrix: &Matrix, row: usize, parts: &[Vec<usize>]) -> Result<bool, VerifyError> {
    if row >= matrix.rows() {
        return Err(VerifyError::RowOutOfRange {
            row,
            rows: matrix.rows(),
        });
    }
    check_parts(matrix, parts)?;
    let mut owner: Vec<Option<usize>> = vec![None; matrix.q() as usize];
    for (k, part) in parts.iter().enumerate() {
        for &c in part {
            let slot = &mut owner[matrix.get(row, c) as usize];
            match *slot {
                Some(other) if other != k => return Ok(false),
                _ => *slot = Some(k),
            }
        }
    }
    Ok(true)
}

/// True iff some row separates `parts`.
pub fn some_row_separates(matrix: &Matrix, parts: &[Vec<usize>]) -> Result<bool, VerifyError> {
    for row in 0..matrix.rows() {
        if row_separates(matrix, row, parts)? {
            return Ok(true);
        }
    }
    Ok(false)
}

const ALIVE: u32 = u32::MAX;

/// Depth-first enumeration of disjoint part tuples with per-row liveness.
///
/// A row stays alive while the columns placed so far have pairwise disjoint
/// symbol sets on it. Once no row is alive every completion is a violation.
struct TupleSearch<'a> {
    matrix: &'a Matrix,
    sizes: &'a [usize],
    canonical: bool,
    q: usize,
    // (part + 1, multiplicity) per (row, symbol); part 0 means unowned
    owner: Vec<(u32, u32)>,
    killed_at: Vec<u32>,
    alive: usize,
    used: Vec<bool>,
    parts: Vec<Vec<usize>>,
    depth: u32,
}

impl<'a> TupleSearch<'a> {
    fn new(matrix: &'a Matrix, sizes: &'a [usize], canonical: bool) -> Self {
        let q = matrix.q() as usize;
        TupleSearch {
            matrix,
            sizes,
            canonical,
            q,
            owner: vec![(0, 0); matrix.rows() * q],
            killed_at: vec![ALIVE; matrix.rows()],
            alive: matrix.rows(),
            used: vec![false; matrix.cols()],
            parts: vec![Vec::new(); sizes.len()],
            depth: 0,
        }
    }

    fn place(&mut self, col: usize, part: usize) {
        let tag = part as u32 + 1;
        if self.alive > 0 {
            for row in 0..self.matrix.rows() {
                if self.killed_at[row] != ALIVE {
                    continue;
                }
                let slot = &mut self.owner[row * self.q + self.matrix.get(row, col) as usize];
                if slot.0 == 0 {
                    *slot = (tag, 1);
                } else if slot.0 == tag {
                    slot.1 += 1;
                } else {
                    self.killed_at[row] = self.depth;
                    self.alive -= 1;
                }
            }
        }
        self.depth += 1;
        self.used[col] = true;
        self.parts[part].push(col);
    }

    fn unplace(&mut self, col: usize, part: usize) {
        self.depth -= 1;
        self.used[col] = false;
        self.parts[part].pop();
        for row in 0..self.matrix.rows() {
            if self.killed_at[row] == self.depth {
                self.killed_at[row] = ALIVE;
                self.alive += 1;
            } else if self.killed_at[row] == ALIVE {
                let slot = &mut self.owner[row * self.q + self.matrix.get(row, col) as usize];
                slot.1 -= 1;
                if slot.1 == 0 {
                    slot.0 = 0;
                }
            }
        }
    }

    /// Lower bound on the first column of the part after `part`.
    fn next_part_start(&self, part: usize) -> usize {
        if self.canonical && part + 1 < self.sizes.len() && self.sizes[part + 1] == self.sizes[part] {
            self.parts[part][0] + 1
        } else {
            0
        }
    }

    /// Fills `part` from column `start` upward; true once every part is full and no row is alive.
    fn dfs(&mut self, part: usize, start: usize) -> bool {
        if part == self.sizes.len() {
            return self.alive == 0;
        }
        if self.parts[part].len() == self.sizes[part] {
            let next = self.next_part_start(part);
            return self.dfs(part + 1, next);
        }
        for col in start..self.matrix.cols() {
            if self.used[col] {
                continue;
            }
            self.place(col, part);
            if self.dfs(part, col + 1) {
                return true;
            }
            self.unplace(col, part);
        }
        false
    }

    fn witness(&self) -> ViolationWitness {
        let mut parts = self.parts.clone();
        for p in &mut parts {
            p.sort_unstable();
        }
        ViolationWitness {
            parts,
            checked_rows: self.matrix.rows(),
        }
    }
}

fn search_from_first(matrix: &Matrix, sizes: &[usize], first: usize) -> Option<ViolationWitness> {
    let mut search = TupleSearch::new(matrix, sizes, true);
    search.place(first, 0);
    search.dfs(0, first + 1).then(|| search.witness())
}

/// Returns the lexicographically first unseparated part tuple, or `None` if the
/// matrix is an SHF of the given type.
///
/// Parts come in ascending size order; parts of equal size are ordered by their
/// smallest column. Matrices with fewer than `u` columns are vacuously separating.
pub fn find_violation(matrix: &Matrix, sep: &SeparationType) -> Option<ViolationWitness> {
    if matrix.cols() < sep.u() {
        return None;
    }
    (0..matrix.cols()).find_map(|first| search_from_first(matrix, sep.weights(), first))
}

/// Same result as [`find_violation`], with the first-column branches spread over the rayon pool.
pub fn find_violation_parallel(matrix: &Matrix, sep: &SeparationType) -> Option<ViolationWitness> {
    if matrix.cols() < sep.u() {
        return None;
    }
    (0..matrix.cols())
        .into_par_iter()
        .find_map_first(|first| search_from_first(matrix, sep.weights(), first))
}

pub fn is_shf(matrix: &Matrix, sep: &SeparationType) -> bool {
    find_violation(matrix, sep).is_none()
}

/// True iff some unseparated tuple uses column `forced`.
///
/// Used for incremental checks: if the family without `forced` is separating,
/// this decides whether adding it breaks the property.
pub fn has_violation_with(matrix: &Matrix, sep: &SeparationType, forced: usize) -> bool {
    if matrix.cols() < sep.u() {
        return false;
    }
    let sizes = sep.weights();
    let mut prev = None;
    for part in 0..sizes.len() {
        if prev == Some(sizes[part]) {
            continue;
        }
        prev = Some(sizes[part]);
        let mut search = TupleSearch::new(matrix, sizes, false);
        search.place(forced, part);
        if search.dfs(0, 0) {
            return true;
        }
    }
    false
}

/// The first pair of distinct columns agreeing in two or more rows.
pub fn nonlinear_pair(matrix: &Matrix) -> Option<(usize, usize)> {
    let columns = matrix.columns();
    for a in 0..columns.len() {
        for b in a + 1..columns.len() {
            let agree = columns[a].iter().zip(&columns[b]).filter(|(x, y)| x == y).count();
            if agree > 1 {
                return Some((a, b));
            }
        }
    }
    None
}

/// True iff every two distinct columns agree in at most one row.
pub fn is_linear_shf(matrix: &Matrix) -> bool {
    nonlinear_pair(matrix).is_none()
}

fn symbol_counts(matrix: &Matrix, alive: &[bool]) -> Vec<usize> {
    let q = matrix.q() as usize;
    let mut counts = vec![0; matrix.rows() * q];
    for i in 0..matrix.rows() {
        for j in (0..matrix.cols()).filter(|&j| alive[j]) {
            counts[i * q + matrix.get(i, j) as usize] += 1;
        }
    }
    counts
}

fn special_row(matrix: &Matrix, counts: &[usize], col: usize) -> Option<(usize, usize)> {
    let q = matrix.q() as usize;
    (0..matrix.rows())
        .map(|i| (i, counts[i * q + matrix.get(i, col) as usize] - 1))
        .find(|&(_, sharers)| sharers <= 1)
}

/// Every column with a special coordinate, reporting the lowest such row.
pub fn special_columns(matrix: &Matrix) -> Vec<SpecialColumnReport> {
    let counts = symbol_counts(matrix, &vec![true; matrix.cols()]);
    (0..matrix.cols())
        .filter_map(|column| {
            special_row(matrix, &counts, column).map(|(row, sharers)| SpecialColumnReport { column, row, sharers })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubfamilyExtraction {
    pub submatrix: Matrix,
    /// Original indices of the surviving columns, ascending.
    pub kept: Vec<usize>,
    /// Original indices of deleted columns, in deletion order.
    pub deleted: Vec<usize>,
}

/// Greedily deletes the lowest-index special column until none remain.
///
/// Deleting a column only lowers symbol counts, so a special column stays
/// special; the candidate set therefore only grows between deletions.
pub fn extract_nonspecial_subfamily(matrix: &Matrix) -> SubfamilyExtraction {
    let q = matrix.q() as usize;
    let mut alive = vec![true; matrix.cols()];
    let mut counts = symbol_counts(matrix, &alive);
    let mut buckets = vec![Vec::new(); matrix.rows() * q];
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            buckets[i * q + matrix.get(i, j) as usize].push(j);
        }
    }
    let mut special: BTreeSet<usize> = (0..matrix.cols())
        .filter(|&j| special_row(matrix, &counts, j).is_some())
        .collect();
    let mut deleted = Vec::new();
    while let Some(x) = special.pop_first() {
        alive[x] = false;
        deleted.push(x);
        for i in 0..matrix.rows() {
            let key = i * q + matrix.get(i, x) as usize;
            counts[key] -= 1;
            if counts[key] <= 2 {
                special.extend(buckets[key].iter().copied().filter(|&y| alive[y]));
            }
        }
    }
    let kept: Vec<usize> = (0..matrix.cols()).filter(|&j| alive[j]).collect();
    SubfamilyExtraction {
        submatrix: matrix.select_columns(&kept),
        kept,
        deleted,
    }
}

/// Linear subfamily of a four-row `{2,2}`-separating family via special-column deletion.
///
/// Fails if the input has the wrong shape or is not `{2,2}`-separating; a
/// non-linear result is reported with the offending pair in original indices.
pub fn extract_linear_subfamily(matrix: &Matrix) -> Result<SubfamilyExtraction, VerifyError> {
    if matrix.rows() != 4 {
        return Err(VerifyError::RowCount {
            expected: 4,
            found: matrix.rows(),
        });
    }
    let sep = SeparationType::new(vec![2, 2]).expect("valid type");
    if let Some(witness) = find_violation(matrix, &sep) {
        return Err(VerifyError::NotSeparating(witness));
    }
    let extraction = extract_nonspecial_subfamily(matrix);
    if let Some((a, b)) = nonlinear_pair(&extraction.submatrix) {
        return Err(VerifyError::NonLinear(extraction.kept[a], extraction.kept[b]));
    }
    Ok(extraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{cycle_pattern, table1};

    fn sep(w: &[usize]) -> SeparationType {
        SeparationType::new(w.to_vec()).unwrap()
    }

    fn m(q: u32, rows: &[&[u32]]) -> Matrix {
        Matrix::from_rows(q, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn row_separation_basics() {
        assert!(row_separates(&m(2, &[&[0, 1]]), 0, &[vec![0], vec![1]]).unwrap());
        assert!(!row_separates(&m(2, &[&[0, 0]]), 0, &[vec![0], vec![1]]).unwrap());
        let t1 = table1();
        for f in 0..4 {
            assert!(!row_separates(&t1, f, &[vec![0, 2], vec![1, 3]]).unwrap());
        }
    }

    #[test]
    fn row_separation_errors() {
        let mat = m(2, &[&[0, 1]]);
        assert_eq!(
            row_separates(&mat, 0, &[vec![0], vec![0]]),
            Err(VerifyError::OverlappingParts(0))
        );
        assert_eq!(
            row_separates(&mat, 0, &[vec![0], vec![2]]),
            Err(VerifyError::ColumnOutOfRange { column: 2, cols: 2 })
        );
        assert_eq!(
            row_separates(&mat, 1, &[vec![0]]),
            Err(VerifyError::RowOutOfRange { row: 1, rows: 1 })
        );
    }

    #[test]
    fn identity_is_frameproof() {
        assert_eq!(find_violation(&Matrix::identity(4), &sep(&[1, 3])), None);
    }

    #[test]
    fn equal_columns_are_never_separated() {
        let mat = m(3, &[&[0, 1, 2, 1], &[2, 0, 1, 0]]);
        let w = find_violation(&mat, &sep(&[1, 1])).unwrap();
        assert_eq!(w.parts, vec![vec![1], vec![3]]);
        assert_eq!(w.checked_rows, 2);
    }

    #[test]
    fn table1_witness() {
        let w = find_violation(&table1(), &sep(&[2, 2])).unwrap();
        assert_eq!(w.parts, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn vacuous_when_too_few_columns() {
        let mat = m(2, &[&[0, 0, 0]]);
        assert_eq!(find_violation(&mat, &sep(&[2, 2])), None);
        assert!(find_violation(&mat, &sep(&[1, 2])).is_some());
    }

    #[test]
    fn parallel_matches_serial() {
        let t2 = cycle_pattern(3);
        for w in [&[1, 1][..], &[1, 2], &[2, 2], &[3, 3], &[1, 1, 1]] {
            assert_eq!(find_violation(&t2, &sep(w)), find_violation_parallel(&t2, &sep(w)));
        }
    }

    #[test]
    fn forced_check_sees_only_tuples_with_the_column() {
        let mat = m(3, &[&[0, 1, 2, 0]]);
        assert!(has_violation_with(&mat, &sep(&[1, 1]), 3));
        assert!(has_violation_with(&mat, &sep(&[1, 1]), 0));
        assert!(!has_violation_with(&mat, &sep(&[1, 1]), 1));
    }

    #[test]
    fn linearity_examples() {
        assert!(is_linear_shf(&Matrix::identity(3)));
        assert!(!is_linear_shf(&m(2, &[&[0, 0], &[1, 1]])));
        assert!(is_linear_shf(&table1()));
    }

    #[test]
    fn special_column_examples() {
        let single = m(3, &[&[2], &[1]]);
        assert_eq!(
            special_columns(&single),
            vec![SpecialColumnReport {
                column: 0,
                row: 0,
                sharers: 0
            }]
        );
        let perms = m(3, &[&[0, 1, 2], &[2, 0, 1], &[1, 2, 0]]);
        assert_eq!(special_columns(&perms).len(), 3);
        let triple = Matrix::new(4, 3, 2, vec![1; 12]).unwrap();
        assert!(special_columns(&triple).is_empty());
    }

    #[test]
    fn greedy_on_all_special() {
        let perms = m(3, &[&[0, 1, 2], &[2, 0, 1], &[1, 2, 0]]);
        let out = extract_nonspecial_subfamily(&perms);
        assert_eq!(out.submatrix.cols(), 0);
        assert_eq!(out.deleted, vec![0, 1, 2]);
    }

    #[test]
    fn greedy_keeps_heavy_families() {
        // every symbol in every row appears in at least three other columns
        let mat = m(2, &[&[0, 0, 0, 0, 1, 1, 1, 1], &[0, 1, 0, 1, 0, 1, 0, 1]]);
        let out = extract_nonspecial_subfamily(&mat);
        assert_eq!(out.submatrix, mat);
        assert!(out.deleted.is_empty());
    }

    #[test]
    fn greedy_cascades() {
        // deleting column 3 leaves symbol 1 in row 0 shared by only two columns
        let mat = m(2, &[&[0, 0, 0, 1, 1, 1], &[0, 0, 0, 1, 0, 0]]);
        let out = extract_nonspecial_subfamily(&mat);
        assert_eq!(out.deleted, vec![3, 4, 5]);
        assert_eq!(out.kept, vec![0, 1, 2]);
    }

    #[test]
    fn linear_extraction_rejects_table1() {
        assert!(matches!(
            extract_linear_subfamily(&table1()),
            Err(VerifyError::NotSeparating(_))
        ));
        assert!(matches!(
            extract_linear_subfamily(&Matrix::identity(3)),
            Err(VerifyError::RowCount { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn linear_extraction_on_distinct_symbol_columns() {
        let mat = m(4, &[&[0, 1, 2, 3], &[1, 2, 3, 0], &[2, 3, 0, 1], &[3, 0, 1, 2]]);
        let out = extract_linear_subfamily(&mat).unwrap();
        assert!(is_linear_shf(&out.submatrix));
        assert!(is_shf(&out.submatrix, &sep(&[2, 2])));
        let empty = Matrix::new(4, 0, 3, vec![]).unwrap();
        assert_eq!(extract_linear_subfamily(&empty).unwrap().submatrix.cols(), 0);
    }
}

//! Cover-free families and their relation to binary `{1,w}`-separating families.
//!
//! A binary `N x n` matrix represents the family `{A_j}` over `N` points with
//! `i in A_j` iff entry `(i, j)` is 1. The family is `w`-cover-free when no
//! member lies inside the union of `w` others.

use serde::Serialize;
use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};
use crate::separation::SeparationType;
use crate::verify::{find_violation, ViolationWitness};

/// `(15 + sqrt 33) / 24`.
pub fn group_testing_constant() -> f64 {
    (15.0 + 33f64.sqrt()) / 24.0
}

/// Guard band for comparisons against irrational bound values.
pub const GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverFreeError {
    #[error("expected a binary matrix, found alphabet size {0}")]
    NotBinary(u32),
    #[error("cover-free order must be at least {min}, got {w}")]
    Order { w: usize, min: usize },
    #[error("column {column} out of range for {cols} columns")]
    Column { column: usize, cols: usize },
    #[error("input is not {w}-cover-free: {violation:?}")]
    NotCoverFree { w: usize, violation: CoverViolation },
    #[error("input is not {{1,{w}}}-separating: {witness:?}")]
    NotSeparating { w: usize, witness: ViolationWitness },
    #[error("derived family failed the {w}-cover-free check: {violation:?}")]
    DerivedCheck { w: usize, violation: CoverViolation },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// `covered` is contained in the union of `covering`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverViolation {
    pub covered: usize,
    pub covering: Vec<usize>,
}

/// The representation matrix of a set family (alphabet size 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFamily(Matrix);

impl BinaryFamily {
    pub fn new(matrix: Matrix) -> Result<Self, CoverFreeError> {
        if matrix.q() != 2 {
            return Err(CoverFreeError::NotBinary(matrix.q()));
        }
        Ok(BinaryFamily(matrix))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn members(&self) -> usize {
        self.0.cols()
    }

    pub fn points(&self) -> usize {
        self.0.rows()
    }

    /// Rows where column `j` is 1.
    pub fn member(&self, j: usize) -> Vec<usize> {
        (0..self.0.rows()).filter(|&i| self.0.get(i, j) == 1).collect()
    }

    fn masks(&self) -> Vec<Vec<u64>> {
        let words = self.0.rows().div_ceil(64);
        (0..self.0.cols())
            .map(|j| {
                let mut mask = vec![0u64; words];
                for i in self.member(j) {
                    mask[i / 64] |= 1 << (i % 64);
                }
                mask
            })
            .collect()
    }
}

fn covers(union: &[u64], target: &[u64]) -> bool {
    union.iter().zip(target).all(|(u, t)| t & !u == 0)
}

fn first_cover(
    masks: &[Vec<u64>],
    target: usize,
    w: usize,
    chosen: &mut Vec<usize>,
    union: &mut Vec<u64>,
    start: usize,
) -> bool {
    if chosen.len() == w {
        return covers(union, &masks[target]);
    }
    for c in start..masks.len() {
        if c == target {
            continue;
        }
        let saved = union.clone();
        for (u, m) in union.iter_mut().zip(&masks[c]) {
            *u |= m;
        }
        chosen.push(c);
        if first_cover(masks, target, w, chosen, union, c + 1) {
            return true;
        }
        chosen.pop();
        *union = saved;
    }
    false
}

/// The lexicographically first `(A0; A1..Aw)` with `A0` inside `A1 u .. u Aw`, if any.
///
/// Families with at most `w` members are vacuously cover-free.
pub fn is_cff(family: &BinaryFamily, w: usize) -> Option<CoverViolation> {
    let n = family.members();
    if n < w + 1 {
        return None;
    }
    let masks = family.masks();
    let words = family.points().div_ceil(64);
    for target in 0..n {
        let mut chosen = Vec::with_capacity(w);
        let mut union = vec![0u64; words];
        if first_cover(&masks, target, w, &mut chosen, &mut union, 0) {
            return Some(CoverViolation {
                covered: target,
                covering: chosen,
            });
        }
    }
    None
}

fn require_cff(family: &BinaryFamily, w: usize) -> Result<(), CoverFreeError> {
    match is_cff(family, w) {
        Some(violation) => Err(CoverFreeError::NotCoverFree { w, violation }),
        None => Ok(()),
    }
}

/// Deletes member `a` and every point of `a`; a `w`-CFF becomes a `(w-1)`-CFF.
pub fn cff_derived(family: &BinaryFamily, a: usize, w: usize) -> Result<BinaryFamily, CoverFreeError> {
    if w < 2 {
        return Err(CoverFreeError::Order { w, min: 2 });
    }
    let m = family.matrix();
    if a >= m.cols() {
        return Err(CoverFreeError::Column {
            column: a,
            cols: m.cols(),
        });
    }
    require_cff(family, w)?;
    let rows: Vec<usize> = (0..m.rows()).filter(|&i| m.get(i, a) == 0).collect();
    let cols: Vec<usize> = (0..m.cols()).filter(|&j| j != a).collect();
    let derived = if rows.is_empty() {
        // every point was in `a`; a zero-row matrix cannot be represented, so keep one empty point
        Matrix::new(1, cols.len(), 2, vec![0; cols.len()])?
    } else {
        m.select_rows(&rows)?.select_columns(&cols)
    };
    let derived = BinaryFamily(derived);
    if let Some(violation) = is_cff(&derived, w - 1) {
        return Err(CoverFreeError::DerivedCheck { w: w - 1, violation });
    }
    Ok(derived)
}

/// Cross-checks that a verified `w`-CFF is `{1,w}`-separating.
pub fn cff_is_shf_check(family: &BinaryFamily, w: usize) -> Result<bool, CoverFreeError> {
    if w == 0 {
        return Err(CoverFreeError::Order { w, min: 1 });
    }
    require_cff(family, w)?;
    let sep = SeparationType::new(vec![1, w]).expect("valid type");
    Ok(find_violation(family.matrix(), &sep).is_none())
}

/// Replaces each 0 by the column pair `(1, 0)` and each 1 by `(0, 1)`.
///
/// A binary `{1,w}`-separating matrix becomes a `2N`-point `w`-CFF with
/// constant member size `N`; the result is re-checked.
pub fn shf_to_cff_double(matrix: &Matrix, w: usize) -> Result<BinaryFamily, CoverFreeError> {
    if matrix.q() != 2 {
        return Err(CoverFreeError::NotBinary(matrix.q()));
    }
    if w == 0 {
        return Err(CoverFreeError::Order { w, min: 1 });
    }
    let sep = SeparationType::new(vec![1, w]).expect("valid type");
    if let Some(witness) = find_violation(matrix, &sep) {
        return Err(CoverFreeError::NotSeparating { w, witness });
    }
    let mut data = Vec::with_capacity(2 * matrix.rows() * matrix.cols());
    for i in 0..matrix.rows() {
        data.extend(matrix.row(i).iter().map(|&s| 1 - s));
        data.extend_from_slice(matrix.row(i));
    }
    let doubled = BinaryFamily(Matrix::new(2 * matrix.rows(), matrix.cols(), 2, data)?);
    if let Some(violation) = is_cff(&doubled, w) {
        return Err(CoverFreeError::DerivedCheck { w, violation });
    }
    Ok(doubled)
}

/// Lower bounds on `N(w)`, the least `N` admitting a binary `{1,w}`-SHF with more than `N` columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NwBounds {
    pub w: usize,
    pub lower: u64,
    /// Least integer above `(15 + sqrt 33)/24 (w-2)^2`.
    pub group_testing: u64,
    /// `binom(w+1, 2) + 1`.
    pub binomial: u64,
    /// `3w`.
    pub linear: u64,
    pub sandwich: [String; 2],
}

pub fn nw_bounds(w: usize) -> Result<NwBounds, CoverFreeError> {
    if w < 3 {
        return Err(CoverFreeError::Order { w, min: 3 });
    }
    let real = group_testing_constant() * ((w - 2) * (w - 2)) as f64;
    let group_testing = (real + GUARD).floor() as u64 + 1;
    let binomial = (w as u64 + 1) * w as u64 / 2 + 1;
    let linear = 3 * w as u64;
    Ok(NwBounds {
        w,
        lower: group_testing.max(binomial).max(linear),
        group_testing,
        binomial,
        linear,
        sandwich: [format!("N*({})", w - 2), format!("N*({w})")],
    })
}

/// `(15 + sqrt 33)/24 w^2`, a lower bound on `N*(w)`.
pub fn nstar_lower(w: usize) -> Result<f64, CoverFreeError> {
    if w == 0 {
        return Err(CoverFreeError::Order { w, min: 1 });
    }
    Ok(group_testing_constant() * (w * w) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(rows: &[Vec<u32>]) -> BinaryFamily {
        BinaryFamily::new(Matrix::from_rows(2, rows).unwrap()).unwrap()
    }

    #[test]
    fn identity_is_cover_free() {
        let id = BinaryFamily::new(Matrix::identity(5)).unwrap();
        for w in 1..=4 {
            assert_eq!(is_cff(&id, w), None);
        }
    }

    #[test]
    fn empty_member_is_covered() {
        let f = fam(&[vec![1, 0, 0], vec![0, 0, 1]]);
        assert_eq!(
            is_cff(&f, 1),
            Some(CoverViolation {
                covered: 1,
                covering: vec![0]
            })
        );
    }

    #[test]
    fn containment_is_a_violation() {
        let f = fam(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(
            is_cff(&f, 1),
            Some(CoverViolation {
                covered: 0,
                covering: vec![1]
            })
        );
    }

    #[test]
    fn rejects_non_binary() {
        let m = Matrix::new(1, 1, 3, vec![2]).unwrap();
        assert_eq!(BinaryFamily::new(m), Err(CoverFreeError::NotBinary(3)));
    }

    #[test]
    fn derived_examples() {
        let id3 = BinaryFamily::new(Matrix::identity(3)).unwrap();
        let d = cff_derived(&id3, 0, 2).unwrap();
        assert_eq!(d.matrix(), &Matrix::identity(2));

        // member 1 is empty: no points are removed
        let f = fam(&[vec![1, 0], vec![0, 0]]);
        let d = cff_derived(&f, 1, 2).unwrap();
        assert_eq!((d.points(), d.members()), (2, 1));
        assert_eq!(
            cff_derived(&f, 1, 1).unwrap_err(),
            CoverFreeError::Order { w: 1, min: 2 }
        );
        let g = fam(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0]]);
        assert!(
            cff_derived(&g, 3, 2).is_err(),
            "empty member makes the family not cover-free"
        );
    }

    #[test]
    fn derived_from_doubled() {
        let doubled = shf_to_cff_double(&Matrix::identity(4), 3).unwrap();
        for a in 0..4 {
            assert!(cff_derived(&doubled, a, 3).is_ok());
        }
    }

    #[test]
    fn derived_rejects_non_cff() {
        let f = fam(&[vec![1, 1, 0], vec![0, 1, 1]]);
        assert!(matches!(
            cff_derived(&f, 0, 2),
            Err(CoverFreeError::NotCoverFree { w: 2, .. })
        ));
    }

    #[test]
    fn cff_implies_frameproof() {
        let id4 = BinaryFamily::new(Matrix::identity(4)).unwrap();
        assert!(cff_is_shf_check(&id4, 3).unwrap());
        let id5 = BinaryFamily::new(Matrix::identity(5)).unwrap();
        assert!(cff_is_shf_check(&id5, 2).unwrap());
    }

    #[test]
    fn doubling_examples() {
        let single = Matrix::from_rows(2, &[vec![0, 1]]).unwrap();
        let d = shf_to_cff_double(&single, 1).unwrap();
        assert_eq!(d.matrix(), &Matrix::from_rows(2, &[vec![1, 0], vec![0, 1]]).unwrap());

        let d = shf_to_cff_double(&Matrix::identity(3), 2).unwrap();
        assert_eq!((d.points(), d.members()), (6, 3));
        assert!((0..3).all(|j| d.member(j).len() == 3));
    }

    #[test]
    fn doubling_rejects_non_separating() {
        let m = Matrix::from_rows(2, &[vec![0, 0, 1]]).unwrap();
        assert!(matches!(
            shf_to_cff_double(&m, 1),
            Err(CoverFreeError::NotSeparating { .. })
        ));
    }

    #[test]
    fn nw_examples() {
        assert_eq!(nw_bounds(12).unwrap().lower, 87);
        assert_eq!(nw_bounds(3).unwrap().lower, 9);
        assert_eq!(nw_bounds(4).unwrap().lower, 12);
        let b = nw_bounds(12).unwrap();
        assert_eq!((b.group_testing, b.binomial, b.linear), (87, 79, 36));
        assert_eq!(b.sandwich, ["N*(10)".to_string(), "N*(12)".to_string()]);
        assert!(nw_bounds(2).is_err());
    }

    #[test]
    fn nstar_examples() {
        assert!((nstar_lower(1).unwrap() - 0.864_356_776_9).abs() < 1e-9);
        assert!((nstar_lower(10).unwrap() - 86.435_677_69).abs() < 1e-7);
        assert!(nstar_lower(0).is_err());
    }
}

//! Exact capacities at desk scale, constructions and the rainbow-free
//! extremal search.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hypergraph::{find_rainbow_cycle, find_rainbow_cycle_through, HypergraphError, PartiteHypergraph};
use crate::matrix::{Matrix, MatrixError, Symbol};
use crate::separation::SeparationType;
use crate::verify::{find_violation, has_violation_with, ViolationWitness};

/// Largest candidate column set `exact_capacity` will enumerate.
pub const MAX_CANDIDATES: u64 = 10_000;
/// Cap on the initial column count of the alteration construction.
pub const ALTERATION_MAX_COLUMNS: usize = 128;
/// Reed-Solomon outputs with at most this many columns are run through the verifier.
pub const RS_VERIFY_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("q^N = {0} candidate columns exceeds the limit of {MAX_CANDIDATES}")]
    TooManyCandidates(u64),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("{0} is not prime; only prime fields are supported")]
    NotPrime(u32),
    #[error("construction failed verification: parts {:?}", .0.parts)]
    Unverified(ViolationWitness),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    #[serde(rename = "N")]
    pub rows: usize,
    pub q: u32,
    pub weights: SeparationType,
    /// `C(N, q, W)`, or the best size found when `lower_bound_only` is set.
    pub value: usize,
    #[serde(serialize_with = "serialize_matrix")]
    pub witness: Matrix,
    pub stats: SearchStats,
    /// The node budget ran out before maximality was proved.
    pub lower_bound_only: bool,
}

fn serialize_matrix<S: serde::Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&m.to_text())
}

/// Column with index `index` in the lexicographic order of `q`-ary columns of length `rows`.
fn column_from_index(index: u64, rows: usize, q: u32) -> Vec<Symbol> {
    let mut col = vec![0; rows];
    let mut rest = index;
    for i in (0..rows).rev() {
        col[i] = (rest % q as u64) as Symbol;
        rest /= q as u64;
    }
    col
}

fn all_columns(rows: usize, q: u32) -> Result<Vec<Vec<Symbol>>, SearchError> {
    let total = (q as u64).checked_pow(rows as u32).filter(|&n| n <= MAX_CANDIDATES);
    let total = total.ok_or_else(|| SearchError::TooManyCandidates((q as u64).saturating_pow(rows as u32)))?;
    Ok((0..total).map(|i| column_from_index(i, rows, q)).collect())
}

struct CapacitySearch<'a> {
    rows: usize,
    q: u32,
    sep: &'a SeparationType,
    columns: Vec<Vec<Symbol>>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl CapacitySearch<'_> {
    fn matrix_of(&self, indices: &[usize]) -> Matrix {
        let cols: Vec<Vec<Symbol>> = indices.iter().map(|&i| self.columns[i].clone()).collect();
        Matrix::from_columns(self.rows, self.q, &cols).expect("candidate columns are in range")
    }

    /// True iff `chosen + [extra]` stays separating, given that `chosen` is.
    fn extends(&self, extra: usize) -> bool {
        let mut indices = self.chosen.clone();
        indices.push(extra);
        let m = self.matrix_of(&indices);
        !has_violation_with(&m, self.sep, indices.len() - 1)
    }

    /// Branch and bound; every candidate in `cand` individually extends `chosen`.
    fn dfs(&mut self, cand: &[usize]) {
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
        }
        for (pos, &c) in cand.iter().enumerate() {
            if self.chosen.len() + cand.len() - pos <= self.best.len() {
                return;
            }
            if self.nodes >= self.budget {
                self.exhausted = true;
                return;
            }
            self.nodes += 1;
            self.chosen.push(c);
            let next: Vec<usize> = cand[pos + 1..].iter().copied().filter(|&d| self.extends(d)).collect();
            self.dfs(&next);
            self.chosen.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// `C(N, q, W)` by exhaustive branch and bound over sets of distinct columns.
///
/// Once a family has `u` columns a repeated column lies in two parts of some
/// unseparated tuple, so only sets of distinct columns need searching; below
/// `u` columns every family is vacuously separating, so the answer is at least
/// `u - 1`. Relabeling the symbols of each row fixes the all-zero column in the
/// family. Sets are enumerated in lexicographic order of column indices and the
/// first maximum set found is returned, so the witness is the lexicographically
/// least maximum one.
pub fn exact_capacity(
    rows: usize,
    q: u32,
    sep: &SeparationType,
    node_budget: u64,
) -> Result<CapacityResult, SearchError> {
    if sep.t() < 2 {
        return Err(SearchError::Range(
            "a single part is always separated; capacity is unbounded".into(),
        ));
    }
    if q < 1 {
        return Err(SearchError::Range("q must be at least 1".into()));
    }
    let start = Instant::now();
    let columns = all_columns(rows, q)?;
    let mut search = CapacitySearch {
        rows,
        q,
        sep,
        columns,
        chosen: vec![0],
        best: vec![0],
        nodes: 1,
        budget: node_budget.max(1),
        exhausted: false,
    };
    let cand: Vec<usize> = (1..search.columns.len()).filter(|&d| search.extends(d)).collect();
    search.dfs(&cand);

    let floor = sep.u() - 1;
    let (value, witness) = if search.best.len() >= floor {
        (search.best.len(), search.matrix_of(&search.best))
    } else {
        // fewer than u - 1 distinct columns exist; pad by repetition
        let indices: Vec<usize> = (0..floor).map(|i| i % search.columns.len()).collect();
        (floor, search.matrix_of(&indices))
    };
    Ok(CapacityResult {
        rows,
        q,
        weights: sep.clone(),
        value,
        witness,
        stats: SearchStats {
            nodes: search.nodes,
            elapsed_ms: start.elapsed().as_millis(),
        },
        lower_bound_only: search.exhausted,
    })
}

/// The `N x N` binary identity, a `{1,w}`-separating family for `w <= N - 1`.
pub fn identity_construction(rows: usize, w: usize) -> Result<Matrix, SearchError> {
    if w < 1 || w >= rows {
        return Err(SearchError::Range(format!(
            "need 1 <= w <= N - 1, got N = {rows}, w = {w}"
        )));
    }
    let m = Matrix::identity(rows);
    let sep = SeparationType::new(vec![1, w]).expect("positive weights");
    if let Some(v) = find_violation(&m, &sep) {
        return Err(SearchError::Unverified(v));
    }
    Ok(m)
}

fn is_prime(q: u32) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// Evaluations of every polynomial of degree below `k = ceil(N/w)` over `GF(q)`
/// at the points `0, .., N-1`.
///
/// Two distinct polynomials agree on fewer than `k` points, so for any column
/// and `w` others some point is missed by all `w` agreements. Columns follow
/// the lexicographic order of coefficient vectors, constant term last.
pub fn reed_solomon_frameproof(q: u32, rows: usize, w: usize) -> Result<Matrix, SearchError> {
    if !is_prime(q) {
        return Err(SearchError::NotPrime(q));
    }
    if rows < 1 || rows > q as usize {
        return Err(SearchError::Range(format!("need 1 <= N <= q, got N = {rows}, q = {q}")));
    }
    if w < 1 {
        return Err(SearchError::Range("w must be at least 1".into()));
    }
    let k = rows.div_ceil(w);
    let n = (q as u64)
        .checked_pow(k as u32)
        .filter(|&n| n <= 1 << 24)
        .ok_or_else(|| SearchError::Range(format!("q^k = {q}^{k} columns is too many")))? as usize;
    let mut data = vec![0; rows * n];
    for j in 0..n {
        let coeffs = column_from_index(j as u64, k, q);
        for x in 0..rows {
            // Horner, highest degree first
            let v = coeffs
                .iter()
                .fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % q as u64);
            data[x * n + j] = v as Symbol;
        }
    }
    let m = Matrix::new(rows, n, q, data)?;
    if n <= RS_VERIFY_LIMIT {
        let sep = SeparationType::new(vec![1, w]).expect("positive weights");
        if let Some(v) = find_violation(&m, &sep) {
            return Err(SearchError::Unverified(v));
        }
    }
    Ok(m)
}

/// Initial column count for the alteration construction:
/// `ceil((1 - g(q,u))^(-N/(u-1)) u^(-1/(u-1)))`, the maximizer of
/// `m - m^u (1 - g)^N`, clamped to `[u, min(q^N, cap)]`.
pub fn alteration_initial_size(rows: usize, q: u32, sep: &SeparationType) -> usize {
    let u = sep.u();
    let g: f64 = (0..u)
        .map(|i| (q as f64 - i as f64) / q as f64)
        .product::<f64>()
        .max(0.0);
    let m = (1.0 - g).powf(-(rows as f64) / (u - 1) as f64) * (u as f64).powf(-1.0 / (u - 1) as f64);
    let distinct = (q as f64).powi(rows as i32);
    let hi = distinct.min(ALTERATION_MAX_COLUMNS as f64);
    (m.ceil().min(hi) as usize).max(u.min(hi as usize))
}

/// Random matrix with the expectation-optimal width, then one column deleted from
/// every unseparated tuple until the verifier passes.
///
/// Each trial draws from one ChaCha8 stream seeded by `seed`; the largest
/// result (earliest on ties) is returned.
pub fn random_shf_alteration(
    rows: usize,
    q: u32,
    sep: &SeparationType,
    seed: u64,
    trials: usize,
) -> Result<Matrix, SearchError> {
    if (q as usize) < sep.u() {
        return Err(SearchError::Range(format!("need q >= u, got q = {q}, u = {}", sep.u())));
    }
    if sep.t() < 2 || trials < 1 || rows < 1 {
        return Err(SearchError::Range("need t >= 2, N >= 1 and at least one trial".into()));
    }
    let width = alteration_initial_size(rows, q, sep);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Matrix> = None;
    for _ in 0..trials {
        let data: Vec<Symbol> = (0..rows * width).map(|_| rng.gen_range(0..q)).collect();
        let mut m = Matrix::new(rows, width, q, data)?;
        while let Some(v) = find_violation(&m, sep) {
            // drop the largest column of the witness
            let drop = *v.parts.iter().flatten().max().expect("nonempty witness");
            let keep: Vec<usize> = (0..m.cols()).filter(|&c| c != drop).collect();
            m = m.select_columns(&keep);
        }
        if best.as_ref().is_none_or(|b| m.cols() > b.cols()) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one trial");
    if let Some(v) = find_violation(&best, sep) {
        return Err(SearchError::Unverified(v));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RainbowFreeResult {
    pub r: usize,
    pub q: u32,
    pub lengths: Vec<usize>,
    pub edges: usize,
    pub hypergraph: PartiteHypergraph,
    pub stats: SearchStats,
    /// The budget ran out; `edges` is the best found, not a proved maximum.
    pub heuristic: bool,
}

struct RainbowSearch<'a> {
    r: usize,
    q: u32,
    lengths: &'a [usize],
    candidates: Vec<Vec<Symbol>>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

fn shares_at_most_one(a: &[Symbol], b: &[Symbol]) -> bool {
    a.iter().zip(b).filter(|(x, y)| x == y).count() <= 1
}

impl RainbowSearch<'_> {
    fn hypergraph(&self, indices: &[usize]) -> PartiteHypergraph {
        let edges = indices.iter().map(|&i| self.candidates[i].clone()).collect();
        PartiteHypergraph::new(self.r, self.q, edges).expect("candidate edges are well formed")
    }

    fn cycle_free_with_last(&self) -> bool {
        let h = self.hypergraph(&self.chosen);
        let last = self.chosen.len() - 1;
        self.lengths.iter().all(|&k| {
            find_rainbow_cycle_through(&h, k, last)
                .expect("lengths validated")
                .is_none()
        })
    }

    fn dfs(&mut self, cand: &[usize]) {
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
        }
        for (pos, &c) in cand.iter().enumerate() {
            if self.chosen.len() + cand.len() - pos <= self.best.len() {
                return;
            }
            if self.nodes >= self.budget {
                self.exhausted = true;
                return;
            }
            self.nodes += 1;
            self.chosen.push(c);
            if self.cycle_free_with_last() {
                let edge = &self.candidates[c];
                let next: Vec<usize> = cand[pos + 1..]
                    .iter()
                    .copied()
                    .filter(|&d| shares_at_most_one(edge, &self.candidates[d]))
                    .collect();
                self.dfs(&next);
            }
            self.chosen.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// Largest linear `r`-partite hypergraph with parts of size `q` and no rainbow
/// cycle of any length in `lengths`, by branch and bound over edge sets.
///
/// Relabeling vertices within each part fixes the all-zero edge. The search
/// starts from the perfect matching `{(i, .., i)}`, which has no cycles at all.
/// The result is re-verified before returning.
pub fn rainbow_free_extremal_search(
    r: usize,
    q: u32,
    lengths: &[usize],
    node_budget: u64,
) -> Result<RainbowFreeResult, SearchError> {
    if !(3..=6).contains(&r) || !(1..=5).contains(&q) {
        return Err(SearchError::Range(format!(
            "need 3 <= r <= 6 and 1 <= q <= 5, got r = {r}, q = {q}"
        )));
    }
    if lengths.is_empty() || lengths.iter().any(|&k| k < 3 || k > r) {
        return Err(SearchError::Range(format!(
            "cycle lengths must lie in [3, {r}], got {lengths:?}"
        )));
    }
    let start = Instant::now();
    let total = (q as u64).pow(r as u32);
    let candidates: Vec<Vec<Symbol>> = (0..total).map(|i| column_from_index(i, r, q)).collect();
    let matching: Vec<usize> = (0..q as u64)
        .map(|s| (0..r).fold(0u64, |acc, _| acc * q as u64 + s) as usize)
        .collect();
    let mut search = RainbowSearch {
        r,
        q,
        lengths,
        candidates,
        chosen: vec![0],
        best: matching,
        nodes: 1,
        budget: node_budget.max(1),
        exhausted: false,
    };
    let zero = search.candidates[0].clone();
    let cand: Vec<usize> = (1..search.candidates.len())
        .filter(|&d| shares_at_most_one(&zero, &search.candidates[d]))
        .collect();
    search.dfs(&cand);

    let h = search.hypergraph(&search.best);
    if !h.is_linear() {
        return Err(SearchError::Range("search produced a non-linear hypergraph".into()));
    }
    for &k in lengths {
        if find_rainbow_cycle(&h, k)?.is_some() {
            return Err(SearchError::Range(format!("search produced a rainbow {k}-cycle")));
        }
    }
    Ok(RainbowFreeResult {
        r,
        q,
        lengths: lengths.to_vec(),
        edges: h.edge_count(),
        hypergraph: h,
        stats: SearchStats {
            nodes: search.nodes,
            elapsed_ms: start.elapsed().as_millis(),
        },
        heuristic: search.exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sep(w: &[usize]) -> SeparationType {
        SeparationType::new(w.to_vec()).unwrap()
    }

    const BUDGET: u64 = 10_000_000;

    #[test]
    fn capacity_examples() {
        assert_eq!(exact_capacity(2, 2, &sep(&[1, 1]), BUDGET).unwrap().value, 4);
        assert_eq!(exact_capacity(1, 3, &sep(&[1, 2]), BUDGET).unwrap().value, 3);
        assert_eq!(exact_capacity(3, 2, &sep(&[1, 2]), BUDGET).unwrap().value, 4);
        assert_eq!(exact_capacity(2, 3, &sep(&[1, 1]), BUDGET).unwrap().value, 9);
    }

    #[test]
    fn capacity_witness_is_separating() {
        let r = exact_capacity(3, 2, &sep(&[1, 2]), BUDGET).unwrap();
        assert_eq!(r.witness.cols(), r.value);
        assert!(find_violation(&r.witness, &sep(&[1, 2])).is_none());
        assert!(!r.lower_bound_only);
    }

    #[test]
    fn capacity_vacuous_floor() {
        let r = exact_capacity(1, 2, &sep(&[1, 3]), BUDGET).unwrap();
        assert_eq!(r.value, 3);
        assert_eq!(r.witness.cols(), 3);
    }

    #[test]
    fn capacity_budget_trips() {
        let r = exact_capacity(4, 2, &sep(&[1, 1]), 3).unwrap();
        assert!(r.lower_bound_only);
        assert!(r.value <= 16);
    }

    #[test]
    fn capacity_rejects_large_spaces() {
        assert!(matches!(
            exact_capacity(9, 3, &sep(&[1, 1]), BUDGET),
            Err(SearchError::TooManyCandidates(19683))
        ));
    }

    #[test]
    fn identity_examples() {
        assert_eq!(identity_construction(4, 3).unwrap(), Matrix::identity(4));
        assert_eq!(identity_construction(2, 1).unwrap().cols(), 2);
        assert!(identity_construction(3, 3).is_err());
    }

    #[test]
    fn reed_solomon_examples() {
        let m = reed_solomon_frameproof(3, 3, 2).unwrap();
        assert_eq!((m.rows(), m.cols(), m.q()), (3, 9, 3));
        let m = reed_solomon_frameproof(5, 5, 4).unwrap();
        assert_eq!((m.rows(), m.cols()), (5, 25));
        let rep = reed_solomon_frameproof(5, 3, 3).unwrap();
        assert_eq!(rep.cols(), 5);
        for j in 0..5 {
            assert!(rep.column(j).iter().all(|&s| s == j as Symbol));
        }
        assert_eq!(reed_solomon_frameproof(4, 3, 2), Err(SearchError::NotPrime(4)));
        assert!(reed_solomon_frameproof(3, 4, 2).is_err());
    }

    #[test]
    fn alteration_examples() {
        let m = random_shf_alteration(3, 4, &sep(&[1, 1]), 7, 1).unwrap();
        assert!(find_violation(&m, &sep(&[1, 1])).is_none());
        assert!(m.cols() <= 64);
        let m = random_shf_alteration(4, 4, &sep(&[2, 2]), 1, 2).unwrap();
        assert!(find_violation(&m, &sep(&[2, 2])).is_none());
        assert!(random_shf_alteration(2, 2, &sep(&[1, 2]), 1, 1).is_err());
    }

    #[test]
    fn alteration_is_deterministic() {
        let a = random_shf_alteration(3, 5, &sep(&[1, 2]), 42, 3).unwrap();
        let b = random_shf_alteration(3, 5, &sep(&[1, 2]), 42, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rainbow_free_examples() {
        let r = rainbow_free_extremal_search(3, 2, &[3], BUDGET).unwrap();
        assert!(r.edges >= 2);
        assert!(!r.heuristic);
        let r = rainbow_free_extremal_search(4, 2, &[3, 4], BUDGET).unwrap();
        assert!(r.edges >= 2);
        assert!(r.hypergraph.is_linear());
        assert!(rainbow_free_extremal_search(7, 2, &[3], BUDGET).is_err());
        assert!(rainbow_free_extremal_search(4, 2, &[5], BUDGET).is_err());
    }
}

//! The `N`-partite hypergraph view of a matrix and rainbow cycles in it.
//!
//! Column `j` of an `N x n` matrix becomes the edge `{(i, M[i][j]) : i < N}`;
//! part `i` holds the vertices `(i, 0..q)`. A rainbow `k`-cycle is an
//! alternating sequence `v1, E1, v2, E2, .., vk, Ek` of distinct vertices and
//! distinct edges with `vi, v(i+1)` in `Ei` (cyclically) and all `k` vertices
//! in different parts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{Matrix, MatrixError, Symbol};
use crate::verify::{row_separates, ViolationWitness};

/// `(part, symbol)`.
pub type Vertex = (usize, Symbol);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("cycle length {k} out of range [3, {parts}]")]
    LengthOutOfRange { k: usize, parts: usize },
    #[error("edge {edge} does not meet every part exactly once")]
    MalformedEdge { edge: usize },
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("cycle of odd length {0} has no alternating split")]
    OddCycle(usize),
    #[error("row {0} separates the alternating split of the cycle")]
    SeparatedSplit(usize),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// An `r`-uniform `r`-partite hypergraph with parts of size `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartiteHypergraph {
    parts: usize,
    part_size: u32,
    /// `edges[j][i]` is the vertex of edge `j` in part `i`.
    edges: Vec<Vec<Symbol>>,
}

impl PartiteHypergraph {
    pub fn new(parts: usize, part_size: u32, edges: Vec<Vec<Symbol>>) -> Result<Self, HypergraphError> {
        for (j, e) in edges.iter().enumerate() {
            if e.len() != parts || e.iter().any(|&s| s >= part_size) {
                return Err(HypergraphError::MalformedEdge { edge: j });
            }
        }
        Ok(PartiteHypergraph {
            parts,
            part_size,
            edges,
        })
    }

    pub fn from_matrix(matrix: &Matrix) -> Self {
        PartiteHypergraph {
            parts: matrix.rows(),
            part_size: matrix.q(),
            edges: matrix.columns(),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix, MatrixError> {
        Matrix::from_columns(self.parts, self.part_size, &self.edges)
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn part_size(&self) -> u32 {
        self.part_size
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, j: usize) -> &[Symbol] {
        &self.edges[j]
    }

    pub fn edge_vertices(&self, j: usize) -> impl Iterator<Item = Vertex> + '_ {
        self.edges[j].iter().enumerate().map(|(i, &s)| (i, s))
    }

    /// Parts in which edges `a` and `b` share their vertex.
    pub fn common_parts(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.parts)
            .filter(|&i| self.edges[a][i] == self.edges[b][i])
            .collect()
    }

    pub fn contains(&self, edge: usize, v: Vertex) -> bool {
        v.0 < self.parts && self.edges[edge][v.0] == v.1
    }

    /// True iff every two distinct edges share at most one vertex.
    pub fn is_linear(&self) -> bool {
        (0..self.edges.len()).all(|a| (a + 1..self.edges.len()).all(|b| self.common_parts(a, b).len() <= 1))
    }

    pub fn shadow_graph(&self) -> ShadowGraph {
        let mut vertices = BTreeSet::new();
        let mut edges: BTreeMap<(Vertex, Vertex), Vec<usize>> = BTreeMap::new();
        for j in 0..self.edges.len() {
            let vs: Vec<Vertex> = self.edge_vertices(j).collect();
            vertices.extend(vs.iter().copied());
            for a in 0..vs.len() {
                for b in a + 1..vs.len() {
                    edges.entry((vs[a], vs[b])).or_default().push(j);
                }
            }
        }
        ShadowGraph {
            parts: self.parts,
            hyperedges: self.edges.len(),
            vertices,
            edges,
        }
    }
}

/// `v1, E1, .., vk, Ek` stored as parallel vertex and edge lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RainbowCycle {
    pub k: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<usize>,
}

impl RainbowCycle {
    /// Re-checks the four defining conditions against `h`.
    pub fn validate(&self, h: &PartiteHypergraph) -> Result<(), HypergraphError> {
        let bad = |msg: String| Err(HypergraphError::InvalidCycle(msg));
        let k = self.k;
        if self.vertices.len() != k || self.edges.len() != k || k < 2 {
            return bad(format!("length mismatch for k = {k}"));
        }
        if self.edges.iter().any(|&e| e >= h.edge_count()) {
            return bad("edge index out of range".into());
        }
        if self.edges.iter().collect::<BTreeSet<_>>().len() != k {
            return bad("edges are not distinct".into());
        }
        if self.vertices.iter().collect::<BTreeSet<_>>().len() != k {
            return bad("vertices are not distinct".into());
        }
        if self.vertices.iter().map(|v| v.0).collect::<BTreeSet<_>>().len() != k {
            return bad("vertices are not in distinct parts".into());
        }
        for i in 0..k {
            let e = self.edges[i];
            if !h.contains(e, self.vertices[i]) || !h.contains(e, self.vertices[(i + 1) % k]) {
                return bad(format!("edge {e} misses a neighbouring vertex"));
            }
        }
        Ok(())
    }
}

struct CycleSearch<'a> {
    h: &'a PartiteHypergraph,
    k: usize,
    adjacency: Vec<Vec<(usize, Vec<usize>)>>,
    seq: Vec<usize>,
    used: Vec<bool>,
    // forced[p] counts single-part intersections pinned to part p
    forced: Vec<u32>,
}

impl<'a> CycleSearch<'a> {
    fn new(h: &'a PartiteHypergraph, k: usize) -> Self {
        let n = h.edge_count();
        let adjacency = (0..n)
            .map(|a| {
                (0..n)
                    .filter(|&b| b != a)
                    .map(|b| (b, h.common_parts(a, b)))
                    .filter(|(_, common)| !common.is_empty())
                    .collect()
            })
            .collect();
        CycleSearch {
            h,
            k,
            adjacency,
            seq: Vec::new(),
            used: vec![false; n],
            forced: vec![0; h.parts()],
        }
    }

    /// Lexicographically first vertex choice for the current closed edge sequence.
    fn assign_vertices(&self) -> Option<Vec<Vertex>> {
        let k = self.k;
        let options: Vec<Vec<usize>> = (0..k)
            .map(|i| self.h.common_parts(self.seq[(i + k - 1) % k], self.seq[i]))
            .collect();
        let mut chosen = Vec::with_capacity(k);
        let mut taken = vec![false; self.h.parts()];
        fn pick(options: &[Vec<usize>], chosen: &mut Vec<usize>, taken: &mut [bool]) -> bool {
            let i = chosen.len();
            if i == options.len() {
                return true;
            }
            for &p in &options[i] {
                if !taken[p] {
                    taken[p] = true;
                    chosen.push(p);
                    if pick(options, chosen, taken) {
                        return true;
                    }
                    chosen.pop();
                    taken[p] = false;
                }
            }
            false
        }
        if !pick(&options, &mut chosen, &mut taken) {
            return None;
        }
        Some(
            chosen
                .iter()
                .zip(&self.seq)
                .map(|(&p, &e)| (p, self.h.edge(e)[p]))
                .collect(),
        )
    }

    fn push(&mut self, e: usize, single: Option<usize>) {
        self.seq.push(e);
        self.used[e] = true;
        if let Some(p) = single {
            self.forced[p] += 1;
        }
    }

    fn pop(&mut self, single: Option<usize>) {
        let e = self.seq.pop().expect("non-empty sequence");
        self.used[e] = false;
        if let Some(p) = single {
            self.forced[p] -= 1;
        }
    }

    /// Extends the edge sequence; `floor` excludes edges below the anchor when it must be minimal.
    fn extend(&mut self, floor: usize) -> Option<RainbowCycle> {
        let last = *self.seq.last().expect("anchored sequence");
        if self.seq.len() == self.k {
            let first = self.seq[0];
            if self.h.common_parts(last, first).is_empty() {
                return None;
            }
            return self.assign_vertices().map(|vertices| RainbowCycle {
                k: self.k,
                vertices,
                edges: self.seq.clone(),
            });
        }
        let mut neighbours: Vec<(usize, Option<usize>)> = Vec::new();
        for (b, common) in &self.adjacency[last] {
            if *b < floor || self.used[*b] {
                continue;
            }
            let single = if common.len() == 1 { Some(common[0]) } else { None };
            if single.is_some_and(|p| self.forced[p] > 0) {
                continue;
            }
            neighbours.push((*b, single));
        }
        for (b, single) in neighbours {
            self.push(b, single);
            if let Some(found) = self.extend(floor) {
                return Some(found);
            }
            self.pop(single);
        }
        None
    }
}

fn check_length(h: &PartiteHypergraph, k: usize) -> Result<(), HypergraphError> {
    if k < 3 || k > h.parts() {
        return Err(HypergraphError::LengthOutOfRange { k, parts: h.parts() });
    }
    Ok(())
}

/// The rainbow `k`-cycle that is lexicographically first by edge sequence
/// (then by vertex sequence), if any.
///
/// The first edge of the returned cycle is its smallest edge index.
pub fn find_rainbow_cycle(h: &PartiteHypergraph, k: usize) -> Result<Option<RainbowCycle>, HypergraphError> {
    check_length(h, k)?;
    let mut search = CycleSearch::new(h, k);
    for first in 0..h.edge_count() {
        search.push(first, None);
        if let Some(found) = search.extend(first + 1) {
            return Ok(Some(found));
        }
        search.pop(None);
    }
    Ok(None)
}

/// A rainbow `k`-cycle whose first edge is `anchor`, if any.
pub fn find_rainbow_cycle_through(
    h: &PartiteHypergraph,
    k: usize,
    anchor: usize,
) -> Result<Option<RainbowCycle>, HypergraphError> {
    check_length(h, k)?;
    let mut search = CycleSearch::new(h, k);
    search.push(anchor, None);
    Ok(search.extend(0))
}

/// Splits an even rainbow cycle into its odd- and even-position edges.
///
/// Each row of the representation matrix meets two consecutive cycle edges in
/// a shared symbol, so no row separates the split when the cycle visits every
/// part. The claim is re-checked row by row before returning.
pub fn cycle_to_violation(h: &PartiteHypergraph, cycle: &RainbowCycle) -> Result<ViolationWitness, HypergraphError> {
    cycle.validate(h)?;
    if cycle.k % 2 == 1 {
        return Err(HypergraphError::OddCycle(cycle.k));
    }
    let mut odd: Vec<usize> = cycle.edges.iter().step_by(2).copied().collect();
    let mut even: Vec<usize> = cycle.edges.iter().skip(1).step_by(2).copied().collect();
    odd.sort_unstable();
    even.sort_unstable();
    let mut parts = vec![odd, even];
    parts.sort_by_key(|p| p[0]);
    let matrix = h.to_matrix()?;
    for row in 0..matrix.rows() {
        if row_separates(&matrix, row, &parts).expect("cycle edges are valid disjoint columns") {
            return Err(HypergraphError::SeparatedSplit(row));
        }
    }
    Ok(ViolationWitness {
        parts,
        checked_rows: matrix.rows(),
    })
}

/// `H* = union of K_r(A)` over hyperedges `A`, with each graph edge labelled by
/// the hyperedges inducing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowGraph {
    parts: usize,
    hyperedges: usize,
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeMap<(Vertex, Vertex), Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShadowStats {
    pub vertices: usize,
    pub edges: usize,
    pub max_multiplicity: usize,
    pub edge_disjoint_cliques: usize,
    pub clique_size: usize,
}

impl ShadowGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.edges.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of hyperedges whose `K_r` shares no graph edge with another hyperedge's.
    pub fn edge_disjoint_cliques(&self) -> usize {
        let mut shared = vec![false; self.hyperedges];
        for owners in self.edges.values().filter(|o| o.len() > 1) {
            for &j in owners {
                shared[j] = true;
            }
        }
        shared.iter().filter(|&&s| !s).count()
    }

    pub fn stats(&self) -> ShadowStats {
        ShadowStats {
            vertices: self.vertex_count(),
            edges: self.edge_count(),
            max_multiplicity: self.max_multiplicity(),
            edge_disjoint_cliques: self.edge_disjoint_cliques(),
            clique_size: self.parts,
        }
    }
}

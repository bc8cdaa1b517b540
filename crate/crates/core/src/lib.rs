//! Separating hash families.
//!
//! An `N x n` matrix over `q` symbols is an `SHF(N; n, q, {w1, .., wt})` when
//! every choice of pairwise-disjoint column sets of sizes `w1, .., wt` has a
//! row on which the sets see pairwise disjoint symbol sets.
//!
//! - [`matrix`]: the matrix type and its text format
//! - [`verify`]: separation oracles and special-column extraction
//! - [`hypergraph`]: partite hypergraphs and rainbow cycles
//! - [`coverfree`]: cover-free families and `N(w)` bounds
//! - [`bounds`], [`pstar`]: upper and lower bounds on capacities
//! - [`search`]: exact capacities and constructions

pub mod bounds;
pub mod coverfree;
pub mod hypergraph;
pub mod matrix;
pub mod patterns;
pub mod pstar;
pub mod search;
pub mod separation;
pub mod verify;

pub use matrix::{parse_matrix, Matrix, MatrixError, Symbol};
pub use separation::{SeparationType, TypeError};
pub use verify::{find_violation, find_violation_parallel, is_shf, ViolationWitness};

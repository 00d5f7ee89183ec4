//! Reduced ordered binary decision diagrams.
//!
//! A [`Bdd`] manager owns a shared forest of nodes. Functions are referred to
//! by [`BddRef`] handles, which are plain indices into that forest: two handles
//! from the same manager are equal iff they denote the same Boolean function
//! under the manager's current variable order.
//!
//! The engine uses plain edges (no complement bits), a per-variable unique
//! table, a lossy direct-mapped operation cache, mark-and-sweep garbage
//! collection over caller-supplied roots, and in-place adjacent level swaps for
//! variable reordering (explicit orders and sifting).
//!
//! Handles are not reference counted. Any handle that is not passed as a root
//! to [`Bdd::gc`], [`Bdd::set_order`] or [`Bdd::sift_reorder`] may be reclaimed
//! by that call and must not be used afterwards.

mod cache;
mod cube;
mod manager;
mod ops;
mod reorder;

pub use cube::{Cube, Literal};
pub use manager::{Bdd, BddRef, BddStats, NodeView, VarId, DEFAULT_NODE_BUDGET};
pub use ops::BoolOp;

/// Errors reported by the BDD engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BddError {
    #[error("node budget exhausted ({budget} live nodes)")]
    NodeBudget { budget: usize },
    #[error("unknown variable {0}")]
    UnknownVar(u32),
    #[error("assignment does not cover variable {0}")]
    IncompleteAssignment(u32),
    #[error("cube contains both phases of variable {0}")]
    ConflictingCube(u32),
    #[error("invalid variable order: {0}")]
    InvalidOrder(String),
}

pub type Result<T> = std::result::Result<T, BddError>;

/// Stack headroom kept free before growing onto a fresh segment.
const RED_ZONE: usize = 64 * 1024;
/// Size of each additional stack segment for deep recursions.
const STACK_SEGMENT: usize = 4 * 1024 * 1024;

/// Runs `f` with enough stack for one more level of BDD recursion.
///
/// Diagrams over tens of thousands of variables recurse that deep, far past
/// the default thread stack.
#[inline]
pub fn with_stack<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(RED_ZONE, STACK_SEGMENT, f)
}

//! Attributed ordered trees, the maximal binary tree and its pre-shapes,
//! edge collapse, shape equivalence and sibling reorderings.

mod attribute;
mod maximal;
mod preshape;
mod shape;
mod topology;

pub use attribute::{Attribute, Layout, EPS_ZERO};
pub use maximal::{Embedder, MaximalTree, MAX_DEPTH};
pub use preshape::{collapse, equivalent, CollapsedTree, PreShape};
pub use shape::TreeShape;
pub use topology::{CombinatorialTree, Paren};


/// Default maximal-tree depth (15 edges including the root edge).
pub const DEFAULT_DEPTH: usize = 4;

/// Default landmarks per edge (first one pinned at the origin).
pub const DEFAULT_LANDMARKS: usize = 6;

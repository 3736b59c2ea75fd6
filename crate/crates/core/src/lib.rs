//! Shape spaces of attributed tree-like shapes.
//!
//! Shapes are ordered rooted trees whose edges carry landmark curves. The
//! crate provides the tree edit distance (TED) and the quotient Euclidean
//! distance (QED) on such shapes, explicit geodesics with a bounded number
//! of structural transitions, geodesic statistics, geometric probes and the
//! file formats used by the `treeshape` command line tool.

pub mod error;
pub mod tree_model;

pub use error::{Error, Result};
pub mod labels;
pub mod metric;
pub mod preshape_metrics;
pub mod qed;
pub mod ted;
pub mod unordered;
pub mod statistics;
pub mod geometry_checks;
pub mod io;

//! Graph construction from feature data with principal-axis trees, fused with
//! supervised penalty/intrinsic edges, and from-scratch SGC/GCN node classifiers.
//!
//! The pipeline is:
//!
//! ```text
//! FeatureMatrix --(bsp)--> PartitionTree --(graph)--> SparseAdjacency
//!     --(propagation)--> NormalizedAdjacency --(classifiers)--> predictions
//! ```
//!
//! [`data`] loads or generates datasets and splits, [`experiments`] runs the
//! evaluation protocols and writes CSV reports.

pub mod bsp;
pub mod classifiers;
pub mod data;
mod error;
pub mod experiments;
pub mod graph;
pub mod matrix;
pub mod propagation;
pub mod rng;
pub mod sparse;

pub use error::{Error, ErrorCategory, Result};
pub use matrix::FeatureMatrix;
pub use rng::RngState;
pub use sparse::{spmm, EdgeSet, SparseAdjacency};

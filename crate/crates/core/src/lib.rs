//! Dynamic spectral clustering for graphs that grow by edge insertions.
//!
//! The crate maintains, for an insertion-only stream of edges, a
//! cluster-preserving spectral sparsifier and a small contracted sketch of
//! the current graph. Queries are answered by spectral clustering on the
//! sketch while it is fresh, and by reclustering the sparsifier otherwise.
//!
//! Modules, bottom up:
//!
//! - [`graph`]: mutable weighted graphs, conductance and cut measures.
//! - [`spectral`]: normalized Laplacian, eigensolver, k-means and spectral
//!   clustering with eigen-gap selection of the cluster count.
//! - [`sparsifier`]: static and incrementally maintained edge sampling.
//! - [`contracted`]: the contracted sketch graph and its update rule.
//! - [`pipeline`]: the query/update state machine tying the above together.
//! - [`bench`]: synthetic stream generators, kNN ingestion and metrics.

pub mod bench;
pub mod contracted;
pub mod graph;
pub mod pipeline;
pub mod sparsifier;
pub mod spectral;

pub use graph::{DynamicGraph, GraphError, Partition, VertexId, VertexSet};

//! Synthetic workloads and evaluation metrics.
//!
//! Two stochastic block model streams (one that gains a planted cluster per
//! batch, one that merges a pair of small clusters per batch), ingestion of
//! precomputed kNN edge lists, and the metrics used to score clusterings.

mod knn;
mod metrics;
mod sbm;

use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};
use crate::spectral::SpectralError;

pub use knn::{ingest_knn_stream, knn_edges, KnnSchedule, KnnStream, KNN_BRUTEFORCE_MAX};
pub use metrics::{ari, gap_report, max_phi};
pub use sbm::{gen_sbm_decreasing, gen_sbm_increasing, SbmDecreasingParams, SbmIncreasingParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("batch {batch} needs a fresh pair of small clusters but none is left")]
    PairsExhausted { batch: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("labelings have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("{0} held-out edges cannot be reached from the initial vertices")]
    Unreachable(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// An initial graph, batches of unit-weight insertions, and the planted
/// labels at every batch boundary.
///
/// `truth[b]` labels the vertices present after `b` batches, so
/// `truth.len() == batches.len() + 1`. Every insertion has at most one
/// endpoint that is new, and new vertices appear in increasing id order.
#[derive(Clone, Debug)]
pub struct LabeledStream {
    pub initial: DynamicGraph,
    pub batches: Vec<Vec<(VertexId, VertexId)>>,
    pub truth: Vec<Vec<usize>>,
}

impl LabeledStream {
    pub fn num_insertions(&self) -> usize {
        self.batches.iter().map(Vec::len).sum()
    }

    /// The graph after the first `b` batches.
    pub fn graph_after(&self, b: usize) -> DynamicGraph {
        let mut g = self.initial.clone();
        for batch in &self.batches[..b] {
            for &(u, v) in batch {
                g.ensure_vertex(u.max(v));
                g.add_edge(u, v, 1.0).expect("generated edges are valid");
            }
        }
        g
    }
}

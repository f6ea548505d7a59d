//! Spectral machinery: the normalized Laplacian as an implicit operator, a
//! smallest-eigenpair solver, the vertex embedding, k-means and the
//! composed spectral clustering routine with eigen-gap selection.

mod clustering;
mod eigen;
mod kmeans;
mod laplacian;

pub use clustering::{
    eigen_gap_from_values, eigen_gap_select, embed, spectral_clustering, spectral_clustering_tol, Embedding, EPS_FLOOR,
};
pub use eigen::{smallest_eigenpairs, smallest_eigenpairs_with, EigenPairs, SolverConfig};
pub use kmeans::{kmeans, KMeansResult};
pub use laplacian::{build_laplacian, LaplacianOperator};

use thiserror::Error;

use crate::graph::{GraphError, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("vertex {0} has zero degree")]
    IsolatedVertex(VertexId),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigensolver did not converge after {matvecs} operator applications (best residual {best_residual:e})")]
    NoConvergence { matvecs: usize, best_residual: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

//! Score community-detection algorithms by how well a text classifier trained
//! on their communities can recover community membership from messages.
//!
//! The crate is organised along the pipeline:
//!
//! - [`graph`]: interaction graph construction, degree filtering, eigenvector
//!   centrality and the anchor/tested split.
//! - [`cda`]: Louvain (multi-scale modularity), BEC (edge F-score
//!   agglomeration) and Infomap (map equation), plus partition utilities.
//! - [`nlp`]: message embeddings and the weighted four-classifier ensemble.
//! - [`eval`]: balanced datasets, agreement metrics, dendrogram sweeps and the
//!   synthetic planted-partition benchmark.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the precision used by the command-line pipeline.

pub mod cda;
pub mod eval;
pub mod graph;
pub mod io;
pub mod nlp;
pub mod scalar;

pub use scalar::Scalar;

pub type Graph = graph::Graph<f64>;
pub type Graph32 = graph::Graph<f32>;
pub type CentralityScores = graph::CentralityScores<f64>;
pub type MapEquationTerms = cda::MapEquationTerms<f64>;
pub type EdgeFScore = cda::EdgeFScore<f64>;
pub type Ensemble = nlp::Ensemble<f32>;
pub type Ensemble64 = nlp::Ensemble<f64>;

/// Crate-level error: one variant per subsystem.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Cda(#[from] cda::CdaError),
    #[error(transparent)]
    Nlp(#[from] nlp::NlpError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

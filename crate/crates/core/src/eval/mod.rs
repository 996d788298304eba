//! Balanced datasets, agreement metrics, dendrogram sweeps, the synthetic
//! benchmark and the end-to-end evaluation of one partition.

mod datasets;
mod dendrogram;
mod metrics;
mod pipeline;
mod synth;

pub use datasets::{anchor_message_counts, build_datasets, BalancedDatasets, DatasetAudit, TestItem, TrainItem};
pub use dendrogram::{dendrogram_sweep, CategoryNode, Dendrogram, Level, TreeNode};
pub use metrics::{
    agreement_precision, binned_agreement, coverage, entropy_curve, f_beta, misassigned_intersection, user_entropy,
    Agreement, Bin, EntropyPoint, Misassignment, UserEntropy, UserOutcome, TWEET_BINS,
};
pub use pipeline::{evaluate_partition, EvaluationReport, EvaluationRun, PipelineConfig, PredictionRecord};
pub use synth::{generate_synthetic, SynthConfig, Synthetic};

use crate::cda::CdaError;
use crate::graph::GraphError;
use crate::nlp::NlpError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("category {category} has {available} anchor messages but {required} are required")]
    Shortfall { category: u32, available: usize, required: usize },
    #[error("user {0:?} is neither in the graph nor flagged external")]
    UnknownUser(String),
    #[error("tracked user {0:?} is not in the graph")]
    UnknownTrackedUser(String),
    #[error("category {0} has no test messages")]
    NoTestMessages(u32),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("the two result sets share no users")]
    DisjointUniverses,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cda(#[from] CdaError),
    #[error(transparent)]
    Nlp(#[from] NlpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Message embeddings and the four-classifier weighted ensemble that maps
//! each message to a community category.

mod corpus;
mod embed;
mod ensemble;
mod forest;
mod linear;
mod mlp;
mod store;

pub use corpus::{Corpus, Message};
pub use embed::{hash_embed, tokenize, Embedder, HashEmbedder};
pub use ensemble::{
    aggregate_user_votes, classify_user, ensemble_predict, train_ensemble, weighted_vote, ClassifierKind, Ensemble,
    EnsembleConfig, Vote, VoteWeights,
};
pub use forest::{ForestConfig, RandomForest};
pub use linear::{train_sgd, train_svm, LinearModel, SgdConfig, SvmConfig};
pub use mlp::{Mlp, MlpConfig};
pub use store::{load_embeddings, write_embeddings, EmbeddingStore};

#[derive(Debug, thiserror::Error)]
pub enum NlpError {
    #[error("embedding file does not start with the EMB1 magic")]
    BadMagic,
    #[error("embedding header: {0}")]
    BadHeader(String),
    #[error("embedding payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("embedding payload has {0} unexpected trailing bytes")]
    TrailingBytes(u64),
    #[error("duplicate message id {0:?}")]
    DuplicateId(String),
    #[error("row {row} contains a non-finite value")]
    NonFinite { row: usize },
    #[error("id sidecar lists {ids} ids for {rows} rows")]
    IdCountMismatch { rows: usize, ids: usize },
    #[error("no embedding for message {0:?}")]
    MissingEmbedding(String),
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("training data contains a single category")]
    SingleCategory,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid vote weights {0:?}: need four positive integers summing to 7")]
    InvalidWeights(Vec<u32>),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model bundle: {0}")]
    Bundle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

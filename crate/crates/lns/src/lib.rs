//! Large neighborhood search for the pickup-and-delivery problem with
//! transfers: related removal with a Mahalanobis dissimilarity, blinking
//! cheapest insertion in insertion-difficulty order and late acceptance.
//! The LS and MULTI-OP baselines share the same loop.

pub mod alns;
pub mod config;
pub mod features;
pub mod lahc;
pub mod ordering;
pub mod removal;
pub mod repair;
pub mod search;

pub use alns::OperatorBank;
pub use config::{Method, SearchConfig};
pub use features::{
    covariance, feature_rows, request_features, shaw_dissimilarity, Dissimilarity, Mahalanobis, ShawWeights,
};
pub use lahc::LateAcceptance;
pub use ordering::{insertion_difficulty, insertion_ease, InsertionOrder, Orderings};
pub use removal::{random_removal, related_removal, removal_gain, worst_removal};
pub use repair::repair;
pub use search::{initial_solution, run_restart, run_search, IterationRecord, RestartOutcome, SearchContext, SearchReport};

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("no feasible initial solution")]
    NoInitialSolution,
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot parse search configuration: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

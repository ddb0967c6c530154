//! End-to-end runs: encode records as images, train, evaluate, transfer.

mod config;
mod encode;
mod metrics;
mod runner;
mod synthetic;

use thiserror::Error;

pub use config::{ExperimentConfig, Freeze, InputConfig, Metric, PairEncoding, TransferConfig};
pub use encode::{encode_dataset, encode_example, record_id, EmptyPolicy, EncodedDataset};
pub use metrics::{
    accuracy, f1_binary, group_ranks, mrr, mse_labels, GroupDiagnostics, MetricsReport, F1_THRESHOLD, POSITIVE,
};
pub use runner::{
    evaluate, evaluate_images, image_tensor, train_experiment, train_images, transfer_finetune, RunOutcome, RunSummary,
    TransferOutcome,
};
pub use synthetic::{synthetic_corpus, train_test_split, SyntheticCorpus, SyntheticCorpusConfig};

use crate::corpus::CorpusError;
use crate::nn::NnError;
use crate::transform::TransformError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("record {record} produced an empty image (no word found in the embeddings)")]
    EmptyImage { record: String },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

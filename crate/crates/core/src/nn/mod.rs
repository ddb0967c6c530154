//! Dense-tensor CNN engine: layers, exact backpropagation, optimizers,
//! gradient checking, training loop and checkpoints.

mod checkpoint;
mod fit;
mod gradcheck;
mod layers;
mod model;
mod optim;
mod scalar;
mod tensor;

use thiserror::Error;

pub use checkpoint::{Checkpoint, CheckpointMeta, FORMAT_VERSION, MAGIC};
pub use fit::{accuracy, fit, predict, EpochRecord, FitOutcome, TrainConfig, Validation, DIVERGENCE_FACTOR};
pub use gradcheck::{grad_check, GradCheckConfig, GradCheckReport, LayerCheck};
pub use layers::{conv2d_forward, dense_forward, maxpool_forward};
pub use model::{ArchitectureConfig, BackwardPass, CnnModel, Gradients, LayerSpec, Mode, Params, Shape3, INIT_STD};
pub use optim::{sgd_update, AdamMoments, Optimizer, OptimizerConfig};
pub use scalar::Scalar;
pub use tensor::Tensor4;

/// Random generator used for initialization, shuffling and dropout masks.
pub type EngineRng = rand_chacha::ChaCha8Rng;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("training diverged: {0}")]
    Divergence(String),
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &std::path::Path) -> Result<(), NnError> {
    checkpoint.save(path)
}

pub fn load_checkpoint(path: &std::path::Path) -> Result<Checkpoint, NnError> {
    Checkpoint::load(path)
}

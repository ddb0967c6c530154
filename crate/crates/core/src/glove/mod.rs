//! Miniature GloVe and the per-word comparison between its optimized cost
//! and the LLE reconstruction cost.

mod bound;
mod cooccur;
mod lab;
mod train;

use thiserror::Error;

pub use bound::{
    check_bound, constrained_recon_cost, glove_word_cost, lle_recon_cost, BoundReport, BoundSummary, WordBound,
    WordCost, BOUND_TOL, EXCLUSION_EPS, MIN_SCALE,
};
pub use cooccur::{count_cooccurrence, CooccurrenceMatrix};
pub use lab::{run_bound_lab, word_name, zipf_corpus, BoundLabConfig, BoundLabOutcome, ZipfCorpusConfig};
pub use train::{glove_gradient, glove_loss, glove_weight, train_glove, GloveConfig, GloveParams, GloveTraining};

#[derive(Debug, Error)]
pub enum GloveError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("word {word} has no co-occurring words")]
    EmptyNeighborhood { word: usize },
    #[error("word {word}: scale {value:e} is too small to divide by")]
    DegenerateScale { word: usize, value: f64 },
    #[error(
        "loss {loss:e} at epoch {epoch} exceeds ten times the initial {initial:e}; try a learning rate below {lr}"
    )]
    Divergence {
        epoch: usize,
        loss: f64,
        initial: f64,
        lr: f64,
    },
}

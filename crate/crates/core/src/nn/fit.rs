//! Mini-batch training loop and batched inference.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CnnModel, EngineRng, Mode, NnError, Optimizer, OptimizerConfig, Scalar, Tensor4};

/// Inference batch size; inference holds no gradients, so it can be larger
/// than the training batch.
const EVAL_BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            batch_size: 32,
            epochs: 10,
            seed: 0,
        }
    }
}

/// Held-out data used to pick the best epoch.
#[derive(Debug, Clone, Copy)]
pub struct Validation<'a, T> {
    pub x: &'a Tensor4<T>,
    pub labels: &'a [usize],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean training loss over the epoch's examples.
    pub loss: f64,
    /// Accuracy of the training-mode predictions made during the epoch.
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitOutcome<T> {
    /// Best-on-validation model when validation data was given, otherwise
    /// the model after the last epoch.
    pub model: CnnModel<T>,
    pub history: Vec<EpochRecord>,
    /// Loss of every optimizer step, in order.
    pub step_losses: Vec<f64>,
    pub best_epoch: Option<usize>,
}

/// Epoch loss growth over the first step's loss that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

/// Trains `model` with shuffled mini-batches. Shuffling and dropout masks
/// both come from one generator seeded with `cfg.seed`, so a run is fully
/// determined by its inputs.
pub fn fit<T: Scalar>(
    mut model: CnnModel<T>,
    x: &Tensor4<T>,
    labels: &[usize],
    cfg: &TrainConfig,
    validation: Option<Validation<'_, T>>,
) -> Result<FitOutcome<T>, NnError> {
    if cfg.batch_size == 0 {
        return Err(NnError::Config("batch size must be positive".into()));
    }
    if x.batch() == 0 || x.batch() != labels.len() {
        return Err(NnError::Shape(format!(
            "{} training examples with {} labels",
            x.batch(),
            labels.len()
        )));
    }
    let mut rng = EngineRng::seed_from_u64(cfg.seed);
    let mut optimizer = Optimizer::new(cfg.optimizer);
    let mut order: Vec<usize> = (0..x.batch()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut step_losses = Vec::new();
    let mut best: Option<(f64, usize, CnnModel<T>)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let bx = x.gather(chunk);
            let by: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let pass = model.loss_and_backward(&bx, &by, Mode::Train(&mut rng))?;
            if !pass.loss.is_finite() {
                return Err(NnError::Divergence(format!(
                    "non-finite loss at epoch {epoch}; try a smaller learning rate"
                )));
            }
            optimizer.step(&mut model, &pass.gradients);
            loss_sum += pass.loss * chunk.len() as f64;
            correct += count_correct(&pass.probabilities, &by);
            step_losses.push(pass.loss);
        }
        let n = x.batch() as f64;
        let initial = step_losses[0];
        if loss_sum / n > DIVERGENCE_FACTOR * initial {
            return Err(NnError::Divergence(format!(
                "mean loss {:.4e} at epoch {epoch} exceeds {DIVERGENCE_FACTOR} times the initial {initial:.4e}; \
                 try a learning rate below {}",
                loss_sum / n,
                cfg.optimizer.lr()
            )));
        }
        let validation_accuracy = match validation {
            Some(v) => Some(accuracy(&predict(&model, v.x)?, v.labels)),
            None => None,
        };
        history.push(EpochRecord {
            epoch,
            loss: loss_sum / n,
            train_accuracy: correct as f64 / n,
            validation_accuracy,
        });
        if let Some(acc) = validation_accuracy {
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, epoch, model.clone()));
            }
        }
    }
    let (model, best_epoch) = match best {
        Some((_, epoch, m)) => (m, Some(epoch)),
        None => (model, None),
    };
    Ok(FitOutcome {
        model,
        history,
        step_losses,
        best_epoch,
    })
}

/// Eval-mode class probabilities for every item of `x`, in order.
pub fn predict<T: Scalar>(model: &CnnModel<T>, x: &Tensor4<T>) -> Result<Tensor4<T>, NnError> {
    let n = x.batch();
    let starts: Vec<usize> = (0..n).step_by(EVAL_BATCH).collect();
    let parts = starts
        .par_iter()
        .map(|&s| model.forward(&x.slice_batch(s, (s + EVAL_BATCH).min(n)), Mode::Eval))
        .collect::<Result<Vec<_>, _>>()?;
    let classes = model.num_classes();
    let data: Vec<T> = parts.into_iter().flat_map(Tensor4::into_vec).collect();
    Tensor4::from_vec([n, classes, 1, 1], data)
}

fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

fn count_correct<T: Scalar>(probs: &Tensor4<T>, labels: &[usize]) -> usize {
    let c = probs.item_len();
    probs
        .data()
        .chunks(c)
        .zip(labels)
        .filter(|(row, &l)| argmax(row) == l)
        .count()
}

/// Fraction of rows whose highest probability is at the label.
pub fn accuracy<T: Scalar>(probs: &Tensor4<T>, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    count_correct(probs, labels) as f64 / labels.len() as f64
}

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CooccurrenceMatrix, GloveError};

/// Loss growth over the initial value that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GloveConfig {
    pub dim: usize,
    pub epochs: usize,
    pub lr: f64,
    pub x_max: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for GloveConfig {
    fn default() -> Self {
        Self {
            dim: 10,
            epochs: 100,
            lr: 0.01,
            x_max: 10.0,
            alpha: 0.75,
            seed: 0,
        }
    }
}

/// One vector and one bias per word; `b_ij = b_i + b_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GloveParams {
    pub dim: usize,
    pub x_max: f64,
    pub alpha: f64,
    /// Row-major `V x dim`.
    pub vectors: Vec<f64>,
    pub biases: Vec<f64>,
}

impl GloveParams {
    /// Small uniform vectors in `(-0.5/dim, 0.5/dim)` and zero biases.
    pub fn init(vocab: usize, cfg: &GloveConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let scale = 1.0 / cfg.dim as f64;
        Self {
            dim: cfg.dim,
            x_max: cfg.x_max,
            alpha: cfg.alpha,
            vectors: (0..vocab * cfg.dim)
                .map(|_| (rng.random::<f64>() - 0.5) * scale)
                .collect(),
            biases: vec![0.0; vocab],
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.biases.len()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// `x_ij = x_i . x_j`
    pub fn inner(&self, i: usize, j: usize) -> f64 {
        self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum()
    }

    pub fn bias_pair(&self, i: usize, j: usize) -> f64 {
        self.biases[i] + self.biases[j]
    }

    fn zeros_like(&self) -> Self {
        Self {
            vectors: vec![0.0; self.vectors.len()],
            biases: vec![0.0; self.biases.len()],
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GloveTraining {
    pub params: GloveParams,
    /// Full loss before training, then after every epoch.
    pub loss_history: Vec<f64>,
}

impl GloveTraining {
    pub fn initial_loss(&self) -> f64 {
        self.loss_history[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_history.last().unwrap()
    }

    /// `1 - final/initial`.
    pub fn loss_reduction(&self) -> f64 {
        1.0 - self.final_loss() / self.initial_loss()
    }
}

/// `(X/x_max)^alpha` below `x_max`, 1 from there on.
pub fn glove_weight(x: f64, x_max: f64, alpha: f64) -> f64 {
    if x < x_max {
        (x / x_max).powf(alpha)
    } else {
        1.0
    }
}

fn residual(p: &GloveParams, i: usize, j: usize, x: f64) -> f64 {
    p.inner(i, j) + p.bias_pair(i, j) - x.ln()
}

/// `J = sum over nonzero X_ij of f(X_ij) (x_i.x_j + b_i + b_j - log X_ij)^2`
pub fn glove_loss(p: &GloveParams, counts: &CooccurrenceMatrix) -> f64 {
    counts
        .nonzero()
        .into_iter()
        .map(|(i, j, x)| glove_weight(x, p.x_max, p.alpha) * residual(p, i, j, x).powi(2))
        .sum()
}

/// Gradient of [`glove_loss`] with respect to every vector entry and bias.
pub fn glove_gradient(p: &GloveParams, counts: &CooccurrenceMatrix) -> GloveParams {
    let mut g = p.zeros_like();
    let d = p.dim;
    for (i, j, x) in counts.nonzero() {
        let s = 2.0 * glove_weight(x, p.x_max, p.alpha) * residual(p, i, j, x);
        for k in 0..d {
            g.vectors[i * d + k] += s * p.vectors[j * d + k];
            g.vectors[j * d + k] += s * p.vectors[i * d + k];
        }
        g.biases[i] += s;
        g.biases[j] += s;
    }
    g
}

/// Plain SGD over the nonzero pairs, visited in a freshly shuffled order
/// every epoch.
pub fn train_glove(counts: &CooccurrenceMatrix, cfg: &GloveConfig) -> Result<GloveTraining, GloveError> {
    let v = counts.vocab_size();
    if v < 2 {
        return Err(GloveError::Input("vocabulary needs at least two words".into()));
    }
    if cfg.dim == 0 {
        return Err(GloveError::Input("vector dimension must be positive".into()));
    }
    let mut pairs = counts.nonzero();
    if pairs.is_empty() {
        return Err(GloveError::Input("co-occurrence matrix has no nonzero entries".into()));
    }
    let mut params = GloveParams::init(v, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    let initial = glove_loss(&params, counts);
    let mut history = vec![initial];
    let d = cfg.dim;
    for epoch in 1..=cfg.epochs {
        pairs.shuffle(&mut rng);
        for &(i, j, x) in &pairs {
            let s = cfg.lr * 2.0 * glove_weight(x, cfg.x_max, cfg.alpha) * residual(&params, i, j, x);
            for k in 0..d {
                let xi = params.vectors[i * d + k];
                let xj = params.vectors[j * d + k];
                params.vectors[i * d + k] = xi - s * xj;
                params.vectors[j * d + k] = xj - s * xi;
            }
            params.biases[i] -= s;
            params.biases[j] -= s;
        }
        let loss = glove_loss(&params, counts);
        if !loss.is_finite() || loss > DIVERGENCE_FACTOR * initial {
            return Err(GloveError::Divergence {
                epoch,
                loss,
                initial,
                lr: cfg.lr,
            });
        }
        history.push(loss);
    }
    Ok(GloveTraining {
        params,
        loss_history: history,
    })
}

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::GloveError;
use crate::corpus::TokenSequence;

/// Directed co-occurrence counts over a vocabulary in first-seen order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub vocab: Vec<String>,
    pub window: usize,
    /// Row-major `V x V`.
    counts: Vec<f64>,
}

impl CooccurrenceMatrix {
    /// Builds a matrix from explicit counts. The diagonal must be zero.
    pub fn from_counts(vocab: Vec<String>, window: usize, counts: Vec<f64>) -> Result<Self, GloveError> {
        let v = vocab.len();
        if counts.len() != v * v {
            return Err(GloveError::Input(format!(
                "{} counts for a vocabulary of {v}",
                counts.len()
            )));
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(GloveError::Input("counts must be finite and nonnegative".into()));
        }
        if (0..v).any(|i| counts[i * v + i] != 0.0) {
            return Err(GloveError::Input("diagonal counts must be zero".into()));
        }
        Ok(Self { vocab, window, counts })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.counts[i * self.vocab.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let v = self.vocab.len();
        &self.counts[i * v..(i + 1) * v]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.vocab.iter().position(|w| w == word)
    }

    /// Nonzero entries as `(i, j, X_ij)`, row-major.
    pub fn nonzero(&self) -> Vec<(usize, usize, f64)> {
        let v = self.vocab.len();
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(k, &c)| (k / v, k % v, c))
            .collect()
    }
}

/// For every position, adds one to `X[center][neighbor]` for each neighbor
/// within distance `window` in the same document. Pairs of identical tokens
/// are not counted, so the diagonal stays zero.
pub fn count_cooccurrence(corpus: &[TokenSequence], window: usize) -> Result<CooccurrenceMatrix, GloveError> {
    if window == 0 {
        return Err(GloveError::Input("window must be at least 1".into()));
    }
    let mut vocab = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let ids: Vec<Vec<usize>> = corpus
        .iter()
        .map(|doc| {
            doc.tokens
                .iter()
                .map(|t| {
                    *index.entry(t.as_str()).or_insert_with(|| {
                        vocab.push(t.clone());
                        vocab.len() - 1
                    })
                })
                .collect()
        })
        .collect();
    let v = vocab.len();
    let mut counts = vec![0.0; v * v];
    for doc in &ids {
        for (p, &center) in doc.iter().enumerate() {
            let lo = p.saturating_sub(window);
            let hi = (p + window).min(doc.len() - 1);
            for (q, &other) in doc.iter().enumerate().take(hi + 1).skip(lo) {
                if q != p && other != center {
                    counts[center * v + other] += 1.0;
                }
            }
        }
    }
    Ok(CooccurrenceMatrix { vocab, window, counts })
}

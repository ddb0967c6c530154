use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_bound, count_cooccurrence, train_glove, BoundReport, GloveConfig, GloveError};
use crate::corpus::TokenSequence;

/// Zipf-distributed unigrams with a few planted word pairs that tend to
/// follow each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZipfCorpusConfig {
    pub vocab: usize,
    pub tokens: usize,
    pub exponent: f64,
    pub planted_pairs: usize,
    /// Chance that a planted word is immediately followed by its partner.
    pub planted_prob: f64,
    pub seed: u64,
}

impl Default for ZipfCorpusConfig {
    fn default() -> Self {
        Self {
            vocab: 50,
            tokens: 100_000,
            exponent: 1.0,
            planted_pairs: 5,
            planted_prob: 0.5,
            seed: 7,
        }
    }
}

pub fn word_name(rank: usize) -> String {
    format!("w{rank:03}")
}

/// One document of `cfg.tokens` words named by frequency rank.
pub fn zipf_corpus(cfg: &ZipfCorpusConfig) -> Result<TokenSequence, GloveError> {
    if cfg.vocab < 2 || 2 * cfg.planted_pairs > cfg.vocab {
        return Err(GloveError::Input(format!(
            "vocabulary of {} cannot hold {} planted pairs",
            cfg.vocab, cfg.planted_pairs
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights: Vec<f64> = (1..=cfg.vocab).map(|r| (r as f64).powf(-cfg.exponent)).collect();
    let unigram = WeightedIndex::new(&weights).map_err(|e| GloveError::Input(e.to_string()))?;
    let mut ranks: Vec<usize> = (0..cfg.vocab).collect();
    ranks.shuffle(&mut rng);
    let mut partner = vec![None; cfg.vocab];
    for pair in ranks.chunks(2).take(cfg.planted_pairs) {
        partner[pair[0]] = Some(pair[1]);
        partner[pair[1]] = Some(pair[0]);
    }
    let mut ids = Vec::with_capacity(cfg.tokens);
    while ids.len() < cfg.tokens {
        let w = unigram.sample(&mut rng);
        ids.push(w);
        if let Some(p) = partner[w] {
            if ids.len() < cfg.tokens && rng.random::<f64>() < cfg.planted_prob {
                ids.push(p);
            }
        }
    }
    Ok(TokenSequence::new("zipf", ids.into_iter().map(word_name).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundLabConfig {
    pub corpus: ZipfCorpusConfig,
    pub window: usize,
    pub glove: GloveConfig,
}

impl Default for BoundLabConfig {
    fn default() -> Self {
        Self {
            corpus: ZipfCorpusConfig::default(),
            window: 5,
            glove: GloveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundLabOutcome {
    pub config: BoundLabConfig,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub loss_reduction: f64,
    pub loss_history: Vec<f64>,
    pub report: BoundReport,
}

/// Corpus, counts, miniature GloVe and the per-word bound check in one go.
pub fn run_bound_lab(cfg: &BoundLabConfig) -> Result<BoundLabOutcome, GloveError> {
    let corpus = zipf_corpus(&cfg.corpus)?;
    let counts = count_cooccurrence(std::slice::from_ref(&corpus), cfg.window)?;
    let trained = train_glove(&counts, &cfg.glove)?;
    let report = check_bound(&trained.params, &counts);
    Ok(BoundLabOutcome {
        config: *cfg,
        initial_loss: trained.initial_loss(),
        final_loss: trained.final_loss(),
        loss_reduction: trained.loss_reduction(),
        loss_history: trained.loss_history,
        report,
    })
}

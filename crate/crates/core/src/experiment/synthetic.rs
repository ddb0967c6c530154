//! Seeded two-class corpus that a D2I classifier can separate.
//!
//! D2I images only see inner products between words of one document, so two
//! classes whose keywords differ merely by identity would produce images with
//! the same statistics. Class 0 keywords are therefore drawn around a shared
//! direction (pairwise inner products near `cluster_similarity`), while class
//! 1 keywords are independent random directions of the same norm.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingTable, PairDataset, PairRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCorpusConfig {
    pub documents: usize,
    pub dim: usize,
    pub keywords_per_class: usize,
    pub fillers: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Share of positions holding a class keyword.
    pub keyword_rate: f64,
    /// Share of positions holding a word missing from the embeddings.
    pub unk_rate: f64,
    pub cluster_similarity: f64,
    /// Documents per group id.
    pub group_size: usize,
    pub seed: u64,
}

impl Default for SyntheticCorpusConfig {
    fn default() -> Self {
        Self {
            documents: 2000,
            dim: 50,
            keywords_per_class: 20,
            fillers: 300,
            min_len: 20,
            max_len: 60,
            keyword_rate: 0.3,
            unk_rate: 0.05,
            cluster_similarity: 0.8,
            group_size: 10,
            seed: 17,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub table: EmbeddingTable,
    pub dataset: PairDataset,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, std: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z * std
        })
        .collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn to_f32(v: Vec<f64>) -> Vec<f32> {
    v.into_iter().map(|x| x as f32).collect()
}

pub fn synthetic_corpus(cfg: &SyntheticCorpusConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.dim;
    let mut entries: Vec<(String, Vec<f32>)> = Vec::new();

    let center = unit(gaussian(&mut rng, d, 1.0));
    let (a, b) = (cfg.cluster_similarity.sqrt(), (1.0 - cfg.cluster_similarity).sqrt());
    for j in 0..cfg.keywords_per_class {
        let noise = unit(gaussian(&mut rng, d, 1.0));
        let v = center.iter().zip(&noise).map(|(c, n)| a * c + b * n).collect();
        entries.push((format!("alpha{j}"), to_f32(unit(v))));
    }
    for j in 0..cfg.keywords_per_class {
        entries.push((format!("beta{j}"), to_f32(unit(gaussian(&mut rng, d, 1.0)))));
    }
    let filler_std = 1.0 / (d as f64).sqrt();
    for j in 0..cfg.fillers {
        entries.push((format!("filler{j}"), to_f32(gaussian(&mut rng, d, filler_std))));
    }
    let table = EmbeddingTable::from_entries(d, entries).expect("generated vectors are consistent");

    let mut records = Vec::with_capacity(cfg.documents);
    for i in 0..cfg.documents {
        let label = i % 2;
        let prefix = if label == 0 { "alpha" } else { "beta" };
        let len = rng.random_range(cfg.min_len..=cfg.max_len);
        let words: Vec<String> = (0..len)
            .map(|_| {
                let u: f64 = rng.random();
                if u < cfg.keyword_rate {
                    format!("{prefix}{}", rng.random_range(0..cfg.keywords_per_class))
                } else if u < cfg.keyword_rate + cfg.unk_rate {
                    format!("unk{}", rng.random_range(0..50))
                } else {
                    format!("filler{}", rng.random_range(0..cfg.fillers))
                }
            })
            .collect();
        records.push(PairRecord {
            group_id: format!("g{}", i / cfg.group_size.max(1)),
            label,
            text_a: words.join(" "),
            text_b: None,
        });
    }
    SyntheticCorpus {
        table,
        dataset: PairDataset { records },
    }
}

/// Seeded shuffle-and-split; the first part holds `1 - test_fraction` of the
/// records.
pub fn train_test_split(ds: &PairDataset, test_fraction: f64, seed: u64) -> (PairDataset, PairDataset) {
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((ds.len() as f64) * test_fraction).round() as usize;
    let pick = |ids: &[usize]| PairDataset {
        records: ids.iter().map(|&i| ds.records[i].clone()).collect(),
    };
    (pick(&idx[n_test..]), pick(&idx[..n_test]))
}

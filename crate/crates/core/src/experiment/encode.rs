use rayon::prelude::*;

use super::{ExperimentConfig, ExperimentError, PairEncoding};
use crate::corpus::{tokenize_with_id, EmbeddingTable, PairDataset, PairRecord};
use crate::nn::Tensor4;
use crate::transform::{d2i, resize, D2IConfig, D2IImage};

/// What to do with records whose image is empty (every word unknown).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmptyPolicy {
    /// Leave them out; training cannot learn from a blank image.
    Skip,
    /// Feed an all-zero image so every record receives a prediction.
    ZeroImage,
}

/// Turns one record into its D2I image (not yet resized).
pub fn encode_example(
    record: &PairRecord,
    record_id: &str,
    table: &EmbeddingTable,
    cfg: &D2IConfig,
    encoding: PairEncoding,
) -> Result<D2IImage, ExperimentError> {
    let mut seq = tokenize_with_id(&record.text_a, record_id);
    if let (PairEncoding::Concat, Some(b)) = (encoding, &record.text_b) {
        seq = seq.concat(&tokenize_with_id(b, record_id));
    }
    let empty = || ExperimentError::EmptyImage {
        record: record_id.to_string(),
    };
    if seq.is_empty() {
        return Err(empty());
    }
    d2i(&seq, table, cfg)?.ok_or_else(empty)
}

/// Network-ready tensors for a dataset.
#[derive(Debug, Clone)]
pub struct EncodedDataset {
    pub x: Tensor4<f32>,
    pub labels: Vec<usize>,
    pub groups: Vec<String>,
    /// Index into the source dataset of every encoded row.
    pub record_index: Vec<usize>,
    /// Records whose image was empty.
    pub empty_records: Vec<usize>,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn record_id(index: usize, record: &PairRecord) -> String {
    format!("{}#{index}", record.group_id)
}

/// Encodes and resizes every record in parallel; row order follows the
/// dataset.
pub fn encode_dataset(
    ds: &PairDataset,
    table: &EmbeddingTable,
    cfg: &ExperimentConfig,
    policy: EmptyPolicy,
) -> Result<EncodedDataset, ExperimentError> {
    let (h, w) = (cfg.input.height, cfg.input.width);
    let images: Vec<Result<Option<Vec<f32>>, ExperimentError>> = ds
        .records
        .par_iter()
        .enumerate()
        .map(
            |(i, r)| match encode_example(r, &record_id(i, r), table, &cfg.d2i, cfg.pair_encoding) {
                Ok(img) => Ok(Some(resize(&img, h, w, cfg.input.resize)?.data)),
                Err(ExperimentError::EmptyImage { .. }) => Ok(None),
                Err(e) => Err(e),
            },
        )
        .collect();
    let mut out = EncodedDataset {
        x: Tensor4::zeros([0, 1, h, w]),
        labels: Vec::new(),
        groups: Vec::new(),
        record_index: Vec::new(),
        empty_records: Vec::new(),
    };
    let mut data = Vec::with_capacity(ds.len() * h * w);
    for (i, img) in images.into_iter().enumerate() {
        let pixels = match img? {
            Some(p) => p,
            None => {
                out.empty_records.push(i);
                match policy {
                    EmptyPolicy::Skip => continue,
                    EmptyPolicy::ZeroImage => vec![0.0; h * w],
                }
            }
        };
        data.extend_from_slice(&pixels);
        let r = &ds.records[i];
        out.labels.push(r.label);
        out.groups.push(r.group_id.clone());
        out.record_index.push(i);
    }
    out.x = Tensor4::from_vec([out.labels.len(), 1, h, w], data)?;
    Ok(out)
}

//! Document-to-image (D2I) transform: a banded self-attention matrix of
//! word-embedding inner products, one row per word and `2k` neighbor columns.

mod attention;
mod banded;
mod edge;
mod pgm;
mod resize;

use serde::{Deserialize, Serialize};

pub use attention::{self_attention_full, AttentionMatrix};
pub use banded::{d2i, d2i_batch, offset_of_column};
pub use edge::{edge_response, EdgeReport};
pub use pgm::{export_pgm, pgm_bytes};
pub use resize::{resize, resize_matrix, ResizeMethod};

/// Default half-window used for the text benchmarks.
pub const DEFAULT_K: usize = 25;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("document has no tokens")]
    EmptyInput,
    #[error("half-window k must be at least 1")]
    InvalidWindow,
    #[error("invalid target size {0}x{1}")]
    InvalidSize(usize, usize),
    #[error("image has no pixels")]
    EmptyImage,
    #[error("{0}")]
    Precondition(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Out-of-range neighbors contribute the zero vector.
    #[default]
    ZeroPad,
    /// Neighbors wrap around the ends of the document.
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Raw inner products.
    #[default]
    None,
    /// `(v - mean) / std` over the whole image after row elision.
    PerImageStandardize,
    /// Embeddings scaled to unit norm before the inner products.
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct D2IConfig {
    pub k: usize,
    pub boundary: Boundary,
    pub drop_zero_rows: bool,
    pub normalize: Normalization,
}

impl Default for D2IConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            boundary: Boundary::ZeroPad,
            drop_zero_rows: true,
            normalize: Normalization::None,
        }
    }
}

impl D2IConfig {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    /// Boundary mode actually applied to a document of `n` tokens: circular
    /// wrapping needs at least `2k + 1` tokens, otherwise zero padding is used.
    pub fn effective_boundary(&self, n: usize) -> Boundary {
        match self.boundary {
            Boundary::Circular if n > 2 * self.k => Boundary::Circular,
            _ => Boundary::ZeroPad,
        }
    }
}

/// A D2I image (or a resized copy of one). Row-major `rows x cols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D2IImage {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
    /// Original token positions of the surviving rows.
    pub kept_word_indices: Vec<usize>,
    pub k: usize,
    pub config: D2IConfig,
    /// Boundary mode that was applied (circular falls back for short documents).
    pub boundary_used: Boundary,
    pub source_id: String,
    /// Shape before resizing, when this image has been resized.
    pub resized_from: Option<(usize, usize)>,
}

impl D2IImage {
    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }
}

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ExperimentError;
use crate::nn::{ArchitectureConfig, TrainConfig};
use crate::transform::{D2IConfig, ResizeMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairEncoding {
    /// Tokens of `text_a` followed by tokens of `text_b`, no separator.
    #[default]
    Concat,
    /// `text_a` only.
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Freeze {
    /// Convolution layers keep their source weights.
    #[default]
    ConvFrozen,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    F1,
    Mrr,
    Mse,
}

/// Geometry every image is resized to before it reaches the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InputConfig {
    pub height: usize,
    pub width: usize,
    pub resize: ResizeMethod,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            height: 50,
            width: 50,
            resize: ResizeMethod::Bilinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferConfig {
    pub checkpoint: Option<PathBuf>,
    pub freeze: Freeze,
}

/// Everything that determines a run. Serialized as one JSON document with
/// the keys `d2i`, `input`, `model`, `train`, `pair_encoding`, `metrics` and
/// `transfer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub d2i: D2IConfig,
    pub input: InputConfig,
    pub model: ArchitectureConfig,
    pub train: TrainConfig,
    pub pair_encoding: PairEncoding,
    pub metrics: Vec<Metric>,
    pub transfer: Option<TransferConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d2i: D2IConfig::default(),
            input: InputConfig::default(),
            model: ArchitectureConfig::default(),
            train: TrainConfig::default(),
            pair_encoding: PairEncoding::Concat,
            metrics: vec![Metric::Accuracy, Metric::F1, Metric::Mrr, Metric::Mse],
            transfer: None,
        }
    }
}

impl ExperimentConfig {
    /// k = 14 documents on a 28 x 28 input, fine-tuning with frozen
    /// convolutions.
    pub fn transfer_preset() -> Self {
        Self {
            d2i: D2IConfig::with_k(14),
            input: InputConfig {
                height: 28,
                width: 28,
                ..InputConfig::default()
            },
            transfer: Some(TransferConfig::default()),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.d2i.k == 0 {
            return bad("d2i.k must be at least 1");
        }
        if self.input.height == 0 || self.input.width == 0 {
            return bad("input.height and input.width must be positive");
        }
        if self.train.batch_size == 0 {
            return bad("train.batch_size must be positive");
        }
        if !(0.0..1.0).contains(&self.model.dropout) {
            return bad("model.dropout must lie in [0, 1)");
        }
        if self.model.kernel == 0 || self.model.conv1_channels == 0 || self.model.conv2_channels == 0 {
            return bad("model kernel and channel counts must be positive");
        }
        Ok(())
    }

    /// Overrides one dotted key, e.g. `d2i.k=14` or `train.optimizer.lr=0.01`.
    /// The value is read as JSON when it parses, otherwise as a string.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        let mut root = serde_json::to_value(&*self).expect("config serializes");
        let parsed = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
        let parts: Vec<&str> = key.split('.').collect();
        let (last, path) = parts.split_last().expect("split yields one part");
        let unknown = || ExperimentError::Config(format!("unknown config key `{key}`"));
        let mut node = &mut root;
        for part in path {
            let child = node
                .as_object_mut()
                .ok_or_else(|| ExperimentError::Config(format!("`{key}`: `{part}` is not inside an object")))?
                .get_mut(*part)
                .ok_or_else(unknown)?;
            if child.is_null() && *part == "transfer" {
                *child = serde_json::to_value(TransferConfig::default()).expect("serializes");
            }
            node = child;
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| ExperimentError::Config(format!("`{key}`: `{last}` is not inside an object")))?;
        if !obj.contains_key(*last) {
            return Err(unknown());
        }
        obj.insert(last.to_string(), parsed);
        let updated: Self =
            serde_json::from_value(root).map_err(|e| ExperimentError::Config(format!("`{key}={value}`: {e}")))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }
}

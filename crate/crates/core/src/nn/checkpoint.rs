//! Binary checkpoint format.
//!
//! ```text
//! "D2I1"                      magic
//! u16                         format version
//! u32 + bytes                 metadata (JSON)
//! u32 x 3                     input channels, height, width
//! u32                         layer count
//! per layer: u8 tag, u32, u32 layer header
//! per parameterized layer:    u32 count + f32 weights, u32 count + f32 biases
//! u32                         CRC32 of everything above
//! ```
//! All integers and floats are little-endian.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Params;
use super::{CnnModel, LayerSpec, NnError, Shape3};

pub const MAGIC: &[u8; 4] = b"D2I1";
pub const FORMAT_VERSION: u16 = 1;

/// Training provenance stored alongside the weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub epochs: usize,
    pub dataset_tag: String,
    /// Resolved configuration of the run that produced the weights.
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: CnnModel<f32>,
    pub meta: CheckpointMeta,
}

fn layer_header(spec: &LayerSpec) -> (u8, u32, u32) {
    match *spec {
        LayerSpec::Conv2d { out_channels, kernel } => (1, out_channels as u32, kernel as u32),
        LayerSpec::Relu => (2, 0, 0),
        LayerSpec::MaxPool2 => (3, 0, 0),
        LayerSpec::Dense { units } => (4, units as u32, 0),
        LayerSpec::Dropout { rate } => (5, rate.to_bits(), 0),
        LayerSpec::Softmax => (6, 0, 0),
    }
}

fn spec_from_header(tag: u8, a: u32, b: u32) -> Result<LayerSpec, NnError> {
    Ok(match tag {
        1 => LayerSpec::Conv2d {
            out_channels: a as usize,
            kernel: b as usize,
        },
        2 => LayerSpec::Relu,
        3 => LayerSpec::MaxPool2,
        4 => LayerSpec::Dense { units: a as usize },
        5 => LayerSpec::Dropout {
            rate: f32::from_bits(a),
        },
        6 => LayerSpec::Softmax,
        other => return Err(NnError::Checkpoint(format!("unknown layer tag {other}"))),
    })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        if self.buf.len() - self.pos < n {
            return Err(NnError::Checkpoint("truncated checkpoint".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, NnError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, NnError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32s(&mut self) -> Result<Vec<f32>, NnError> {
        let n = self.u32()? as usize;
        let bytes = self.take(
            n.checked_mul(4)
                .ok_or_else(|| NnError::Checkpoint("bad length".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

impl Checkpoint {
    pub fn new(model: CnnModel<f32>, meta: CheckpointMeta) -> Self {
        Self { model, meta }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        let meta = serde_json::to_vec(&self.meta).expect("metadata serializes");
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(&meta);
        let input = self.model.input_shape();
        for v in [input.channels, input.height, input.width] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        let specs = self.model.specs();
        out.extend_from_slice(&(specs.len() as u32).to_le_bytes());
        for spec in &specs {
            let (tag, a, b) = layer_header(spec);
            out.push(tag);
            out.extend_from_slice(&a.to_le_bytes());
            out.extend_from_slice(&b.to_le_bytes());
        }
        for i in 0..specs.len() {
            if let Some(p) = self.model.params(i) {
                for values in [&p.weight, &p.bias] {
                    out.extend_from_slice(&(values.len() as u32).to_le_bytes());
                    for v in values.iter() {
                        out.extend_from_slice(&v.to_le_bytes());
                    }
                }
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NnError> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(NnError::Checkpoint("bad magic, not a checkpoint file".into()));
        }
        if bytes.len() < 10 {
            return Err(NnError::Checkpoint("truncated checkpoint".into()));
        }
        let (body, crc) = bytes.split_at(bytes.len() - 4);
        let mut r = Reader { buf: body, pos: 4 };
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(NnError::Checkpoint(format!(
                "unsupported format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        if crc32fast::hash(body) != u32::from_le_bytes(crc.try_into().unwrap()) {
            return Err(NnError::Checkpoint("CRC mismatch, file is corrupt or truncated".into()));
        }
        let meta_len = r.u32()? as usize;
        let meta: CheckpointMeta =
            serde_json::from_slice(r.take(meta_len)?).map_err(|e| NnError::Checkpoint(format!("metadata: {e}")))?;
        let input = Shape3::new(r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
        let n_layers = r.u32()? as usize;
        let mut specs = Vec::with_capacity(n_layers.min(1024));
        for _ in 0..n_layers {
            let tag = r.u8()?;
            let a = r.u32()?;
            let b = r.u32()?;
            specs.push(spec_from_header(tag, a, b)?);
        }
        let mut payloads = Vec::new();
        for spec in &specs {
            if matches!(spec, LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. }) {
                let weight = r.f32s()?;
                let bias = r.f32s()?;
                payloads.push(Params { weight, bias });
            }
        }
        if r.pos != body.len() {
            return Err(NnError::Checkpoint("trailing bytes after parameters".into()));
        }
        let mut payloads = payloads.into_iter();
        let model = CnnModel::from_specs(input, &specs, |spec, _| {
            matches!(spec, LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. })
                .then(|| payloads.next())
                .flatten()
        })
        .map_err(|e| NnError::Checkpoint(format!("inconsistent layers: {e}")))?;
        Ok(Self { model, meta })
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        fs::write(path, self.to_bytes()).map_err(|e| NnError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, NnError> {
        let bytes = fs::read(path).map_err(|e| NnError::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::nn::{ArchitectureConfig, EngineRng, Mode, Tensor4};

    fn sample() -> (Checkpoint, Tensor4<f32>) {
        let mut rng = EngineRng::seed_from_u64(11);
        let arch = ArchitectureConfig {
            conv1_channels: 3,
            conv2_channels: 4,
            kernel: 3,
            dense_units: 8,
            dropout: 0.25,
        };
        let model = CnnModel::new(Shape3::new(1, 7, 5), &arch.layers(3), &mut rng).unwrap();
        let x = Tensor4::from_vec([2, 1, 7, 5], (0..70).map(|_| rng.random::<f32>()).collect()).unwrap();
        let meta = CheckpointMeta {
            seed: 1234,
            epochs: 3,
            dataset_tag: "mnist-train".into(),
            config: Some(serde_json::json!({"k": 14})),
        };
        (Checkpoint::new(model, meta), x)
    }

    #[test]
    fn roundtrip_forward_is_bitwise_equal() {
        let (ckpt, x) = sample();
        let bytes = ckpt.to_bytes();
        assert_eq!(&bytes[..4], b"D2I1");
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ckpt);
        let a = ckpt.model.forward(&x, Mode::Eval).unwrap();
        let b = back.model.forward(&x, Mode::Eval).unwrap();
        assert!(a.data().iter().zip(b.data()).all(|(p, q)| p.to_bits() == q.to_bits()));
        assert_eq!(back.meta.seed, 1234);
        assert_eq!(back.meta.dataset_tag, "mnist-train");
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let (ckpt, _) = sample();
        let bytes = ckpt.to_bytes();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&bad), Err(NnError::Checkpoint(m)) if m.contains("magic")));

        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(Checkpoint::from_bytes(&bad), Err(NnError::Checkpoint(m)) if m.contains("version")));

        let truncated = &bytes[..bytes.len() - 17];
        assert!(Checkpoint::from_bytes(truncated).is_err());

        let mut flipped = bytes.clone();
        let mid = flipped.len() / 2;
        flipped[mid] ^= 0x40;
        assert!(matches!(Checkpoint::from_bytes(&flipped), Err(NnError::Checkpoint(m)) if m.contains("CRC")));
    }
}

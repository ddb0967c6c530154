//! IDX (MNIST) image/label files.

use std::io::{Read, Write};

use super::CorpusError;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Grayscale images scaled to `[0, 1]`, stored contiguously row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f32>,
    pub labels: Vec<usize>,
}

impl ImageDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.pixels[i * n..(i + 1) * n]
    }

    /// First `n` examples (or all, if fewer).
    pub fn take(&self, n: usize) -> ImageDataset {
        let n = n.min(self.len());
        let px = self.height * self.width;
        ImageDataset {
            height: self.height,
            width: self.width,
            pixels: self.pixels[..n * px].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32, CorpusError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| CorpusError::Idx(format!("truncated {what} header")))?;
    Ok(u32::from_be_bytes(b))
}

/// Reads an IDX image stream and its matching label stream.
pub fn load_mnist<I: Read, L: Read>(mut images: I, mut labels: L) -> Result<ImageDataset, CorpusError> {
    let magic = read_u32(&mut images, "image")?;
    if magic != IMAGE_MAGIC {
        return Err(CorpusError::Idx(format!(
            "bad image magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}"
        )));
    }
    let count = read_u32(&mut images, "image")? as usize;
    let height = read_u32(&mut images, "image")? as usize;
    let width = read_u32(&mut images, "image")? as usize;
    if height == 0 || width == 0 {
        return Err(CorpusError::Idx(format!("degenerate image size {height}x{width}")));
    }

    let magic = read_u32(&mut labels, "label")?;
    if magic != LABEL_MAGIC {
        return Err(CorpusError::Idx(format!(
            "bad label magic {magic:#010x}, expected {LABEL_MAGIC:#010x}"
        )));
    }
    let label_count = read_u32(&mut labels, "label")? as usize;
    if label_count != count {
        return Err(CorpusError::Idx(format!(
            "image file declares {count} images but label file declares {label_count} labels"
        )));
    }

    let mut raw = vec![0u8; count * height * width];
    images
        .read_exact(&mut raw)
        .map_err(|_| CorpusError::Idx(format!("truncated image payload, expected {} bytes", raw.len())))?;
    let mut raw_labels = vec![0u8; count];
    labels
        .read_exact(&mut raw_labels)
        .map_err(|_| CorpusError::Idx(format!("truncated label payload, expected {count} bytes")))?;

    Ok(ImageDataset {
        height,
        width,
        pixels: raw.iter().map(|&b| f32::from(b) / 255.0).collect(),
        labels: raw_labels.iter().map(|&b| usize::from(b)).collect(),
    })
}

/// Writes raw IDX streams. Used for fixtures; pixel values are taken as-is.
pub fn write_idx<W: Write, V: Write>(
    mut images: W,
    mut labels: V,
    height: usize,
    width: usize,
    pixels: &[u8],
    label_bytes: &[u8],
) -> std::io::Result<()> {
    let count = label_bytes.len() as u32;
    images.write_all(&IMAGE_MAGIC.to_be_bytes())?;
    images.write_all(&count.to_be_bytes())?;
    images.write_all(&(height as u32).to_be_bytes())?;
    images.write_all(&(width as u32).to_be_bytes())?;
    images.write_all(pixels)?;
    labels.write_all(&LABEL_MAGIC.to_be_bytes())?;
    labels.write_all(&count.to_be_bytes())?;
    labels.write_all(label_bytes)
}

use serde::{Deserialize, Serialize};

use super::{D2IImage, TransformError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResizeMethod {
    /// Separable bilinear interpolation; corner samples map onto corner samples.
    #[default]
    Bilinear,
    /// Center crop when too large, symmetric zero padding when too small.
    CropOrPad,
}

/// Source coordinate sampled for output index `i` (corner-aligned).
fn source_coord(i: usize, out: usize, inp: usize) -> f64 {
    if out == 1 {
        (inp as f64 - 1.0) / 2.0
    } else {
        i as f64 * (inp as f64 - 1.0) / (out as f64 - 1.0)
    }
}

/// For each output index: (lower source index, upper source index, upper weight).
fn interp_table(out: usize, inp: usize) -> Vec<(usize, usize, f64)> {
    (0..out)
        .map(|i| {
            let s = source_coord(i, out, inp);
            let lo = (s.floor() as usize).min(inp - 1);
            let hi = (lo + 1).min(inp - 1);
            (lo, hi, s - lo as f64)
        })
        .collect()
}

/// Resizes a row-major `rows x cols` matrix.
pub fn resize_matrix(
    data: &[f32],
    rows: usize,
    cols: usize,
    target_rows: usize,
    target_cols: usize,
    method: ResizeMethod,
) -> Result<Vec<f32>, TransformError> {
    if target_rows == 0 || target_cols == 0 {
        return Err(TransformError::InvalidSize(target_rows, target_cols));
    }
    if rows == 0 || cols == 0 {
        return Err(TransformError::EmptyImage);
    }
    debug_assert_eq!(data.len(), rows * cols);
    if rows == target_rows && cols == target_cols {
        return Ok(data.to_vec());
    }
    let mut out = vec![0.0f32; target_rows * target_cols];
    match method {
        ResizeMethod::Bilinear => {
            let rt = interp_table(target_rows, rows);
            let ct = interp_table(target_cols, cols);
            for (r, &(r0, r1, wr)) in rt.iter().enumerate() {
                for (c, &(c0, c1, wc)) in ct.iter().enumerate() {
                    let at = |rr: usize, cc: usize| f64::from(data[rr * cols + cc]);
                    let top = at(r0, c0) * (1.0 - wc) + at(r0, c1) * wc;
                    let bottom = at(r1, c0) * (1.0 - wc) + at(r1, c1) * wc;
                    out[r * target_cols + c] = (top * (1.0 - wr) + bottom * wr) as f32;
                }
            }
        }
        ResizeMethod::CropOrPad => {
            // (first source index, first destination index, count) per axis
            let span = |src: usize, dst: usize| {
                if src >= dst {
                    ((src - dst) / 2, 0, dst)
                } else {
                    (0, (dst - src) / 2, src)
                }
            };
            let (sr, dr, nr) = span(rows, target_rows);
            let (sc, dc, nc) = span(cols, target_cols);
            for r in 0..nr {
                let src = &data[(sr + r) * cols + sc..(sr + r) * cols + sc + nc];
                out[(dr + r) * target_cols + dc..(dr + r) * target_cols + dc + nc].copy_from_slice(src);
            }
        }
    }
    Ok(out)
}

/// Resizes a D2I image; the result remembers its original shape.
pub fn resize(
    img: &D2IImage,
    target_rows: usize,
    target_cols: usize,
    method: ResizeMethod,
) -> Result<D2IImage, TransformError> {
    let data = resize_matrix(&img.data, img.rows, img.cols, target_rows, target_cols, method)?;
    let same = img.rows == target_rows && img.cols == target_cols;
    Ok(D2IImage {
        rows: target_rows,
        cols: target_cols,
        data,
        resized_from: if same {
            img.resized_from
        } else {
            img.resized_from.or(Some((img.rows, img.cols)))
        },
        ..img.clone()
    })
}

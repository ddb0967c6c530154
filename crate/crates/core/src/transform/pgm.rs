use super::{D2IImage, TransformError};

/// Binary PGM (`P5`, maxval 255) of a row-major matrix. Values are mapped by
/// the per-image affine map min -> 0, max -> 255; a constant image maps to 0.
pub fn pgm_bytes(rows: usize, cols: usize, data: &[f32]) -> Result<Vec<u8>, TransformError> {
    if rows == 0 || cols == 0 {
        return Err(TransformError::EmptyImage);
    }
    debug_assert_eq!(data.len(), rows * cols);
    let (lo, hi) = data.iter().fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let range = f64::from(hi) - f64::from(lo);
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.reserve(data.len());
    out.extend(data.iter().map(|&v| {
        if range > 0.0 {
            ((f64::from(v) - f64::from(lo)) / range * 255.0)
                .round()
                .clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    Ok(out)
}

pub fn export_pgm(img: &D2IImage) -> Result<Vec<u8>, TransformError> {
    pgm_bytes(img.rows, img.cols, &img.data)
}

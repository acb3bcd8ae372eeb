//! 8-bit grayscale PNG/PGM input and output, values scaled to `[0, 1]`.

use std::path::Path;

use image::GrayImage;

use crate::error::{config, Result};

/// Returns `(rows, cols, pixels)` in row-major order.
pub fn load_grayscale(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let img = image::open(path)?.to_luma8();
    let (w, h) = img.dimensions();
    let data = img.into_raw().into_iter().map(|v| v as f64 / 255.0).collect();
    Ok((h as usize, w as usize, data))
}

/// Writes pixels clamped to `[0, 1]`; the format follows the file extension.
pub fn save_grayscale(path: &Path, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    if rows * cols != data.len() {
        return config("image shape does not match the data");
    }
    let buf: Vec<u8> = data.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    let img = GrayImage::from_raw(cols as u32, rows as u32, buf).expect("buffer size checked above");
    img.save(path)?;
    Ok(())
}

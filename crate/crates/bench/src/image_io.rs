//! Decoding frames into core images and writing PNGs.

use std::path::Path;

use facetrack_core::Image;

use crate::{BenchError, Result};

/// Decode any PNG or JPEG into an RGB image; gray inputs are expanded.
pub fn load_image(path: &Path) -> Result<Image> {
    let decoded = image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => BenchError::io(path, e),
        source => BenchError::Image {
            path: path.to_path_buf(),
            source,
        },
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    Ok(Image::new(w as usize, h as usize, 3, rgb.into_raw())?)
}

/// Write a 1- or 3-channel image as PNG.
pub fn save_png(img: &Image, path: &Path) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let color = match img.channels() {
        1 => image::ExtendedColorType::L8,
        _ => image::ExtendedColorType::Rgb8,
    };
    image::save_buffer_with_format(path, img.data(), w, h, color, image::ImageFormat::Png).map_err(
        |source| match source {
            image::ImageError::IoError(e) => BenchError::io(path, e),
            source => BenchError::Image {
                path: path.to_path_buf(),
                source,
            },
        },
    )
}

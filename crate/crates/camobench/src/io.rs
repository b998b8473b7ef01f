//! Grayscale PNG input/output for scalar maps, binary masks, and rank maps.
//!
//! 8-bit images scale by 255, 16-bit by 65535. Loaders check dimensions
//! against the manifest so mismatches surface at the file, not in a metric.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{Error, Result};
use crate::map::{BinaryMask, ScalarMap};
use crate::rank::{RankLabel, RankMap};

fn open_image(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::FileMissing(path.to_path_buf()));
    }
    image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Image dimensions from the file header alone.
pub fn image_dims(path: &Path) -> Result<(u32, u32)> {
    if !path.exists() {
        return Err(Error::FileMissing(path.to_path_buf()));
    }
    image::image_dimensions(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn check_dims(path: &Path, found: (u32, u32), expected: (u32, u32)) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        let _ = path;
        Err(Error::dims(found, expected))
    }
}

/// Loads a single-channel 8- or 16-bit grayscale image as a unit-normalized
/// scalar map (values divided by the bit-depth maximum).
pub fn load_scalar_map(path: &Path, expected_dims: (u32, u32)) -> Result<ScalarMap> {
    let img = open_image(path)?;
    let (values, dims) = match img {
        DynamicImage::ImageLuma8(buf) => {
            let dims = buf.dimensions();
            (
                buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect::<Vec<_>>(),
                dims,
            )
        }
        DynamicImage::ImageLuma16(buf) => {
            let dims = buf.dimensions();
            (
                buf.into_raw()
                    .into_iter()
                    .map(|v| v as f64 / 65535.0)
                    .collect::<Vec<_>>(),
                dims,
            )
        }
        other => {
            return Err(Error::UnsupportedPixelFormat(format!(
                "{}: expected 8- or 16-bit single-channel grayscale, got {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    check_dims(path, dims, expected_dims)?;
    ScalarMap::new(dims.0, dims.1, values)
}

/// Loads a grayscale image as a binary mask: pixel strictly above the
/// bit-depth midpoint maps to 1 (128 in 8-bit is 1, 127 is 0).
pub fn load_mask(path: &Path, expected_dims: (u32, u32)) -> Result<BinaryMask> {
    let img = open_image(path)?;
    let (bits, dims) = match img {
        DynamicImage::ImageLuma8(buf) => {
            let dims = buf.dimensions();
            (
                buf.into_raw().into_iter().map(|v| v as f64 > 127.5).collect::<Vec<_>>(),
                dims,
            )
        }
        DynamicImage::ImageLuma16(buf) => {
            let dims = buf.dimensions();
            (
                buf.into_raw()
                    .into_iter()
                    .map(|v| v as f64 > 32767.5)
                    .collect::<Vec<_>>(),
                dims,
            )
        }
        other => {
            return Err(Error::UnsupportedPixelFormat(format!(
                "{}: expected 8- or 16-bit single-channel grayscale, got {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    check_dims(path, dims, expected_dims)?;
    BinaryMask::new(dims.0, dims.1, bits)
}

/// Saves a map with values in [0,1] as an 8-bit grayscale PNG
/// (`round(v * 255)`).
pub fn save_scalar_map(map: &ScalarMap, path: &Path) -> Result<()> {
    let pixels: Vec<u8> = map
        .values()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let buf: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(map.width(), map.height(), pixels).expect("sizes match");
    buf.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Saves a binary mask as an 8-bit grayscale PNG (0 / 255).
pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let pixels: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let buf: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(mask.width(), mask.height(), pixels).expect("sizes match");
    buf.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Saves a rank map as an 8-bit grayscale PNG with the fixed gray codes
/// BG=0, ES=51, M1=102, M2=153, M3=204, HD=255.
pub fn save_rank_map(map: &RankMap, path: &Path) -> Result<()> {
    let pixels: Vec<u8> = map.labels().iter().map(|l| l.gray_code()).collect();
    let buf: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(map.width(), map.height(), pixels).expect("sizes match");
    buf.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Loads an 8-bit rank map PNG written with the fixed gray codes. Pixels are
/// snapped to the nearest code so re-encoded maps still decode.
pub fn load_rank_map(path: &Path, expected_dims: (u32, u32)) -> Result<RankMap> {
    let img = open_image(path)?;
    let buf = match img {
        DynamicImage::ImageLuma8(buf) => buf,
        other => {
            return Err(Error::UnsupportedPixelFormat(format!(
                "{}: rank maps must be 8-bit grayscale, got {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    check_dims(path, buf.dimensions(), expected_dims)?;
    let (w, h) = buf.dimensions();
    let labels = buf
        .into_raw()
        .into_iter()
        .map(|v| {
            RankLabel::from_gray_code(v).unwrap_or_else(|| {
                // nearest gray code; codes are multiples of 51
                let idx = ((v as f64) / 51.0).round() as u8;
                RankLabel::from_gray_code(idx * 51).expect("snapped code is valid")
            })
        })
        .collect();
    RankMap::new(w, h, labels)
}

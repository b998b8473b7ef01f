//! 8-bit RGB images and the Lab / luminance conversions the attribute
//! classifiers run on. Lab uses the D65 white point with standard sRGB
//! linearization.

use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::map::ScalarMap;

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidConfig(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image from a per-pixel function, handy for synthetic inputs.
    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity((width as usize) * (height as usize));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        RgbImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// Per-pixel Lab values (L in [0, 100]).
    pub fn to_lab(&self) -> Vec<[f64; 3]> {
        self.pixels.iter().map(|&p| rgb_to_lab(p)).collect()
    }

    /// Relative luminance in [0, 1] (linear-light Y under D65).
    pub fn luminance(&self) -> ScalarMap {
        let values = self
            .pixels
            .iter()
            .map(|&[r, g, b]| {
                0.2126729 * srgb_to_linear(r) + 0.7151522 * srgb_to_linear(g)
                    + 0.0721750 * srgb_to_linear(b)
            })
            .collect();
        ScalarMap::new(self.width, self.height, values).expect("luminance values are finite")
    }
}

/// Loads an RGB PNG or JPEG; grayscale and RGBA inputs are widened or have
/// alpha dropped so any 8-bit color file works.
pub fn load_rgb_image(path: &Path, expected_dims: (u32, u32)) -> Result<RgbImage> {
    if !path.exists() {
        return Err(Error::FileMissing(path.to_path_buf()));
    }
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let rgb = match img {
        DynamicImage::ImageRgb8(buf) => buf,
        DynamicImage::ImageRgba8(buf) => DynamicImage::ImageRgba8(buf).to_rgb8(),
        DynamicImage::ImageLuma8(buf) => DynamicImage::ImageLuma8(buf).to_rgb8(),
        DynamicImage::ImageLumaA8(buf) => DynamicImage::ImageLumaA8(buf).to_rgb8(),
        other => {
            return Err(Error::UnsupportedPixelFormat(format!(
                "{}: expected 8-bit RGB-compatible image, got {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    let dims = rgb.dimensions();
    if dims != expected_dims {
        return Err(Error::dims(dims, expected_dims));
    }
    let pixels = rgb.pixels().map(|p| [p.0[0], p.0[1], p.0[2]]).collect();
    RgbImage::new(dims.0, dims.1, pixels)
}

/// Saves as an 8-bit RGB PNG (or whatever the extension selects).
pub fn save_rgb_image(img: &RgbImage, path: &Path) -> Result<()> {
    let raw: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    let buf: image::ImageBuffer<image::Rgb<u8>, _> =
        image::ImageBuffer::from_raw(img.width(), img.height(), raw).expect("sizes match");
    buf.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// sRGB (8-bit) to CIE Lab under D65.
pub fn rgb_to_lab([r, g, b]: [u8; 3]) -> [f64; 3] {
    let (r, g, b) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    // D65 reference white
    let (xn, yn, zn) = (0.95047, 1.0, 1.08883);
    let f = |t: f64| {
        let delta: f64 = 6.0 / 29.0;
        if t > delta.powi(3) {
            t.cbrt()
        } else {
            t / (3.0 * delta * delta) + 4.0 / 29.0
        }
    };
    let (fx, fy, fz) = (f(x / xn), f(y / yn), f(z / zn));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lab_anchors() {
        let [l, a, b] = rgb_to_lab([255, 255, 255]);
        assert!((l - 100.0).abs() < 0.01, "white L = 100, got {l}");
        assert!(a.abs() < 0.01 && b.abs() < 0.01, "white is neutral");

        let [l, a, b] = rgb_to_lab([0, 0, 0]);
        assert!(l.abs() < 1e-9 && a.abs() < 1e-9 && b.abs() < 1e-9);

        // mid gray is neutral with L between the extremes
        let [l, a, b] = rgb_to_lab([128, 128, 128]);
        assert!(l > 40.0 && l < 60.0, "mid gray L, got {l}");
        assert!(a.abs() < 0.01 && b.abs() < 0.01);

        // red has strongly positive a
        let [_, a, _] = rgb_to_lab([255, 0, 0]);
        assert!(a > 60.0, "red a, got {a}");
    }

    #[test]
    fn luminance_black_white() {
        let img = RgbImage::from_fn(2, 1, |x, _| if x == 0 { [0, 0, 0] } else { [255, 255, 255] });
        let y = img.luminance();
        assert!(y.get(0, 0).abs() < 1e-12);
        // the standard coefficients sum to 1 only within 1e-7
        assert!((y.get(1, 0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rgb_png_round_trip_and_dim_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = RgbImage::from_fn(5, 4, |x, y| [(x * 40) as u8, (y * 50) as u8, 7]);
        save_rgb_image(&img, &path).unwrap();
        let back = load_rgb_image(&path, (5, 4)).unwrap();
        assert_eq!(img.pixels(), back.pixels());
        assert!(matches!(
            load_rgb_image(&path, (9, 9)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grayscale_input_widens_to_rgb() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.png");
        let buf: image::ImageBuffer<image::Luma<u8>, Vec<u8>> =
            image::ImageBuffer::from_pixel(3, 3, image::Luma([90]));
        buf.save(&path).unwrap();
        let img = load_rgb_image(&path, (3, 3)).unwrap();
        assert!(img.pixels().iter().all(|&p| p == [90, 90, 90]));
    }
}

//! Equirectangular rasters and rendered views.

use std::path::Path;

use image::{ImageError, RgbImage};
use log::warn;

use crate::error::{Error, Result};

/// Linear RGB triple in `[0, 1]`.
pub type Rgb = [f64; 3];

/// Equirectangular panorama, 8-bit RGB, row-major.
///
/// Columns wrap around (azimuth is periodic), rows clamp at the poles.
#[derive(Debug, Clone, PartialEq)]
pub struct PanoramaImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl PanoramaImage {
    pub fn from_raw(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width < 2 || height < 1 || pixels.len() != width as usize * height as usize * 3 {
            return Err(Error::InvalidSize(width, height));
        }
        Ok(PanoramaImage {
            width,
            height,
            pixels,
        })
    }

    /// Panorama whose texel at `(column, row)` is `f(column, row)`.
    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for row in 0..height {
            for col in 0..width {
                pixels.extend_from_slice(&f(col, row));
            }
        }
        Self::from_raw(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn texel(&self, col: u32, row: u32) -> [u8; 3] {
        let i = (row as usize * self.width as usize + col as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Bilinear sample at texture coordinates `(u, v)` with texel centers at
    /// `(i + 0.5) / width`.
    pub fn sample_bilinear(&self, u: f64, v: f64) -> Rgb {
        let w = self.width as i64;
        let h = self.height as i64;

        let x = u * self.width as f64 - 0.5;
        let x0f = x.floor();
        let fx = x - x0f;
        let x0 = (x0f as i64).rem_euclid(w);
        let x1 = (x0 + 1).rem_euclid(w);

        let y = (v * self.height as f64 - 0.5).clamp(0.0, (h - 1) as f64);
        let y0f = y.floor();
        let fy = y - y0f;
        let y0 = y0f as i64;
        let y1 = (y0 + 1).min(h - 1);

        let fetch = |c: i64, r: i64| self.texel(c as u32, r as u32);
        let (a, b, c, d) = (fetch(x0, y0), fetch(x1, y0), fetch(x0, y1), fetch(x1, y1));
        let mut out = [0.0; 3];
        for k in 0..3 {
            let top = a[k] as f64 * (1.0 - fx) + b[k] as f64 * fx;
            let bottom = c[k] as f64 * (1.0 - fx) + d[k] as f64 * fx;
            out[k] = (top * (1.0 - fy) + bottom * fy) / 255.0;
        }
        out
    }
}

/// Rendered perspective view, 8-bit RGB, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl RenderedImage {
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// Quantizes a `[0, 1]` sample to 8 bits with round-to-nearest.
pub fn quantize(c: Rgb) -> [u8; 3] {
    c.map(|x| (x * 255.0).round().clamp(0.0, 255.0) as u8)
}

/// Loads a PNG or JPEG panorama. Alpha is dropped.
pub fn load_panorama(path: impl AsRef<Path>) -> Result<PanoramaImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| match e {
        ImageError::IoError(source) => Error::Io {
            path: path.to_owned(),
            source,
        },
        other => Error::Decode {
            path: path.to_owned(),
            message: other.to_string(),
        },
    })?;
    let rgb = img.to_rgb8();
    let (width, height) = rgb.dimensions();
    if width != 2 * height {
        warn!(
            "{}: {width}x{height} is not a 2:1 equirectangular panorama",
            path.display()
        );
    }
    PanoramaImage::from_raw(width, height, rgb.into_raw())
}

/// Writes `img` as PNG.
pub fn write_image(img: &RenderedImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf = RgbImage::from_raw(img.width, img.height, img.pixels.clone())
        .ok_or(Error::InvalidSize(img.width, img.height))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            ImageError::IoError(source) => Error::Io {
                path: path.to_owned(),
                source,
            },
            other => Error::Io {
                path: path.to_owned(),
                source: std::io::Error::other(other.to_string()),
            },
        })
}

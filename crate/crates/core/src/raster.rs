//! 8-bit raster images and PNG/JPEG I/O.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};

/// Row-major 8-bit image with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidValue(format!(
                "image size {width}x{height} must be positive"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidValue(format!(
                "unsupported channel count {channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidValue(format!(
                "pixel buffer has {} bytes, expected {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Image of the given size with every pixel set to `fill`.
    pub fn filled(width: u32, height: u32, channels: u8, fill: [u8; 3]) -> Result<Self> {
        let px = &fill[..channels.min(3) as usize];
        let pixels = px
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * channels as usize)
            .collect();
        Self::new(width, height, channels, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels as usize;
        let i = (y as usize * self.width as usize + x as usize) * c;
        &self.pixels[i..i + c]
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    /// Loads a PNG or JPEG. Grayscale inputs stay single-channel; alpha is
    /// dropped.
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_dynamic(img))
    }

    pub fn from_dynamic(img: DynamicImage) -> Self {
        let gray = matches!(
            img,
            DynamicImage::ImageLuma8(_)
                | DynamicImage::ImageLumaA8(_)
                | DynamicImage::ImageLuma16(_)
                | DynamicImage::ImageLumaA16(_)
        );
        if gray {
            let g = img.into_luma8();
            let (w, h) = g.dimensions();
            Self {
                width: w,
                height: h,
                channels: 1,
                pixels: g.into_raw(),
            }
        } else {
            let rgb = img.into_rgb8();
            let (w, h) = rgb.dimensions();
            Self {
                width: w,
                height: h,
                channels: 3,
                pixels: rgb.into_raw(),
            }
        }
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        let (w, h) = (self.width, self.height);
        match self.channels {
            1 => DynamicImage::ImageLuma8(
                GrayImage::from_raw(w, h, self.pixels.clone()).expect("buffer size checked"),
            ),
            _ => DynamicImage::ImageRgb8(
                RgbImage::from_raw(w, h, self.pixels.clone()).expect("buffer size checked"),
            ),
        }
    }

    /// Writes the image as PNG.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_dynamic()
            .save_with_format(path, ImageFormat::Png)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
    }
}

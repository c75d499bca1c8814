//! Pixel buffers, the equirectangular frame type, and PNG/JPEG I/O.
//!
//! Samples are stored as `f32`, row-major and channel-interleaved. Intensity
//! rasters use the 8-bit scale (0..=255) so that "one intensity unit" means
//! the same thing in memory and on disk. Depth rasters hold meters and are
//! written as 16-bit PNG in millimeters.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What the samples of a raster mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    /// Gray or color intensity on the 0..=255 scale.
    Intensity,
    /// Metric depth in meters, single channel.
    DepthMeters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    encoding: Encoding,
    data: Vec<f32>,
}

impl Raster {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        encoding: Encoding,
        data: Vec<f32>,
    ) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "{channels} channels (expected 1 or 3)"
            )));
        }
        if encoding == Encoding::DepthMeters && channels != 1 {
            return Err(Error::InvalidImage("depth rasters are single-channel".into()));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidImage(format!(
                "buffer holds {} samples, expected {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidImage("non-finite sample".into()));
        }
        Ok(Self {
            width,
            height,
            channels,
            encoding,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, encoding: Encoding, value: f32) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            encoding,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Channel-averaged value at `(x, y)`.
    pub fn gray(&self, x: usize, y: usize) -> f32 {
        let p = self.pixel(x, y);
        p.iter().sum::<f32>() / p.len() as f32
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path.as_ref())?;
        Ok(Self::from_dynamic(img))
    }

    /// 16-bit single-channel images are read as millimeter depth; everything
    /// else as intensity (alpha dropped).
    pub fn from_dynamic(img: DynamicImage) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let (channels, encoding, data) = match img {
            DynamicImage::ImageLuma16(buf) => (
                1,
                Encoding::DepthMeters,
                buf.into_raw().into_iter().map(|mm| mm as f32 / 1000.0).collect(),
            ),
            DynamicImage::ImageLuma8(buf) => (
                1,
                Encoding::Intensity,
                buf.into_raw().into_iter().map(f32::from).collect(),
            ),
            DynamicImage::ImageLumaA8(_) => (
                1,
                Encoding::Intensity,
                img.to_luma8().into_raw().into_iter().map(f32::from).collect(),
            ),
            other => (
                3,
                Encoding::Intensity,
                other.to_rgb8().into_raw().into_iter().map(f32::from).collect(),
            ),
        };
        Self {
            width: w,
            height: h,
            channels,
            encoding,
            data,
        }
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        let (w, h) = (self.width as u32, self.height as u32);
        match (self.encoding, self.channels) {
            (Encoding::DepthMeters, _) => {
                let raw = self
                    .data
                    .iter()
                    .map(|m| (m * 1000.0).round().clamp(0.0, u16::MAX as f32) as u16)
                    .collect();
                DynamicImage::ImageLuma16(ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).unwrap())
            }
            (Encoding::Intensity, 1) => {
                let raw = self.data.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
                DynamicImage::ImageLuma8(ImageBuffer::<Luma<u8>, _>::from_raw(w, h, raw).unwrap())
            }
            (Encoding::Intensity, _) => {
                let raw = self.data.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
                DynamicImage::ImageRgb8(ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, raw).unwrap())
            }
        }
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_dynamic()
            .save_with_format(path.as_ref(), image::ImageFormat::Png)?;
        Ok(())
    }
}

/// A raster in equirectangular projection: `width == 2 * height`, `width >= 16`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquirectImage {
    raster: Raster,
}

impl EquirectImage {
    pub fn new(raster: Raster) -> Result<Self> {
        let (w, h) = (raster.width(), raster.height());
        if w != 2 * h {
            return Err(Error::InvalidImage(format!(
                "{w}x{h} is not 2:1 equirectangular"
            )));
        }
        if w < 16 {
            return Err(Error::InvalidImage(format!("width {w} < 16")));
        }
        Ok(Self { raster })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(Raster::load(path)?)
    }

    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    pub fn into_raster(self) -> Raster {
        self.raster
    }

    pub fn width(&self) -> usize {
        self.raster.width
    }

    pub fn height(&self) -> usize {
        self.raster.height
    }

    pub fn channels(&self) -> usize {
        self.raster.channels
    }

    pub fn encoding(&self) -> Encoding {
        self.raster.encoding
    }

    /// Column roll: output column `c` takes input column `(c + shift) mod W`.
    ///
    /// Rolling by `W * delta / 2pi` columns turns the panorama so that the
    /// content previously at yaw `delta` sits at yaw 0.
    pub fn roll_columns(&self, shift: isize) -> Self {
        let r = &self.raster;
        let (w, ch) = (r.width, r.channels);
        let mut data = Vec::with_capacity(r.data.len());
        for y in 0..r.height {
            let row = &r.data[y * w * ch..(y + 1) * w * ch];
            for x in 0..w {
                let src = (x as isize + shift).rem_euclid(w as isize) as usize;
                data.extend_from_slice(&row[src * ch..(src + 1) * ch]);
            }
        }
        Self {
            raster: Raster {
                data,
                ..r.clone()
            },
        }
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        self.raster.save_png(path)
    }
}

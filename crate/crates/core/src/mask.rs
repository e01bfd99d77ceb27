//! Raster value types: binary masks, probability masks and bounding boxes.

use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `width × height` bitmap stored row-major. `true` is foreground.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    pixels: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryMask {}x{} ({} fg)", self.width, self.height, self.count())?;
        if self.width <= 64 && self.height <= 64 {
            for y in 0..self.height {
                let row: String = (0..self.width)
                    .map(|x| if self.get(x, y) { '#' } else { '.' })
                    .collect();
                writeln!(f, "{row}")?;
            }
        }
        Ok(())
    }
}

impl BinaryMask {
    /// All-background mask. Panics on a zero dimension; use [`BinaryMask::try_new`]
    /// when the dimensions come from untrusted input.
    pub fn new(width: u32, height: u32) -> Self {
        Self::try_new(width, height).expect("mask dimensions must be at least 1x1")
    }

    pub fn try_new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            pixels: vec![false; width as usize * height as usize],
        })
    }

    pub fn full(width: u32, height: u32) -> Self {
        let mut m = Self::new(width, height);
        m.pixels.fill(true);
        m
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.pixels[y as usize * width as usize + x as usize] = f(x, y);
            }
        }
        m
    }

    pub fn from_vec(width: u32, height: u32, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(Self { width, height, pixels })
    }

    /// Parses an ASCII picture where `#` (or `1`) marks foreground. Rows are
    /// separated by newlines; blank lines and surrounding whitespace are ignored.
    pub fn from_ascii(art: &str) -> Self {
        let rows: Vec<&str> = art.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let height = rows.len() as u32;
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0) as u32;
        let mut m = Self::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate() {
                if c == '#' || c == '1' {
                    m.set(x as u32, y as u32, true);
                }
            }
        }
        m
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Bounds-checked read; anything outside the frame is background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && x < self.width as i64
            && y < self.height as i64
            && self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [bool] {
        &mut self.pixels
    }

    pub fn count(&self) -> usize {
        // byte sums over chunks short enough not to overflow a u8
        self.pixels
            .chunks(255)
            .map(|c| c.iter().fold(0u8, |acc, &p| acc + p as u8) as usize)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        memchr::memchr(1, as_bytes(&self.pixels)).is_none()
    }

    /// Foreground coordinates in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    fn check_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        self.check_dims(other)?;
        let pixels = self.pixels.iter().zip(&other.pixels).map(|(&a, &b)| f(a, b)).collect();
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            pixels,
        })
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    /// `self ∧ ¬other`
    pub fn difference(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| !p).collect(),
        }
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.pixels.iter().zip(&other.pixels).all(|(&a, &b)| !a || b)
    }

    pub fn flip_horizontal(&self) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    /// Copy of the sub-rectangle `bbox`.
    pub fn crop(&self, bbox: &BoundingBox) -> BinaryMask {
        BinaryMask::from_fn(bbox.width(), bbox.height(), |x, y| self.get(bbox.x0 + x, bbox.y0 + y))
    }

    pub fn to_probability(&self) -> ProbabilityMask {
        ProbabilityMask {
            width: self.width,
            height: self.height,
            values: self.pixels.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([if self.get(x, y) { 255 } else { 0 }])
        })
    }

    /// Any nonzero sample is foreground, so colour-coded instance PNGs load as
    /// their silhouette.
    pub fn from_dynamic_image(img: &image::DynamicImage) -> Result<Self> {
        let rgba = img.to_rgba8();
        let (w, h) = rgba.dimensions();
        let mut m = Self::try_new(w, h)?;
        for (x, y, px) in rgba.enumerate_pixels() {
            if px.0[..3].iter().any(|&c| c != 0) {
                m.set(x, y, true);
            }
        }
        Ok(m)
    }

    pub fn read_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_dynamic_image(&img)
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let bytes = self.to_png_bytes()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        encode_png(&self.to_gray_image())
    }

    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| Error::Image {
            path: "<memory>".into(),
            message: e.to_string(),
        })?;
        Self::from_dynamic_image(&img)
    }
}

/// Pixels as 0/1 bytes.
pub(crate) fn as_bytes(pixels: &[bool]) -> &[u8] {
    bytemuck::cast_slice(pixels)
}

pub(crate) fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png).map_err(|e| Error::Image {
        path: "<memory>".into(),
        message: e.to_string(),
    })?;
    Ok(buf.into_inner())
}

/// Per-pixel foreground probabilities in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMask {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl ProbabilityMask {
    pub fn zeros(width: u32, height: u32) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be at least 1x1");
        Self {
            width,
            height,
            values: vec![0.0; width as usize * height as usize],
        }
    }

    /// Values are clamped into `[0, 1]`; NaN becomes 0.
    pub fn from_vec(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width as usize * height as usize {
            return Err(Error::InvalidDimensions { width, height });
        }
        let values = values
            .into_iter()
            .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
            .collect();
        Ok(Self { width, height, values })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> f64) -> Self {
        let mut values = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                values.push(if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) });
            }
        }
        Self { width, height, values }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Foreground where `p >= threshold`.
    pub fn threshold(&self, threshold: f64) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            pixels: self.values.iter().map(|&v| v >= threshold).collect(),
        }
    }

    pub fn flip_horizontal(&self) -> ProbabilityMask {
        ProbabilityMask::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    /// 8-bit quantization, `round(p · 255)`.
    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([(self.get(x, y) * 255.0).round() as u8])
        })
    }

    pub fn from_gray_image(img: &GrayImage) -> Self {
        let (w, h) = img.dimensions();
        Self::from_fn(w, h, |x, y| img.get_pixel(x, y).0[0] as f64 / 255.0)
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        encode_png(&self.to_gray_image())
    }

    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| Error::Image {
            path: "<memory>".into(),
            message: e.to_string(),
        })?;
        Ok(Self::from_gray_image(&img.to_luma8()))
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let bytes = self.to_png_bytes()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

/// Axis-aligned pixel box: inclusive `x0, y0`, exclusive `x1, y1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl BoundingBox {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        debug_assert!(x0 < x1 && y0 < y1, "empty bounding box");
        Self { x0, y0, x1, y1 }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self::new(0, 0, width, height)
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    /// Longer side, used as the "object size" scale.
    pub fn longer_side(&self) -> u32 {
        self.width().max(self.height())
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    /// Grows the box by `margin` on every side, clipped to the frame.
    pub fn expand(&self, margin: u32, width: u32, height: u32) -> BoundingBox {
        BoundingBox {
            x0: self.x0.saturating_sub(margin),
            y0: self.y0.saturating_sub(margin),
            x1: (self.x1.saturating_add(margin)).min(width),
            y1: (self.y1.saturating_add(margin)).min(height),
        }
    }
}

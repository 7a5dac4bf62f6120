//! The grayscale raster type shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Source units that pixel values 0 and 255 stand for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub min: f64,
    pub max: f64,
}

impl Default for ValueRange {
    fn default() -> Self {
        ValueRange { min: 0.0, max: 255.0 }
    }
}

/// Read-only pixel access. Lets large or synthetic rasters be cropped
/// without materializing them.
pub trait Raster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn pixel(&self, x: usize, y: usize) -> u8;
}

/// Row-major 8-bit heightmap.
#[derive(Debug, Clone, PartialEq)]
pub struct Heightmap {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    value_range: ValueRange,
}

impl Heightmap {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "heightmap dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} heightmap",
                pixels.len()
            )));
        }
        Ok(Heightmap {
            width,
            height,
            pixels,
            value_range: ValueRange::default(),
        })
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("non-zero dimensions")
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels).expect("non-zero dimensions")
    }

    pub fn with_value_range(mut self, range: ValueRange) -> Self {
        self.value_range = range;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn value_range(&self) -> ValueRange {
        self.value_range
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }
}

impl Raster for Heightmap {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn pixel(&self, x: usize, y: usize) -> u8 {
        self.get(x, y)
    }
}

/// A raster whose pixels are computed on demand.
pub struct FnRaster<F> {
    width: usize,
    height: usize,
    f: F,
}

impl<F: Fn(usize, usize) -> u8> FnRaster<F> {
    pub fn new(width: usize, height: usize, f: F) -> Self {
        FnRaster { width, height, f }
    }
}

impl<F: Fn(usize, usize) -> u8> Raster for FnRaster<F> {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn pixel(&self, x: usize, y: usize) -> u8 {
        (self.f)(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dimensions() {
        assert!(Heightmap::new(0, 4, vec![]).is_err());
        assert!(Heightmap::new(4, 0, vec![]).is_err());
    }

    #[test]
    fn rejects_pixel_count_mismatch() {
        assert!(matches!(Heightmap::new(2, 2, vec![0; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn row_major_indexing() {
        let h = Heightmap::from_fn(3, 2, |x, y| (10 * y + x) as u8);
        assert_eq!(h.pixels(), &[0, 1, 2, 10, 11, 12]);
        assert_eq!(h.get(2, 1), 12);
    }
}

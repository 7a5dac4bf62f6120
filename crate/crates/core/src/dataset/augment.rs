//! Rotation and flip augmentation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heightmap::Heightmap;

/// Pixel value written where a rotated image has no source coverage.
pub const FILL_SENTINEL: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub rotation_degrees: f64,
    pub hflip: bool,
    pub vflip: bool,
    pub fill_value: u8,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        AugmentSpec {
            rotation_degrees: 0.0,
            hflip: false,
            vflip: false,
            fill_value: FILL_SENTINEL,
        }
    }
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=180.0).contains(&self.rotation_degrees) {
            return Err(Error::invalid(format!(
                "rotation must lie in [0, 180] degrees, got {}",
                self.rotation_degrees
            )));
        }
        Ok(())
    }

    /// Uniform rotation in [0, 180], each flip independently with p = 0.5.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        AugmentSpec {
            rotation_degrees: rng.random_range(0.0..=180.0),
            hflip: rng.random_bool(0.5),
            vflip: rng.random_bool(0.5),
            fill_value: FILL_SENTINEL,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation_degrees == 0.0 && !self.hflip && !self.vflip
    }
}

/// Rotates about the image center with nearest-neighbor sampling, then
/// applies the flips. Output keeps the input dimensions.
pub fn augment(h: &Heightmap, spec: &AugmentSpec) -> Result<Heightmap> {
    spec.validate()?;
    let mut out = if spec.rotation_degrees == 0.0 {
        h.clone()
    } else {
        rotate_nearest(h, spec.rotation_degrees, spec.fill_value)
    };
    if spec.hflip {
        out = flip_horizontal(&out);
    }
    if spec.vflip {
        out = flip_vertical(&out);
    }
    Ok(out)
}

fn rotate_nearest(h: &Heightmap, degrees: f64, fill: u8) -> Heightmap {
    let (w, ht) = (h.width(), h.height());
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (ht as f64 - 1.0) / 2.0;
    let out = Heightmap::from_fn(w, ht, |x, y| {
        // inverse map: output pixel -> source pixel
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let sx = (cos * dx + sin * dy + cx).round();
        let sy = (-sin * dx + cos * dy + cy).round();
        if sx >= 0.0 && sy >= 0.0 && (sx as usize) < w && (sy as usize) < ht {
            h.get(sx as usize, sy as usize)
        } else {
            fill
        }
    });
    out.with_value_range(h.value_range())
}

pub fn flip_horizontal(h: &Heightmap) -> Heightmap {
    let w = h.width();
    Heightmap::from_fn(w, h.height(), |x, y| h.get(w - 1 - x, y)).with_value_range(h.value_range())
}

pub fn flip_vertical(h: &Heightmap) -> Heightmap {
    let ht = h.height();
    Heightmap::from_fn(h.width(), ht, |x, y| h.get(x, ht - 1 - y)).with_value_range(h.value_range())
}

//! Brightness remapping curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heightmap::Heightmap;

/// Monotone intensity curve applied before cropping to spread out low
/// altitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    Identity,
    /// `round(255 * (v / 255)^gamma)`; gamma < 1 brightens lowlands.
    Gamma(f64),
    /// Explicit lookup table.
    Table(Vec<u8>),
}

impl Default for Curve {
    fn default() -> Self {
        Curve::Gamma(0.5)
    }
}

impl Curve {
    /// Builds the 256-entry lookup table, rejecting curves that are not
    /// monotone non-decreasing with `curve(0) == 0`.
    pub fn lut(&self) -> Result<[u8; 256]> {
        let mut lut = [0u8; 256];
        match self {
            Curve::Identity => {
                for (i, v) in lut.iter_mut().enumerate() {
                    *v = i as u8;
                }
            }
            Curve::Gamma(g) => {
                if !(g.is_finite() && *g > 0.0) {
                    return Err(Error::invalid(format!("gamma must be positive, got {g}")));
                }
                for (i, v) in lut.iter_mut().enumerate() {
                    *v = (255.0 * (i as f64 / 255.0).powf(*g)).round() as u8;
                }
            }
            Curve::Table(t) => {
                if t.len() != 256 {
                    return Err(Error::invalid(format!(
                        "curve table needs 256 entries, got {}",
                        t.len()
                    )));
                }
                lut.copy_from_slice(t);
            }
        }
        if lut[0] != 0 {
            return Err(Error::invalid("curve must map 0 to 0"));
        }
        if let Some(i) = lut.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::invalid(format!(
                "curve is not monotone at input {}",
                i + 1
            )));
        }
        Ok(lut)
    }
}

pub fn brightness_remap(h: &Heightmap, curve: &Curve) -> Result<Heightmap> {
    let lut = curve.lut()?;
    let pixels = h.pixels().iter().map(|&p| lut[p as usize]).collect();
    Ok(Heightmap::new(h.width(), h.height(), pixels)?.with_value_range(h.value_range()))
}

use serde::{Deserialize, Serialize};

use crate::heightmap::Heightmap;

/// Value interval a model consumes or produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormRange {
    /// [-1, 1], for tanh-output generators.
    Symmetric,
    /// [0, 1], for sigmoid-output decoders.
    Unit,
}

impl NormRange {
    pub fn bounds(self) -> (f32, f32) {
        match self {
            NormRange::Symmetric => (-1.0, 1.0),
            NormRange::Unit => (0.0, 1.0),
        }
    }

    #[inline]
    pub fn encode(self, p: u8) -> f32 {
        match self {
            NormRange::Symmetric => 2.0 * p as f32 / 255.0 - 1.0,
            NormRange::Unit => p as f32 / 255.0,
        }
    }

    /// Inverse of [`encode`](Self::encode), clamped and rounded to 8 bits.
    #[inline]
    pub fn decode(self, v: f32) -> u8 {
        let unit = match self {
            NormRange::Symmetric => (v + 1.0) * 0.5,
            NormRange::Unit => v,
        };
        (unit.clamp(0.0, 1.0) * 255.0).round() as u8
    }
}

pub fn normalize(t: &Heightmap, range: NormRange) -> Vec<f32> {
    t.pixels().iter().map(|&p| range.encode(p)).collect()
}

pub fn denormalize(values: &[f32], width: usize, height: usize, range: NormRange) -> Heightmap {
    Heightmap::new(width, height, values.iter().map(|&v| range.decode(v)).collect())
        .expect("value count matches dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints() {
        assert_eq!(NormRange::Symmetric.encode(255), 1.0);
        assert_eq!(NormRange::Symmetric.encode(0), -1.0);
        assert_eq!(NormRange::Unit.encode(0), 0.0);
        assert_eq!(NormRange::Unit.encode(255), 1.0);
    }

    #[test]
    fn midpoint_substitution() {
        let v = NormRange::Symmetric.encode(128);
        assert!((v as f64 - (2.0 * 128.0 / 255.0 - 1.0)).abs() < 1e-7);
        assert!((v - 0.003_921_6).abs() < 1e-6);
    }

    #[test]
    fn decode_clamps() {
        assert_eq!(NormRange::Symmetric.decode(3.0), 255);
        assert_eq!(NormRange::Symmetric.decode(-3.0), 0);
        assert_eq!(NormRange::Unit.decode(1.0), 255);
    }

    proptest! {
        #[test]
        fn round_trip_within_one_level(p in any::<u8>(), sym in any::<bool>()) {
            let r = if sym { NormRange::Symmetric } else { NormRange::Unit };
            let v = r.encode(p);
            let back = (v - r.bounds().0) / (r.bounds().1 - r.bounds().0) * 255.0;
            prop_assert!((back - p as f32).abs() <= 1.0);
            prop_assert_eq!(r.decode(v), p);
        }
    }
}

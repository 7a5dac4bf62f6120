//! Tile rejection rules: mostly-water tiles and tiles touched by the
//! augmentation fill value.

use serde::{Deserialize, Serialize};

use crate::heightmap::Heightmap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterRule {
    pub low_threshold: u8,
    pub low_fraction: f64,
    pub sentinel: u8,
}

impl Default for FilterRule {
    fn default() -> Self {
        FilterRule {
            low_threshold: 25,
            low_fraction: 0.95,
            sentinel: 255,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// At least `low_fraction` of pixels are at or below `low_threshold`.
    Water,
    /// Some pixel equals the fill sentinel.
    Sentinel,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RejectReason::Water => "water",
            RejectReason::Sentinel => "sentinel",
        })
    }
}

/// `None` keeps the tile. The fraction test is `>=`.
pub fn filter_tile(t: &Heightmap, rule: &FilterRule) -> Option<RejectReason> {
    let px = t.pixels();
    let mut low = 0usize;
    for &p in px {
        if p == rule.sentinel {
            return Some(RejectReason::Sentinel);
        }
        if p <= rule.low_threshold {
            low += 1;
        }
    }
    if low as f64 >= rule.low_fraction * px.len() as f64 {
        Some(RejectReason::Water)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_is_water() {
        let t = Heightmap::filled(32, 32, 0);
        assert_eq!(filter_tile(&t, &FilterRule::default()), Some(RejectReason::Water));
    }

    #[test]
    fn single_sentinel_rejects() {
        let mut t = Heightmap::filled(32, 32, 120);
        t.set(5, 9, 255);
        assert_eq!(filter_tile(&t, &FilterRule::default()), Some(RejectReason::Sentinel));
    }

    #[test]
    fn ninety_percent_water_is_kept() {
        // 100 pixels: 90 zeros, 10 at 100
        let t = Heightmap::from_fn(10, 10, |x, _| if x == 0 { 100 } else { 0 });
        assert_eq!(t.pixels().iter().filter(|&&p| p == 0).count(), 90);
        assert_eq!(filter_tile(&t, &FilterRule::default()), None);
    }

    #[test]
    fn exactly_threshold_fraction_rejects() {
        // 95 of 100 pixels low
        let t = Heightmap::from_fn(10, 10, |x, y| if y * 10 + x < 95 { 25 } else { 26 });
        assert_eq!(filter_tile(&t, &FilterRule::default()), Some(RejectReason::Water));
        let t = Heightmap::from_fn(10, 10, |x, y| if y * 10 + x < 94 { 25 } else { 26 });
        assert_eq!(filter_tile(&t, &FilterRule::default()), None);
    }
}

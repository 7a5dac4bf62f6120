//! Deterministic synthetic terrain, used for tests, demos and desk-scale runs
//! when no elevation raster is at hand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::heightmap::Heightmap;

struct Bump {
    cx: f64,
    cy: f64,
    radius: f64,
    height: f64,
}

/// Sum-of-Gaussian-bumps terrain. Land-only rasters stay in [40, 230], so
/// they pass the default tile filter everywhere.
pub fn terrain(width: usize, height: usize, seed: u64, with_water: bool) -> Heightmap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = width.max(height) as f64;
    let n = 6 + (scale / 64.0) as usize;
    let bumps: Vec<Bump> = (0..n.min(64))
        .map(|_| Bump {
            cx: rng.random_range(0.0..width as f64),
            cy: rng.random_range(0.0..height as f64),
            radius: rng.random_range(0.08..0.3) * scale,
            height: rng.random_range(-0.6..1.0),
        })
        .collect();
    let field = |x: usize, y: usize| -> f64 {
        bumps
            .iter()
            .map(|b| {
                let dx = x as f64 - b.cx;
                let dy = y as f64 - b.cy;
                b.height * (-(dx * dx + dy * dy) / (2.0 * b.radius * b.radius)).exp()
            })
            .sum()
    };
    let raw: Vec<f64> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| field(x, y))
        .collect();
    let (lo, hi) = raw
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = (hi - lo).max(1e-9);
    let (base, range) = if with_water { (0.0, 240.0) } else { (40.0, 190.0) };
    let pixels = raw
        .iter()
        .map(|&v| (base + range * (v - lo) / span).round() as u8)
        .collect();
    Heightmap::new(width, height, pixels).expect("positive dimensions")
}

/// `n` independent land tiles of `size`×`size`.
pub fn land_tiles(n: usize, size: usize, seed: u64) -> Vec<Heightmap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| terrain(size, size, rng.random(), false))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::filter::{filter_tile, FilterRule};

    #[test]
    fn deterministic() {
        assert_eq!(terrain(64, 48, 3, true), terrain(64, 48, 3, true));
        assert_ne!(terrain(64, 48, 3, true), terrain(64, 48, 4, true));
    }

    #[test]
    fn land_tiles_pass_filter() {
        for t in land_tiles(20, 32, 9) {
            assert_eq!(filter_tile(&t, &FilterRule::default()), None);
        }
    }
}

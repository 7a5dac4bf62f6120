use crate::error::{Error, Result};
use crate::heightmap::Heightmap;

/// Source index for destination index `d` under pixel-center alignment:
/// `floor((d + 0.5) * src / dst)`. A 2→1 reduction therefore picks source
/// index 1.
#[inline]
pub fn nearest_source_index(d: usize, src: usize, dst: usize) -> usize {
    (((2 * d + 1) * src) / (2 * dst)).min(src - 1)
}

pub fn resize_nearest(h: &Heightmap, width: usize, height: usize) -> Result<Heightmap> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("resize target must be at least 1 pixel"));
    }
    let xs: Vec<usize> = (0..width)
        .map(|d| nearest_source_index(d, h.width(), width))
        .collect();
    let ys: Vec<usize> = (0..height)
        .map(|d| nearest_source_index(d, h.height(), height))
        .collect();
    Ok(Heightmap::from_fn(width, height, |x, y| h.get(xs[x], ys[y])).with_value_range(h.value_range()))
}

/// Nearest-neighbor resize to `target`×`target`.
pub fn downscale_nn(h: &Heightmap, target: usize) -> Result<Heightmap> {
    resize_nearest(h, target, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_is_identity() {
        let h = Heightmap::from_fn(128, 128, |x, y| ((x ^ y) & 0xff) as u8);
        assert_eq!(downscale_nn(&h, 128).unwrap(), h);
    }

    #[test]
    fn checkerboard_to_one_pixel_picks_bottom_right() {
        let h = Heightmap::new(2, 2, vec![0, 255, 255, 0]).unwrap();
        let d = downscale_nn(&h, 1).unwrap();
        assert_eq!(d.pixels(), &[0]);
    }

    #[test]
    fn outputs_are_existing_source_values() {
        let h = Heightmap::from_fn(1024, 1024, |x, y| ((x * 3 + y * 5) % 97) as u8 + 100);
        let mut present = [false; 256];
        for &p in h.pixels() {
            present[p as usize] = true;
        }
        let d = downscale_nn(&h, 128).unwrap();
        assert_eq!((d.width(), d.height()), (128, 128));
        assert!(d.pixels().iter().all(|&p| present[p as usize]));
    }

    #[test]
    fn integer_factor_samples_block_centers() {
        let h = Heightmap::from_fn(8, 8, |x, y| (y * 8 + x) as u8);
        let d = downscale_nn(&h, 4).unwrap();
        // floor((2d+1)*8/8) = 2d+1
        assert_eq!(d.get(0, 0), h.get(1, 1));
        assert_eq!(d.get(3, 2), h.get(7, 5));
    }

    #[test]
    fn zero_target_rejected() {
        assert!(downscale_nn(&Heightmap::filled(4, 4, 0), 0).is_err());
    }
}

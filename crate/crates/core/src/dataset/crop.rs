//! Sliding-window cropping.

use crate::error::{Error, Result};
use crate::heightmap::{Heightmap, Raster};

/// Number of window positions along one axis.
pub fn window_count(len: usize, tile: usize, stride: usize) -> usize {
    if tile > len || stride == 0 {
        0
    } else {
        (len - tile) / stride + 1
    }
}

/// A window position; the pixels are copied out only on [`Window::materialize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub row: usize,
    pub col: usize,
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

impl Window {
    pub fn materialize<R: Raster + ?Sized>(&self, src: &R) -> Heightmap {
        Heightmap::from_fn(self.size, self.size, |dx, dy| src.pixel(self.x + dx, self.y + dy))
    }
}

/// Lazy row-major iterator over full-fit windows of a raster.
#[derive(Debug, Clone)]
pub struct SlidingWindows {
    tile: usize,
    stride: usize,
    cols: usize,
    rows: usize,
    next: usize,
}

impl SlidingWindows {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

impl Iterator for SlidingWindows {
    type Item = Window;

    fn next(&mut self) -> Option<Window> {
        if self.next >= self.rows * self.cols {
            return None;
        }
        let (row, col) = (self.next / self.cols, self.next % self.cols);
        self.next += 1;
        Some(Window {
            row,
            col,
            x: col * self.stride,
            y: row * self.stride,
            size: self.tile,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.rows * self.cols - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for SlidingWindows {}

pub fn sliding_windows<R: Raster + ?Sized>(
    src: &R,
    tile: usize,
    stride: usize,
) -> Result<SlidingWindows> {
    if stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    if tile == 0 || tile > src.width().min(src.height()) {
        return Err(Error::invalid(format!(
            "tile {tile} does not fit a {}x{} raster",
            src.width(),
            src.height()
        )));
    }
    Ok(SlidingWindows {
        tile,
        stride,
        cols: window_count(src.width(), tile, stride),
        rows: window_count(src.height(), tile, stride),
        next: 0,
    })
}

/// Crops every full-fit `tile`×`tile` window at offsets `(i·stride, j·stride)`,
/// row-major.
pub fn crop_sliding(h: &Heightmap, tile: usize, stride: usize) -> Result<Vec<Heightmap>> {
    Ok(sliding_windows(h, tile, stride)?
        .map(|w| w.materialize(h))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heightmap::FnRaster;
    use proptest::prelude::*;

    fn brute_force_offsets(w: usize, h: usize, tile: usize, stride: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut y = 0;
        while y + tile <= h {
            let mut x = 0;
            while x + tile <= w {
                out.push((x, y));
                x += stride;
            }
            y += stride;
        }
        out
    }

    #[test]
    fn exact_fit_gives_one_tile() {
        let h = Heightmap::filled(1024, 1024, 7);
        assert_eq!(crop_sliding(&h, 1024, 512).unwrap().len(), 1);
    }

    #[test]
    fn square_4096_gives_49() {
        let r = FnRaster::new(4096, 4096, |_, _| 100);
        let n = sliding_windows(&r, 1024, 512).unwrap().count();
        assert_eq!(n, brute_force_offsets(4096, 4096, 1024, 512).len());
        assert_eq!(n, 49);
    }

    #[test]
    fn tile_larger_than_raster_fails() {
        let h = Heightmap::filled(10, 20, 0);
        assert!(crop_sliding(&h, 11, 1).is_err());
    }

    #[test]
    fn tiles_copy_the_right_pixels() {
        let h = Heightmap::from_fn(6, 4, |x, y| (y * 6 + x) as u8);
        let tiles = crop_sliding(&h, 2, 2).unwrap();
        assert_eq!(tiles.len(), 3 * 2);
        assert_eq!(tiles[1].pixels(), &[2, 3, 8, 9]);
        assert_eq!(tiles[3].pixels(), &[12, 13, 18, 19]);
    }

    proptest! {
        #[test]
        fn count_formula_matches_enumeration(
            w in 1usize..60, h in 1usize..60, tile in 1usize..30, stride in 1usize..20
        ) {
            prop_assume!(tile <= w.min(h));
            let r = FnRaster::new(w, h, |_, _| 0);
            let windows: Vec<_> = sliding_windows(&r, tile, stride).unwrap()
                .map(|win| (win.x, win.y)).collect();
            prop_assert_eq!(windows.len(), window_count(w, tile, stride) * window_count(h, tile, stride));
            prop_assert_eq!(windows, brute_force_offsets(w, h, tile, stride));
        }
    }
}

//! Grayscale raster ingestion and PNG output.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader};

use crate::error::{Error, Result};
use crate::heightmap::{Heightmap, ValueRange};

/// Loads a single-channel 8- or 16-bit raster. 16-bit values are mapped
/// linearly onto [0, 255] with rounding.
pub fn load_raster(path: impl AsRef<Path>) -> Result<Heightmap> {
    let path = path.as_ref();
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::invalid(format!(
            "{}: zero-dimension raster",
            path.display()
        )));
    }
    match img {
        DynamicImage::ImageLuma8(buf) => Heightmap::new(w, h, buf.into_raw()),
        DynamicImage::ImageLuma16(buf) => {
            let pixels = buf.into_raw().into_iter().map(map_u16).collect();
            Ok(Heightmap::new(w, h, pixels)?.with_value_range(ValueRange {
                min: 0.0,
                max: 65535.0,
            }))
        }
        other => Err(Error::invalid(format!(
            "{}: expected a single-channel grayscale raster, found {:?}",
            path.display(),
            other.color()
        ))),
    }
}

#[inline]
fn map_u16(v: u16) -> u8 {
    ((v as u32 * 255 + 32767) / 65535) as u8
}

/// Writes an 8-bit grayscale PNG.
pub fn save_png(h: &Heightmap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img = GrayImage::from_raw(h.width() as u32, h.height() as u32, h.pixels().to_vec())
        .expect("pixel buffer matches dimensions");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageBuffer, Luma, Rgb};

    #[test]
    fn loads_all_zero_8bit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.png");
        GrayImage::new(4, 4).save(&p).unwrap();
        let h = load_raster(&p).unwrap();
        assert_eq!((h.width(), h.height()), (4, 4));
        assert!(h.pixels().iter().all(|&v| v == 0));
    }

    #[test]
    fn maps_16bit_linearly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.png");
        let img: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_raw(3, 1, vec![0, 32768, 65535]).unwrap();
        img.save(&p).unwrap();
        let h = load_raster(&p).unwrap();
        assert_eq!(h.pixels(), &[0, 128, 255]);
        assert_eq!(h.value_range().max, 65535.0);
    }

    #[test]
    fn rejects_multichannel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rgb.png");
        ImageBuffer::<Rgb<u8>, _>::new(2, 2).save(&p).unwrap();
        assert!(matches!(load_raster(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_raster("/definitely/not/here.png"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn png_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rt.png");
        let h = Heightmap::from_fn(7, 5, |x, y| (x * 37 + y * 11) as u8);
        save_png(&h, &p).unwrap();
        assert_eq!(load_raster(&p).unwrap().pixels(), h.pixels());
    }
}

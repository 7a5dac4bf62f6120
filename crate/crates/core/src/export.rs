//! Heightmap images, montage grids and triangle meshes.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::save_png;
use crate::error::{Error, Result};
use crate::heightmap::Heightmap;

pub const SEPARATOR: u8 = 255;

/// 8-bit grayscale PNG.
pub fn save_heightmap(h: &Heightmap, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    save_png(h, path)
}

/// Row-major grid of equally sized tiles separated by 1-pixel lines of
/// [`SEPARATOR`]; unused cells of the last row are filled with it too.
pub fn montage(tiles: &[Heightmap], columns: usize) -> Result<Heightmap> {
    let first = tiles.first().ok_or_else(|| Error::invalid("montage needs at least one tile"))?;
    if columns == 0 {
        return Err(Error::invalid("montage needs at least one column"));
    }
    let (tw, th) = (first.width(), first.height());
    if let Some(t) = tiles.iter().find(|t| (t.width(), t.height()) != (tw, th)) {
        return Err(Error::Shape(format!(
            "montage tiles must share one size: {tw}x{th} vs {}x{}",
            t.width(),
            t.height()
        )));
    }
    let cols = columns.min(tiles.len());
    let rows = tiles.len().div_ceil(cols);
    let width = cols * tw + cols - 1;
    let height = rows * th + rows - 1;
    let mut out = Heightmap::filled(width, height, SEPARATOR);
    for (i, t) in tiles.iter().enumerate() {
        let (ox, oy) = ((i % cols) * (tw + 1), (i / cols) * (th + 1));
        for y in 0..th {
            for x in 0..tw {
                out.set(ox + x, oy + y, t.get(x, y));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainMesh {
    pub vertices: Vec<[f32; 3]>,
    /// Zero-based vertex indices, counter-clockwise seen from +z.
    pub faces: Vec<[u32; 3]>,
}

pub fn default_height_scale(h: &Heightmap) -> f32 {
    0.25 * h.width() as f32
}

/// One vertex per pixel at `(column, height-1-row, scale·p/255)`, so the
/// mesh seen from above matches the image; two triangles per pixel quad.
pub fn heightmap_to_mesh(h: &Heightmap, height_scale: f32) -> Result<TerrainMesh> {
    let (w, ht) = (h.width(), h.height());
    if w < 2 || ht < 2 {
        return Err(Error::invalid(format!("mesh needs at least 2x2 pixels, got {w}x{ht}")));
    }
    let mut vertices = Vec::with_capacity(w * ht);
    for r in 0..ht {
        for c in 0..w {
            let z = height_scale * h.get(c, r) as f32 / 255.0;
            vertices.push([c as f32, (ht - 1 - r) as f32, z]);
        }
    }
    let idx = |r: usize, c: usize| (r * w + c) as u32;
    let mut faces = Vec::with_capacity(2 * (w - 1) * (ht - 1));
    for r in 0..ht - 1 {
        for c in 0..w - 1 {
            let (a, b, d, e) = (idx(r, c), idx(r, c + 1), idx(r + 1, c), idx(r + 1, c + 1));
            faces.push([a, d, e]);
            faces.push([a, e, b]);
        }
    }
    Ok(TerrainMesh { vertices, faces })
}

/// `v x y z` lines, then `f a b c` lines with 1-based indices.
pub fn mesh_to_obj(m: &TerrainMesh) -> String {
    let mut out = String::with_capacity(m.vertices.len() * 24 + m.faces.len() * 20);
    for [x, y, z] in &m.vertices {
        writeln!(out, "v {x} {y} {z}").expect("writing to a String");
    }
    for [a, b, c] in &m.faces {
        writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1).expect("writing to a String");
    }
    out
}

pub fn save_mesh_obj(m: &TerrainMesh, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, mesh_to_obj(m)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tile(v: u8) -> Heightmap {
        Heightmap::filled(8, 8, v)
    }

    #[test]
    fn single_tile_montage_is_unchanged() {
        let t = Heightmap::from_fn(3, 2, |x, y| (x + 10 * y) as u8);
        assert_eq!(montage(std::slice::from_ref(&t), 1).unwrap(), t);
    }

    #[test]
    fn montage_sizes_and_padding() {
        let m = montage(&[tile(0), tile(1), tile(2), tile(3)], 2).unwrap();
        assert_eq!((m.width(), m.height()), (17, 17));
        assert_eq!(m.get(8, 0), SEPARATOR);
        assert_eq!(m.get(9, 9), 3);
        let m = montage(&[tile(0), tile(1), tile(2)], 2).unwrap();
        assert_eq!(m.get(12, 12), SEPARATOR);
        assert_eq!(m.get(3, 12), 2);
        assert!(montage(&[tile(0), Heightmap::filled(4, 4, 0)], 2).is_err());
        assert!(montage(&[], 2).is_err());
    }

    #[test]
    fn quad_mesh() {
        let m = heightmap_to_mesh(&Heightmap::filled(2, 2, 255), 2.0).unwrap();
        assert_eq!((m.vertices.len(), m.faces.len()), (4, 2));
        assert!(m.vertices.iter().all(|v| v[2] == 2.0));
        let obj = mesh_to_obj(&m);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2);
        assert!(heightmap_to_mesh(&Heightmap::filled(1, 5, 0), 1.0).is_err());
    }

    #[test]
    fn faces_wind_counter_clockwise() {
        let m = heightmap_to_mesh(&Heightmap::from_fn(4, 3, |x, y| (x * y) as u8), 1.0).unwrap();
        for f in &m.faces {
            let [a, b, c] = f.map(|i| m.vertices[i as usize]);
            let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            assert!(cross > 0.0);
        }
    }
}

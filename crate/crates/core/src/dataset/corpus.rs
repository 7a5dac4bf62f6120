//! Corpus assembly: augment, crop, filter, downscale; plus the on-disk
//! layout (`tiles/*.png` and `manifest.jsonl`).

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::augment::{augment, AugmentSpec};
use super::crop::sliding_windows;
use super::filter::{filter_tile, FilterRule, RejectReason};
use super::normalize::NormRange;
use super::raster_io::{load_raster, save_png};
use super::resample::downscale_nn;
use crate::error::{Error, Result};
use crate::heightmap::Heightmap;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const TILE_DIR: &str = "tiles";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub rounds: usize,
    pub tile: usize,
    pub stride: usize,
    pub target: usize,
    pub seed: u64,
    pub filter: FilterRule,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            rounds: 15,
            tile: 1024,
            stride: 512,
            target: 128,
            seed: 0,
            filter: FilterRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub tile_id: String,
    pub round: usize,
    pub row: usize,
    pub col: usize,
    pub x: usize,
    pub y: usize,
    pub transform: AugmentSpec,
    pub kept: bool,
    pub reject_reason: Option<RejectReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestHeader {
    tile_size: usize,
    stride: usize,
    target: usize,
    rounds: usize,
    seed: u64,
    kept_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub tile_size: usize,
    pub stride: usize,
    pub target: usize,
    pub rounds: usize,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
    pub kept_count: usize,
}

impl CorpusManifest {
    pub fn kept(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| e.kept)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = ManifestHeader {
            tile_size: self.tile_size,
            stride: self.stride,
            target: self.target,
            rounds: self.rounds,
            seed: self.seed,
            kept_count: self.kept_count,
        };
        let mut write_line = |v: String| writeln!(w, "{v}").map_err(|e| Error::io(path, e));
        write_line(serde_json::to_string(&header).expect("serializable"))?;
        for e in &self.entries {
            write_line(serde_json::to_string(e).expect("serializable"))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(file).lines().enumerate();
        let header: ManifestHeader = match lines.next() {
            Some((_, l)) => {
                let l = l.map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&l).map_err(|e| parse_err(1, e.to_string()))?
            }
            None => return Err(parse_err(1, "empty manifest".into())),
        };
        let mut entries = Vec::new();
        for (i, l) in lines {
            let l = l.map_err(|e| Error::io(path, e))?;
            if l.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str(&l).map_err(|e| parse_err(i + 1, e.to_string()))?);
        }
        let m = CorpusManifest {
            tile_size: header.tile_size,
            stride: header.stride,
            target: header.target,
            rounds: header.rounds,
            seed: header.seed,
            kept_count: header.kept_count,
            entries,
        };
        let kept = m.kept().count();
        if kept != m.kept_count {
            return Err(parse_err(
                1,
                format!("kept_count {} but {} kept entries", m.kept_count, kept),
            ));
        }
        Ok(m)
    }
}

/// Kept tiles in manifest order, all `tile_size`×`tile_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct TileCorpus {
    pub tile_size: usize,
    pub ids: Vec<String>,
    pub tiles: Vec<Heightmap>,
}

impl TileCorpus {
    pub fn from_tiles(tiles: Vec<Heightmap>) -> Result<Self> {
        let first = tiles
            .first()
            .ok_or_else(|| Error::invalid("corpus has no tiles"))?;
        let size = first.width();
        if let Some(bad) = tiles.iter().find(|t| t.width() != size || t.height() != size) {
            return Err(Error::Shape(format!(
                "corpus tiles must all be {size}x{size}, found {}x{}",
                bad.width(),
                bad.height()
            )));
        }
        Ok(TileCorpus {
            tile_size: size,
            ids: (0..tiles.len()).map(|i| format!("t{i:05}")).collect(),
            tiles,
        })
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Tiles normalized into `range`, one flat `size*size` vector each.
    pub fn normalized(&self, range: NormRange) -> Vec<Vec<f32>> {
        self.tiles
            .iter()
            .map(|t| super::normalize::normalize(t, range))
            .collect()
    }

    /// Nearest-neighbor resized copy, used to feed lower-resolution stages.
    pub fn resized(&self, size: usize) -> Result<TileCorpus> {
        Ok(TileCorpus {
            tile_size: size,
            ids: self.ids.clone(),
            tiles: self
                .tiles
                .iter()
                .map(|t| downscale_nn(t, size))
                .collect::<Result<_>>()?,
        })
    }

    pub fn write(&self, dir: impl AsRef<Path>, manifest: &CorpusManifest) -> Result<()> {
        let dir = dir.as_ref();
        let tiles_dir = dir.join(TILE_DIR);
        fs::create_dir_all(&tiles_dir).map_err(|e| Error::io(&tiles_dir, e))?;
        for (id, t) in self.ids.iter().zip(&self.tiles) {
            save_png(t, tile_path(dir, id))?;
        }
        manifest.write(dir.join(MANIFEST_FILE))
    }

    /// Loads a corpus directory written by [`TileCorpus::write`].
    pub fn load(dir: impl AsRef<Path>) -> Result<(TileCorpus, CorpusManifest)> {
        let dir = dir.as_ref();
        let manifest = CorpusManifest::read(dir.join(MANIFEST_FILE))?;
        let mut ids = Vec::with_capacity(manifest.kept_count);
        let mut tiles = Vec::with_capacity(manifest.kept_count);
        for e in manifest.kept() {
            let t = load_raster(tile_path(dir, &e.tile_id))?;
            if t.width() != manifest.target || t.height() != manifest.target {
                return Err(Error::Shape(format!(
                    "tile {} is {}x{}, manifest says {}",
                    e.tile_id,
                    t.width(),
                    t.height(),
                    manifest.target
                )));
            }
            ids.push(e.tile_id.clone());
            tiles.push(t);
        }
        if tiles.is_empty() {
            return Err(Error::invalid(format!("{}: corpus has no kept tiles", dir.display())));
        }
        Ok((
            TileCorpus {
                tile_size: manifest.target,
                ids,
                tiles,
            },
            manifest,
        ))
    }
}

pub fn tile_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(TILE_DIR).join(format!("{id}.png"))
}

pub fn tile_id(round: usize, row: usize, col: usize) -> String {
    format!("r{round:02}_y{row:03}_x{col:03}")
}

/// Runs the augmentation rounds. Round 1 uses the source untouched; later
/// rounds draw an [`AugmentSpec`] from a generator seeded with `cfg.seed`.
///
/// A tile is kept when it passes the filter both at crop resolution and
/// after downscaling to `cfg.target`.
pub fn build_corpus(source: &Heightmap, cfg: &CorpusConfig) -> Result<(TileCorpus, CorpusManifest)> {
    if cfg.rounds == 0 {
        return Err(Error::invalid("rounds must be at least 1"));
    }
    if cfg.target == 0 {
        return Err(Error::invalid("target must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut entries = Vec::new();
    let mut ids = Vec::new();
    let mut tiles = Vec::new();

    for round in 1..=cfg.rounds {
        let spec = if round == 1 {
            AugmentSpec::default()
        } else {
            AugmentSpec::random(&mut rng)
        };
        let img = augment(source, &spec)?;
        let windows: Vec<_> = sliding_windows(&img, cfg.tile, cfg.stride)?.collect();
        let results: Vec<(Option<RejectReason>, Option<Heightmap>)> = windows
            .par_iter()
            .map(|w| {
                let tile = w.materialize(&img);
                if let Some(r) = filter_tile(&tile, &cfg.filter) {
                    return Ok((Some(r), None));
                }
                let small = downscale_nn(&tile, cfg.target)?;
                Ok(match filter_tile(&small, &cfg.filter) {
                    Some(r) => (Some(r), None),
                    None => (None, Some(small)),
                })
            })
            .collect::<Result<_>>()?;
        for (w, (reason, small)) in windows.iter().zip(results) {
            let id = tile_id(round, w.row, w.col);
            let kept = small.is_some();
            if let Some(t) = small {
                ids.push(id.clone());
                tiles.push(t);
            }
            entries.push(ManifestEntry {
                tile_id: id,
                round,
                row: w.row,
                col: w.col,
                x: w.x,
                y: w.y,
                transform: spec,
                kept,
                reject_reason: reason,
            });
        }
    }

    let manifest = CorpusManifest {
        tile_size: cfg.tile,
        stride: cfg.stride,
        target: cfg.target,
        rounds: cfg.rounds,
        seed: cfg.seed,
        kept_count: tiles.len(),
        entries,
    };
    Ok((
        TileCorpus {
            tile_size: cfg.target,
            ids,
            tiles,
        },
        manifest,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic;

    fn small_cfg(rounds: usize) -> CorpusConfig {
        CorpusConfig {
            rounds,
            tile: 64,
            stride: 32,
            target: 16,
            seed: 5,
            filter: FilterRule::default(),
        }
    }

    #[test]
    fn single_round_land_keeps_everything() {
        let src = synthetic::terrain(256, 256, 1, false);
        let (corpus, m) = build_corpus(&src, &small_cfg(1)).unwrap();
        assert_eq!(m.entries.len(), 7 * 7);
        assert_eq!(m.kept_count, 49);
        assert_eq!(corpus.len(), 49);
        assert!(corpus.tiles.iter().all(|t| t.width() == 16 && t.height() == 16));
    }

    #[test]
    fn deterministic_for_seed() {
        let src = synthetic::terrain(200, 160, 2, true);
        let a = build_corpus(&src, &small_cfg(4)).unwrap();
        let b = build_corpus(&src, &small_cfg(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn augmented_rounds_reject_fill_tiles() {
        let src = synthetic::terrain(256, 256, 3, false);
        let (_, m) = build_corpus(&src, &small_cfg(5)).unwrap();
        assert!(m.entries.iter().any(|e| e.reject_reason == Some(RejectReason::Sentinel)));
        assert_eq!(m.kept_count, m.entries.iter().filter(|e| e.kept).count());
        for e in &m.entries {
            assert_eq!(e.kept, e.reject_reason.is_none());
        }
    }

    #[test]
    fn kept_tiles_pass_recheck() {
        let src = synthetic::terrain(256, 256, 4, true);
        let (corpus, _) = build_corpus(&src, &small_cfg(3)).unwrap();
        for t in &corpus.tiles {
            assert_eq!(filter_tile(t, &FilterRule::default()), None);
        }
    }

    #[test]
    fn write_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let src = synthetic::terrain(128, 128, 6, false);
        let (corpus, m) = build_corpus(&src, &small_cfg(2)).unwrap();
        corpus.write(dir.path(), &m).unwrap();
        let (c2, m2) = TileCorpus::load(dir.path()).unwrap();
        assert_eq!(c2, corpus);
        assert_eq!(m2, m);
    }

    #[test]
    fn zero_rounds_rejected() {
        let src = synthetic::terrain(64, 64, 1, false);
        assert!(build_corpus(&src, &small_cfg(0)).is_err());
    }

    #[test]
    fn mixed_tile_sizes_rejected() {
        let r = TileCorpus::from_tiles(vec![Heightmap::filled(4, 4, 1), Heightmap::filled(5, 5, 1)]);
        assert!(r.is_err());
    }
}

//! Elevation raster → training tile corpus.

pub mod augment;
pub mod corpus;
pub mod crop;
pub mod filter;
pub mod normalize;
pub mod raster_io;
pub mod remap;
pub mod resample;
pub mod synthetic;

pub use augment::{augment, AugmentSpec};
pub use corpus::{build_corpus, CorpusConfig, CorpusManifest, ManifestEntry, TileCorpus};
pub use crop::{crop_sliding, sliding_windows, window_count, Window};
pub use filter::{filter_tile, FilterRule, RejectReason};
pub use normalize::{denormalize, normalize, NormRange};
pub use raster_io::{load_raster, save_png};
pub use remap::{brightness_remap, Curve};
pub use resample::downscale_nn;

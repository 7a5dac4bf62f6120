//! Heightmap GAN toolkit: tile corpus preparation, network definitions,
//! training loops, training-curve analysis and terrain export.

pub mod dataset;
pub mod error;
pub mod export;
pub mod heightmap;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod training;

pub use error::{Error, Result};
pub use heightmap::{Heightmap, Raster, ValueRange};

//! Normalized tile tensors, minibatch sampling and seeded RNG streams.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::log::EpochRecord;
use crate::dataset::{NormRange, TileCorpus};
use crate::error::{Error, Result};
use crate::models::Shape3;
use crate::nn::{Network, Tensor};

/// Every corpus tile at one resolution, normalized into a model range.
#[derive(Debug, Clone)]
pub struct TileData {
    pub shape: Shape3,
    pub range: NormRange,
    pub n: usize,
    pub data: Vec<f32>,
}

impl TileData {
    pub fn new(corpus: &TileCorpus, resolution: usize, range: NormRange) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::invalid("training corpus is empty"));
        }
        let resized;
        let src = if corpus.tile_size == resolution {
            corpus
        } else {
            resized = corpus.resized(resolution)?;
            &resized
        };
        let data: Vec<f32> = src.normalized(range).into_iter().flatten().collect();
        Ok(TileData { shape: Shape3::new(1, resolution, resolution), range, n: src.len(), data })
    }

    pub fn gather(&self, idx: &[usize]) -> Tensor {
        let len = self.shape.numel();
        let mut data = Vec::with_capacity(idx.len() * len);
        for &i in idx {
            data.extend_from_slice(&self.data[i * len..(i + 1) * len]);
        }
        Tensor::new(idx.len(), self.shape, data)
    }
}

/// Shuffled pass over `0..n`, reshuffled whenever it is exhausted.
#[derive(Debug, Clone)]
pub struct Sampler {
    order: Vec<usize>,
    pos: usize,
}

impl Sampler {
    pub fn new(n: usize) -> Self {
        Sampler { order: (0..n).collect(), pos: n }
    }

    /// Next minibatch; never spans a reshuffle, so it may be short.
    pub fn next_batch(&mut self, size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        if self.pos >= self.order.len() {
            self.order.shuffle(rng);
            self.pos = 0;
        }
        let end = (self.pos + size).min(self.order.len());
        let out = self.order[self.pos..end].to_vec();
        self.pos = end;
        out
    }
}

/// Independent random streams derived from one seed.
pub struct Rngs {
    pub init: ChaCha8Rng,
    pub data: ChaCha8Rng,
    pub latent: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub dropout: ChaCha8Rng,
}

impl Rngs {
    pub fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        Rngs { init: stream(1), data: stream(2), latent: stream(3), noise: stream(4), dropout: stream(5) }
    }
}

/// Hooks into the training loops; every method defaults to a no-op.
pub trait TrainObserver {
    fn stage_started(&mut self, _stage: &str, _generator: &Network, _critic: &Network) {}
    fn critic_updated(&mut self, _critic: &Network) {}
    fn generator_updated(&mut self, _generator: &Network) {}
    fn epoch_finished(&mut self, _stage: &str, _record: &EpochRecord) {}
}

impl TrainObserver for () {}

/// Where a run writes its artifacts, plus an observer.
pub struct Session<'a> {
    pub out_dir: Option<PathBuf>,
    pub observer: &'a mut dyn TrainObserver,
}

impl<'a> Session<'a> {
    pub fn new(out_dir: Option<PathBuf>, observer: &'a mut dyn TrainObserver) -> Self {
        Session { out_dir, observer }
    }

    pub fn checkpoint_dir(&self) -> Option<PathBuf> {
        self.out_dir.as_ref().map(|d| d.join("checkpoints"))
    }
}

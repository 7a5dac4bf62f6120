use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{denormalize, NormRange};
use crate::error::{Error, Result};
use crate::heightmap::Heightmap;
use crate::models::{LatentSource, Shape3};
use crate::nn::{load_checkpoint, Ctx, Network, Tensor};

const CHUNK: usize = 64;

/// Samples `n` heightmaps from a generator in inference mode.
pub fn generate(net: &mut Network, latent: &LatentSource, n: usize, seed: u64) -> Result<Vec<Heightmap>> {
    let dim = net
        .spec
        .latent_dim()
        .ok_or_else(|| Error::Shape(format!("{} does not take a latent vector", net.spec.name)))?;
    if dim != latent.dim() {
        return Err(Error::Shape(format!("latent width {} does not match generator input {dim}", latent.dim())));
    }
    let out = net.spec.output_shape;
    if out.c != 1 {
        return Err(Error::Shape(format!("{} does not produce single-channel images", net.spec.name)));
    }
    let range = net.spec.output_range().unwrap_or(NormRange::Symmetric);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tiles = Vec::with_capacity(n);
    let mut remaining = n;
    while remaining > 0 {
        let m = remaining.min(CHUNK);
        let z = Tensor::new(m, Shape3::flat(dim), latent.sample(m, &mut rng));
        let y = net.forward(&z, &mut Ctx { train: false, rng: &mut rng });
        for i in 0..m {
            tiles.push(denormalize(y.sample(i), out.w, out.h, range));
        }
        remaining -= m;
    }
    Ok(tiles)
}

pub fn generate_from_checkpoint(path: &Path, latent: &LatentSource, n: usize, seed: u64) -> Result<Vec<Heightmap>> {
    let mut net = load_checkpoint(path)?;
    generate(&mut net, latent, n, seed)
}

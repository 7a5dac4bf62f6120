//! Latent vector sources.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-tile encoder moments captured after VAE training.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentBank {
    pub dim: usize,
    pub mu: Vec<Vec<f32>>,
    pub sigma: Vec<Vec<f32>>,
}

impl MomentBank {
    pub fn new(dim: usize) -> Self {
        MomentBank { dim, mu: Vec::new(), sigma: Vec::new() }
    }

    pub fn push(&mut self, mu: Vec<f32>, sigma: Vec<f32>) -> Result<()> {
        if mu.len() != self.dim || sigma.len() != self.dim {
            return Err(Error::Shape(format!(
                "moment vectors must have length {}, got {} and {}",
                self.dim,
                mu.len(),
                sigma.len()
            )));
        }
        self.mu.push(mu);
        self.sigma.push(sigma);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LatentSource {
    StandardNormal { dim: usize },
    /// Draw a stored `(mu, sigma)` pair uniformly and reparameterize.
    LearnedMoments { bank: MomentBank },
}

impl LatentSource {
    pub fn standard(dim: usize) -> Self {
        LatentSource::StandardNormal { dim }
    }

    pub fn learned(bank: MomentBank) -> Result<Self> {
        if bank.is_empty() {
            return Err(Error::invalid("learned latent source needs a non-empty moment bank"));
        }
        Ok(LatentSource::LearnedMoments { bank })
    }

    pub fn dim(&self) -> usize {
        match self {
            LatentSource::StandardNormal { dim } => *dim,
            LatentSource::LearnedMoments { bank } => bank.dim,
        }
    }

    /// `n` latent vectors, row-major `n × dim`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f32> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(n * dim);
        match self {
            LatentSource::StandardNormal { .. } => {
                out.extend((0..n * dim).map(|_| rng.sample::<f32, _>(StandardNormal)));
            }
            LatentSource::LearnedMoments { bank } => {
                for _ in 0..n {
                    let i = rng.random_range(0..bank.len());
                    let eps: Vec<f32> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                    out.extend(
                        reparameterize(&bank.mu[i], &bank.sigma[i], &eps).expect("bank vectors have dim entries"),
                    );
                }
            }
        }
        out
    }
}

/// `z = mu + sigma ⊙ epsilon`.
pub fn reparameterize(mu: &[f32], sigma: &[f32], epsilon: &[f32]) -> Result<Vec<f32>> {
    if mu.len() != sigma.len() || mu.len() != epsilon.len() {
        return Err(Error::Shape(format!(
            "reparameterize lengths differ: mu {}, sigma {}, epsilon {}",
            mu.len(),
            sigma.len(),
            epsilon.len()
        )));
    }
    Ok(mu
        .iter()
        .zip(sigma)
        .zip(epsilon)
        .map(|((m, s), e)| m + s * e)
        .collect())
}

//! DCGAN / WGAN generator and discriminator, and the VAE encoder/decoder
//! that reuse the same convolutional stacks.

use super::builder::SpecBuilder;
use super::spec::*;
use super::Scale;
use crate::error::{Error, Result};

pub const GAN_LATENT_DIM: usize = 100;
pub const VAE_LATENT_DIM: usize = 512;
pub const DROPOUT_RATE: f32 = 0.5;

const GEN_STEM: usize = 1024;
const GEN_CHANNELS: [usize; 4] = [256, 128, 64, 32];
const DISC_CHANNELS: [usize; 4] = [32, 64, 128, 256];
const ENC_CHANNELS: [usize; 4] = [16, 32, 64, 128];
const ENC_HIDDEN: usize = 1024;
/// Spatial size the conv stacks start from (generator) or end at
/// (discriminator/encoder).
const BASE: usize = 8;

fn stride2_blocks(scale: &Scale) -> Result<usize> {
    match scale.resolution {
        32 => Ok(2),
        64 => Ok(3),
        128 => Ok(4),
        r => Err(Error::invalid(format!(
            "unsupported resolution {r}; expected 32, 64 or 128"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorOptions {
    pub latent_dim: usize,
    pub dropout: bool,
    pub output: Activation,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions {
            latent_dim: GAN_LATENT_DIM,
            dropout: true,
            output: Activation::Tanh,
        }
    }
}

fn generator(name: &str, scale: &Scale, opts: GeneratorOptions) -> Result<ModelSpec> {
    let blocks = stride2_blocks(scale)?;
    let stem = scale.channels(GEN_STEM);
    let mut b = SpecBuilder::new(name, Shape3::flat(opts.latent_dim));
    b.dense("dense", stem * BASE * BASE, Activation::None)
        .reshape("reshape", Shape3::new(stem, BASE, BASE));
    for (i, &ch) in GEN_CHANNELS[..blocks].iter().enumerate() {
        let i = i + 1;
        b.deconv(&format!("deconv{i}"), scale.channels(ch), 2, Activation::None)
            .batchnorm(&format!("bn{i}"))
            .leaky_relu(&format!("lrelu{i}"));
        if opts.dropout {
            b.dropout(&format!("drop{i}"), DROPOUT_RATE);
        }
    }
    b.deconv("to_image", 1, 1, opts.output);
    Ok(b.finish())
}

/// Generator: dense stem to 1024×8×8, stride-2 deconv blocks, tanh head.
/// Desk resolutions keep the leading blocks only.
pub fn build_dcgan_generator(scale: &Scale, dropout: bool) -> Result<ModelSpec> {
    generator(
        "dcgan-g",
        scale,
        GeneratorOptions {
            dropout,
            ..Default::default()
        },
    )
}

fn discriminator(name: &str, scale: &Scale, dropout: bool, head: Activation) -> Result<ModelSpec> {
    let blocks = stride2_blocks(scale)?;
    let r = scale.resolution;
    let mut b = SpecBuilder::new(name, Shape3::new(1, r, r));
    b.conv("conv0", 1, 1, Activation::None).leaky_relu("lrelu0");
    if dropout {
        b.dropout("drop0", DROPOUT_RATE);
    }
    for (i, &ch) in DISC_CHANNELS[..blocks].iter().enumerate() {
        let i = i + 1;
        b.conv(&format!("conv{i}"), scale.channels(ch), 2, Activation::None)
            .batchnorm(&format!("bn{i}"))
            .leaky_relu(&format!("lrelu{i}"));
        if dropout {
            b.dropout(&format!("drop{i}"), DROPOUT_RATE);
        }
    }
    b.flatten("flatten").dense("head", 1, head);
    Ok(b.finish())
}

/// Discriminator with a sigmoid head. `dropout` adds a 50% dropout after
/// every LeakyReLU.
pub fn build_dcgan_discriminator(scale: &Scale, dropout: bool) -> Result<ModelSpec> {
    discriminator("dcgan-d", scale, dropout, Activation::Sigmoid)
}

/// WGAN generator (the DCGAN generator) and critic (the discriminator with
/// a linear head and no dropout).
pub fn build_wgan(scale: &Scale, generator_dropout: bool) -> Result<(ModelSpec, ModelSpec)> {
    let mut g = build_dcgan_generator(scale, generator_dropout)?;
    g.name = "wgan-g".into();
    Ok((g, build_wgan_critic(scale)?))
}

pub fn build_wgan_critic(scale: &Scale) -> Result<ModelSpec> {
    discriminator("wgan-c", scale, false, Activation::Linear)
}

/// Encoder: ReLU conv stack to 128×8×8, dense 1024 + BN + ReLU, then two
/// parallel dense heads `mu` and `sigma` (the latter read as log-variance).
pub fn build_vae_encoder(scale: &Scale, latent_dim: usize) -> Result<ModelSpec> {
    let blocks = stride2_blocks(scale)?;
    let r = scale.resolution;
    let mut b = SpecBuilder::new("vae-enc", Shape3::new(1, r, r));
    for (i, &ch) in ENC_CHANNELS[..blocks].iter().enumerate() {
        let i = i + 1;
        b.conv(&format!("conv{i}"), scale.channels(ch), 2, Activation::None)
            .batchnorm(&format!("bn{i}"))
            .relu(&format!("relu{i}"));
    }
    b.flatten("flatten")
        .dense("fc", scale.channels(ENC_HIDDEN), Activation::None)
        .batchnorm("fc_bn")
        .relu("fc_relu")
        .branch(Branch::Head)
        .dense("mu", latent_dim, Activation::None)
        .dense("sigma", latent_dim, Activation::None);
    Ok(b.finish())
}

/// Decoder: the generator topology with a `latent_dim` input and a sigmoid head.
pub fn build_vae_decoder(scale: &Scale, latent_dim: usize, dropout: bool) -> Result<ModelSpec> {
    generator(
        "vae-dec",
        scale,
        GeneratorOptions {
            latent_dim,
            dropout,
            output: Activation::Sigmoid,
        },
    )
}

//! Network descriptions for every architecture in the toolkit.

mod builder;
pub use builder::SpecBuilder;
pub mod dcgan;
pub mod latent;
pub mod prog;
pub mod spec;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dcgan::{
    build_dcgan_discriminator, build_dcgan_generator, build_vae_decoder, build_vae_encoder, build_wgan,
    build_wgan_critic, GAN_LATENT_DIM, VAE_LATENT_DIM,
};
pub use latent::{reparameterize, LatentSource, MomentBank};
pub use prog::{build_prog_block, build_prog_stage, ProgBlock, ProgStage};
pub use spec::{Activation, AlphaHandle, Branch, LayerKind, LayerSpec, ModelSpec, Shape3};

use crate::error::{Error, Result};

/// Output resolution plus a channel divisor for desk-scale runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub resolution: usize,
    pub width_divisor: usize,
}

impl Scale {
    /// The full-size 128×128 networks.
    pub const FULL: Scale = Scale {
        resolution: 128,
        width_divisor: 1,
    };

    /// 32×32 tiles with every channel count divided by 8.
    pub const DESK: Scale = Scale {
        resolution: 32,
        width_divisor: 8,
    };

    pub fn channels(&self, c: usize) -> usize {
        (c / self.width_divisor.max(1)).max(1)
    }
}

impl Default for Scale {
    fn default() -> Self {
        Scale::FULL
    }
}

/// Names accepted by `inspect`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedModel {
    DcganG,
    DcganD,
    WganC,
    G64,
    C64,
    G128,
    C128,
    Growth,
    CGrowth,
    VaeEnc,
    VaeDec,
}

impl NamedModel {
    pub const ALL: [NamedModel; 11] = [
        NamedModel::DcganG,
        NamedModel::DcganD,
        NamedModel::WganC,
        NamedModel::G64,
        NamedModel::C64,
        NamedModel::G128,
        NamedModel::C128,
        NamedModel::Growth,
        NamedModel::CGrowth,
        NamedModel::VaeEnc,
        NamedModel::VaeDec,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedModel::DcganG => "dcgan-g",
            NamedModel::DcganD => "dcgan-d",
            NamedModel::WganC => "wgan-c",
            NamedModel::G64 => "g64",
            NamedModel::C64 => "c64",
            NamedModel::G128 => "g128",
            NamedModel::C128 => "c128",
            NamedModel::Growth => "growth",
            NamedModel::CGrowth => "c-growth",
            NamedModel::VaeEnc => "vae-enc",
            NamedModel::VaeDec => "vae-dec",
        }
    }

    /// Builds the spec; the DCGAN discriminator comes without dropout and
    /// the generators with it, as tabulated.
    pub fn build(self, scale: &Scale) -> Result<ModelSpec> {
        let alpha = || Some(AlphaHandle::default());
        match self {
            NamedModel::DcganG => build_dcgan_generator(scale, true),
            NamedModel::DcganD => build_dcgan_discriminator(scale, false),
            NamedModel::WganC => build_wgan_critic(scale),
            NamedModel::G64 => build_prog_stage(ProgStage::GenLow, scale, None),
            NamedModel::C64 => build_prog_stage(ProgStage::CriticLow, scale, None),
            NamedModel::G128 => build_prog_stage(ProgStage::GenHigh, scale, None),
            NamedModel::C128 => build_prog_stage(ProgStage::CriticHigh, scale, None),
            NamedModel::Growth => build_prog_stage(ProgStage::GenGrowth, scale, alpha()),
            NamedModel::CGrowth => build_prog_stage(ProgStage::CriticGrowth, scale, alpha()),
            NamedModel::VaeEnc => build_vae_encoder(scale, VAE_LATENT_DIM),
            NamedModel::VaeDec => build_vae_decoder(scale, VAE_LATENT_DIM, true),
        }
    }
}

impl FromStr for NamedModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NamedModel::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown model {s}")))
    }
}

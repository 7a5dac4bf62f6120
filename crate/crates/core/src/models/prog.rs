//! Progressive-growing networks: the named blocks, the low- and
//! high-resolution stages, and the fade-in growth stage.

use std::str::FromStr;

use super::builder::SpecBuilder;
use super::dcgan::GAN_LATENT_DIM;
use super::spec::*;
use super::Scale;
use crate::error::{Error, Result};

const STEM_CHANNELS: usize = 64;
const DECONV1_CHANNELS: usize = 128;
const DECONV2_CHANNELS: usize = 64;
const FROM_IMAGE_LO: usize = 128;
const FROM_IMAGE_HI: usize = 64;
const CONV1_CHANNELS: [usize; 2] = [64, 128];
const CONV2_CHANNELS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgBlock {
    Deconv1,
    Deconv2,
    Conv1,
    Conv2,
}

impl ProgBlock {
    pub fn label(self) -> &'static str {
        match self {
            ProgBlock::Deconv1 => "DECONV_1",
            ProgBlock::Deconv2 => "DECONV_2",
            ProgBlock::Conv1 => "CONV_1",
            ProgBlock::Conv2 => "CONV_2",
        }
    }
}

impl FromStr for ProgBlock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DECONV_1" => Ok(ProgBlock::Deconv1),
            "DECONV_2" => Ok(ProgBlock::Deconv2),
            "CONV_1" => Ok(ProgBlock::Conv1),
            "CONV_2" => Ok(ProgBlock::Conv2),
            _ => Err(Error::invalid(format!("unknown block {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProgStage {
    GenLow,
    CriticLow,
    GenHigh,
    CriticHigh,
    GenGrowth,
    CriticGrowth,
}

impl ProgStage {
    pub fn is_growth(self) -> bool {
        matches!(self, ProgStage::GenGrowth | ProgStage::CriticGrowth)
    }
}

impl FromStr for ProgStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g64" | "g_low" => Ok(ProgStage::GenLow),
            "c64" | "c_low" => Ok(ProgStage::CriticLow),
            "g128" | "g_high" => Ok(ProgStage::GenHigh),
            "c128" | "c_high" => Ok(ProgStage::CriticHigh),
            "g_growth" | "growth" => Ok(ProgStage::GenGrowth),
            "c_growth" => Ok(ProgStage::CriticGrowth),
            _ => Err(Error::invalid(format!("unknown progressive stage {s}"))),
        }
    }
}

fn append_block(b: &mut SpecBuilder, block: ProgBlock, scale: &Scale) {
    b.block(Some(block.label()));
    let none = Activation::None;
    match block {
        ProgBlock::Deconv1 => {
            let ch = scale.channels(DECONV1_CHANNELS);
            b.deconv("d1a", ch, 1, none).batchnorm("d1a_bn").leaky_relu("d1a_act");
            b.deconv("d1b", ch, 1, none).batchnorm("d1b_bn").leaky_relu("d1b_act");
        }
        ProgBlock::Deconv2 => {
            let ch = scale.channels(DECONV2_CHANNELS);
            b.upsample("d2_up");
            b.deconv("d2a", ch, 1, none).batchnorm("d2a_bn").leaky_relu("d2a_act");
            b.deconv("d2b", ch, 1, none).batchnorm("d2b_bn").leaky_relu("d2b_act");
        }
        ProgBlock::Conv1 => {
            b.conv("c1a", scale.channels(CONV1_CHANNELS[0]), 1, none)
                .batchnorm("c1a_bn")
                .leaky_relu("c1a_act");
            b.conv("c1b", scale.channels(CONV1_CHANNELS[1]), 1, none)
                .batchnorm("c1b_bn")
                .leaky_relu("c1b_act");
            b.downsample("c1_down");
        }
        ProgBlock::Conv2 => {
            let ch = scale.channels(CONV2_CHANNELS);
            b.conv("c2a", ch, 1, none).batchnorm("c2a_bn").leaky_relu("c2a_act");
            b.conv("c2b", ch, 1, none).batchnorm("c2b_bn").leaky_relu("c2b_act");
        }
    }
    b.block(None);
}

/// Layer list of one named block, starting from the shape the block
/// consumes inside the stage networks.
pub fn build_prog_block(block: ProgBlock, scale: &Scale) -> Vec<LayerSpec> {
    let (hi, lo) = (scale.resolution, scale.resolution / 2);
    let input = match block {
        ProgBlock::Deconv1 => Shape3::new(scale.channels(STEM_CHANNELS), lo, lo),
        ProgBlock::Deconv2 => Shape3::new(scale.channels(DECONV1_CHANNELS), lo, lo),
        ProgBlock::Conv1 => Shape3::new(scale.channels(FROM_IMAGE_HI), hi, hi),
        ProgBlock::Conv2 => Shape3::new(scale.channels(CONV2_CHANNELS), lo, lo),
    };
    let mut b = SpecBuilder::new(block.label(), input);
    append_block(&mut b, block, scale);
    b.finish().layers
}

fn gen_stem(b: &mut SpecBuilder, scale: &Scale) {
    let lo = scale.resolution / 2;
    let stem = scale.channels(STEM_CHANNELS);
    b.dense("dense", stem * lo * lo, Activation::None)
        .reshape("reshape", Shape3::new(stem, lo, lo));
    append_block(b, ProgBlock::Deconv1, scale);
}

fn critic_tail(b: &mut SpecBuilder, scale: &Scale) {
    append_block(b, ProgBlock::Conv2, scale);
    b.flatten("flatten").dense("head", 1, Activation::Linear);
}

fn from_image_lo(b: &mut SpecBuilder, scale: &Scale) {
    b.conv("from_image_lo", scale.channels(FROM_IMAGE_LO), 1, Activation::None)
        .leaky_relu("from_image_lo_act");
}

fn from_image_hi(b: &mut SpecBuilder, scale: &Scale) {
    b.conv("from_image_hi", scale.channels(FROM_IMAGE_HI), 1, Activation::None)
        .leaky_relu("from_image_hi_act");
}

/// Builds one stage network. Growth stages blend the low-resolution path
/// (weight `1 - alpha`) with the new high-resolution path (weight `alpha`)
/// and require the shared `alpha` handle.
///
/// Generator growth: `(1-a) * upsample(to_image_lo(x)) + a * to_image_hi(DECONV_2(x))`.
/// Critic growth: `(1-a) * from_image_lo(downsample(img)) + a * CONV_1(from_image_hi(img))`,
/// followed by `CONV_2` and the linear head.
pub fn build_prog_stage(stage: ProgStage, scale: &Scale, alpha: Option<AlphaHandle>) -> Result<ModelSpec> {
    let (hi, lo) = (scale.resolution, scale.resolution / 2);
    if hi < 8 || hi % 2 != 0 {
        return Err(Error::invalid(format!("unsupported progressive resolution {hi}")));
    }
    if stage.is_growth() && alpha.is_none() {
        return Err(Error::invalid("growth stages need an alpha handle"));
    }
    let latent = Shape3::flat(GAN_LATENT_DIM);
    let mut spec = match stage {
        ProgStage::GenLow => {
            let mut b = SpecBuilder::new(&format!("g{lo}"), latent);
            gen_stem(&mut b, scale);
            b.deconv("to_image_lo", 1, 1, Activation::Tanh);
            b.finish()
        }
        ProgStage::GenHigh => {
            let mut b = SpecBuilder::new(&format!("g{hi}"), latent);
            gen_stem(&mut b, scale);
            append_block(&mut b, ProgBlock::Deconv2, scale);
            b.deconv("to_image_hi", 1, 1, Activation::Tanh);
            b.finish()
        }
        ProgStage::GenGrowth => {
            let mut b = SpecBuilder::new("g_growth", latent);
            gen_stem(&mut b, scale);
            b.branch(Branch::FadeOld)
                .deconv("to_image_lo", 1, 1, Activation::Tanh)
                .upsample("fade_up");
            b.branch(Branch::FadeNew);
            append_block(&mut b, ProgBlock::Deconv2, scale);
            b.deconv("to_image_hi", 1, 1, Activation::Tanh);
            b.weighted_sum("fade");
            b.finish()
        }
        ProgStage::CriticLow => {
            let mut b = SpecBuilder::new(&format!("c{lo}"), Shape3::new(1, lo, lo));
            from_image_lo(&mut b, scale);
            critic_tail(&mut b, scale);
            b.finish()
        }
        ProgStage::CriticHigh => {
            let mut b = SpecBuilder::new(&format!("c{hi}"), Shape3::new(1, hi, hi));
            from_image_hi(&mut b, scale);
            append_block(&mut b, ProgBlock::Conv1, scale);
            critic_tail(&mut b, scale);
            b.finish()
        }
        ProgStage::CriticGrowth => {
            let mut b = SpecBuilder::new("c_growth", Shape3::new(1, hi, hi));
            b.branch(Branch::FadeOld).downsample("fade_down");
            from_image_lo(&mut b, scale);
            b.branch(Branch::FadeNew);
            from_image_hi(&mut b, scale);
            append_block(&mut b, ProgBlock::Conv1, scale);
            b.weighted_sum("fade");
            critic_tail(&mut b, scale);
            b.finish()
        }
    };
    if stage.is_growth() {
        spec.alpha = alpha;
    }
    Ok(spec)
}

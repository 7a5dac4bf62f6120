//! Training configuration and the experiment presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Scale;
use crate::nn::OptimizerKind;

/// Epoch count used by `--desk-scale` when no explicit override is given.
pub const DESK_EPOCHS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Dcgan,
    Wgan,
    Proggan,
    Vae,
    VaeWgan,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Dcgan => "dcgan",
            Variant::Wgan => "wgan",
            Variant::Proggan => "proggan",
            Variant::Vae => "vae",
            Variant::VaeWgan => "vae_wgan",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "dcgan" => Ok(Variant::Dcgan),
            "wgan" => Ok(Variant::Wgan),
            "proggan" => Ok(Variant::Proggan),
            "vae" => Ok(Variant::Vae),
            "vae_wgan" => Ok(Variant::VaeWgan),
            _ => Err(Error::Config(format!("unknown variant {s}"))),
        }
    }

    pub fn default_optimizer(self) -> OptimizerKind {
        match self {
            Variant::Dcgan => OptimizerKind::Adam { lr: 0.0002, beta1: 0.5 },
            Variant::Vae => OptimizerKind::Rmsprop { lr: 0.0003 },
            Variant::Wgan | Variant::Proggan | Variant::VaeWgan => OptimizerKind::Rmsprop { lr: 0.0005 },
        }
    }
}

/// Generator/critic topology for the adversarial variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// The DCGAN generator and discriminator (critic head when Wasserstein).
    #[default]
    Dcgan,
    /// The full-resolution progressive networks trained directly.
    ProgHigh,
    /// The VAE decoder (sigmoid head, VAE latent width) as generator.
    VaeDecoder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSchedule {
    #[default]
    None,
    Schedule1,
    Schedule2,
    /// The second schedule exactly as printed; constant zero after the midpoint.
    #[deprecated(note = "evaluates to zero after the midpoint; use Schedule2")]
    Schedule2Literal,
    Schedule3,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Hindering {
    pub instance_noise: NoiseSchedule,
    /// One-sided smoothing: real targets become `1 - beta`. Zero disables.
    pub label_smoothing_beta: f32,
    /// Dropout after each discriminator LeakyReLU.
    pub dropout: bool,
}

impl Hindering {
    pub const ALL_SCHEDULE1: Hindering = Hindering {
        instance_noise: NoiseSchedule::Schedule1,
        label_smoothing_beta: 0.2,
        dropout: true,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentMode {
    #[default]
    StandardNormal,
    LearnedMoments,
}

/// VAE reconstruction term.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reconstruction {
    /// Pixel-wise binary cross-entropy, summed over pixels.
    #[default]
    Bce,
    /// Squared error between critic features of `x` and `x_hat` at `layer`,
    /// using a frozen critic loaded from `critic_checkpoint`.
    CriticFeatures { critic_checkpoint: String, layer: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub variant: Variant,
    pub architecture: Architecture,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub hindering: Hindering,
    pub clip_c: f32,
    pub n_critic: usize,
    pub latent: LatentMode,
    pub seed: u64,
    /// Progressive stages: low resolution, growth, high resolution.
    pub stage_epochs: Vec<usize>,
    /// Dropout after each generator LeakyReLU, as in the generator table.
    pub generator_dropout: bool,
    /// Periodic checkpoint cadence in epochs; zero keeps only the final one.
    pub checkpoint_every: usize,
    pub scale: Scale,
    pub reconstruction: Reconstruction,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::new(Variant::Dcgan, 1000)
    }
}

impl TrainConfig {
    pub fn new(variant: Variant, epochs: usize) -> Self {
        TrainConfig {
            variant,
            architecture: Architecture::default(),
            epochs,
            batch_size: 64,
            optimizer: variant.default_optimizer(),
            hindering: Hindering::default(),
            clip_c: 0.1,
            n_critic: 5,
            latent: LatentMode::StandardNormal,
            seed: 0,
            stage_epochs: Vec::new(),
            generator_dropout: true,
            checkpoint_every: 50,
            scale: Scale::FULL,
            reconstruction: Reconstruction::Bce,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.epochs == 0 {
            return bad("epochs must be positive".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.clip_c.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return bad(format!("clip_c must be positive, got {}", self.clip_c));
        }
        if self.n_critic == 0 {
            return bad("n_critic must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.hindering.label_smoothing_beta) {
            return bad("label_smoothing_beta must lie in [0, 1)".into());
        }
        if self.hindering.instance_noise != NoiseSchedule::None && self.epochs < 2 {
            return bad("noise schedules need at least two epochs".into());
        }
        if self.optimizer.lr() <= 0.0 {
            return bad("learning rate must be positive".into());
        }
        if self.variant == Variant::Proggan {
            if self.stage_epochs.len() != 3 || self.stage_epochs.contains(&0) {
                return bad("proggan needs three positive stage_epochs".into());
            }
            if self.stage_epochs.iter().sum::<usize>() != self.epochs {
                return bad("proggan epochs must equal the sum of stage_epochs".into());
            }
        }
        if self.latent == LatentMode::LearnedMoments && self.variant != Variant::VaeWgan {
            return bad("learned_moments latent is only available to vae_wgan".into());
        }
        Ok(())
    }

    /// Replaces the epoch budget; progressive runs get `epochs` per stage.
    pub fn set_epochs(&mut self, epochs: usize) {
        if self.variant == Variant::Proggan {
            self.stage_epochs = vec![epochs; 3];
            self.epochs = 3 * epochs;
        } else {
            self.epochs = epochs;
        }
    }
}

/// A named experiment: one or more training stages run in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub id: String,
    pub description: String,
    pub stages: Vec<TrainConfig>,
}

pub const PRESET_IDS: [&str; 11] = ["e1", "e2", "e3", "e4", "e5", "e6", "e7", "e8", "e9", "e10", "e11"];

fn builtin_source(id: &str) -> Option<&'static str> {
    Some(match id {
        "e1" => include_str!("../../presets/e1.toml"),
        "e2" => include_str!("../../presets/e2.toml"),
        "e3" => include_str!("../../presets/e3.toml"),
        "e4" => include_str!("../../presets/e4.toml"),
        "e5" => include_str!("../../presets/e5.toml"),
        "e6" => include_str!("../../presets/e6.toml"),
        "e7" => include_str!("../../presets/e7.toml"),
        "e8" => include_str!("../../presets/e8.toml"),
        "e9" => include_str!("../../presets/e9.toml"),
        "e10" => include_str!("../../presets/e10.toml"),
        "e11" => include_str!("../../presets/e11.toml"),
        _ => return None,
    })
}

impl Preset {
    pub fn builtin(id: &str) -> Result<Preset> {
        let id = id.to_ascii_lowercase();
        let src = builtin_source(&id).ok_or_else(|| Error::Config(format!("unknown preset {id}")))?;
        Preset::from_toml(src)
    }

    pub fn from_toml(src: &str) -> Result<Preset> {
        let p: Preset = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        if p.stages.is_empty() {
            return Err(Error::Config(format!("preset {} has no stages", p.id)));
        }
        for s in &p.stages {
            s.validate()?;
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Preset> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Preset::from_toml(&src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("preset serializes")
    }

    /// Single-stage preset built from defaults for `variant`.
    pub fn ad_hoc(variant: Variant, epochs: usize) -> Preset {
        let mut stages = Vec::new();
        if variant == Variant::VaeWgan {
            stages.push(TrainConfig::new(Variant::Vae, epochs));
        }
        let mut cfg = TrainConfig::new(variant, epochs);
        if variant == Variant::Proggan {
            cfg.set_epochs(epochs);
        }
        if variant == Variant::VaeWgan {
            cfg.architecture = Architecture::VaeDecoder;
        }
        stages.push(cfg);
        Preset { id: variant.as_str().into(), description: format!("{} with default settings", variant.as_str()), stages }
    }

    pub fn set_epochs(&mut self, epochs: usize) {
        self.stages.iter_mut().for_each(|s| s.set_epochs(epochs));
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.stages.iter_mut().for_each(|s| s.seed = seed);
    }

    pub fn set_scale(&mut self, scale: Scale) {
        self.stages.iter_mut().for_each(|s| s.scale = scale);
    }

    /// Desk-scale run: small networks on 32×32 tiles and a short budget.
    pub fn desk_scale(&mut self, epochs: Option<usize>) {
        self.set_scale(Scale::DESK);
        self.set_epochs(epochs.unwrap_or(DESK_EPOCHS));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtin_presets_parse() {
        for id in PRESET_IDS {
            let p = Preset::builtin(id).unwrap();
            assert_eq!(p.id, id);
        }
        assert!(Preset::builtin("e12").is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut c = TrainConfig::new(Variant::Wgan, 10);
        c.clip_c = 0.0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::new(Variant::Wgan, 10);
        c.n_critic = 0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::new(Variant::Proggan, 10);
        c.stage_epochs = vec![5, 5];
        assert!(c.validate().is_err());
        c.set_epochs(4);
        assert!(c.validate().is_ok());
        assert_eq!(c.epochs, 12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let src = "id = \"x\"\ndescription = \"\"\n[[stages]]\nvariant = \"dcgan\"\nepochs = 3\nlearning_rate = 1\n";
        assert!(Preset::from_toml(src).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let p = Preset::builtin("e9").unwrap();
        assert_eq!(Preset::from_toml(&p.to_toml()).unwrap(), p);
    }
}

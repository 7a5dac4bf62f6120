//! Runs every stage of a preset in order, chaining VAE outputs into the
//! following decoder-as-generator stage.

use std::path::PathBuf;

use super::config::{Preset, Variant};
use super::data::Session;
use super::gan::{train_dcgan, train_proggan, train_wgan, GanOutcome};
use super::generate::generate;
use super::log::{write_file, TrainLog};
use super::vae::{train_vae, train_vae_wgan};
use crate::dataset::TileCorpus;
use crate::error::{Error, Result};
use crate::export::{montage, save_heightmap};
use crate::models::{LatentSource, MomentBank};
use crate::nn::Network;

pub const SAMPLE_COUNT: usize = 16;

#[derive(Debug)]
pub struct RunOutcome {
    pub logs: Vec<TrainLog>,
    pub checkpoints: Vec<PathBuf>,
    /// Generator (or VAE decoder) of the last stage.
    pub generator: Network,
    pub moments: Option<MomentBank>,
}

pub fn run_preset(corpus: &TileCorpus, preset: &Preset, session: &mut Session) -> Result<RunOutcome> {
    if let Some(dir) = &session.out_dir {
        write_file(&dir.join("config.toml"), &preset.to_toml())?;
    }
    let mut logs = Vec::new();
    let mut checkpoints = Vec::new();
    let mut vae: Option<(Network, MomentBank)> = None;
    let mut last: Option<(Network, LatentSource, u64)> = None;
    for cfg in &preset.stages {
        let gan = |o: GanOutcome, logs: &mut Vec<TrainLog>, ck: &mut Vec<PathBuf>| {
            logs.extend(o.logs);
            ck.extend(o.checkpoints);
            o.generator
        };
        let g = match cfg.variant {
            Variant::Dcgan => gan(train_dcgan(corpus, cfg, session)?, &mut logs, &mut checkpoints),
            Variant::Wgan => gan(train_wgan(corpus, cfg, session)?, &mut logs, &mut checkpoints),
            Variant::Proggan => gan(train_proggan(corpus, cfg, session)?, &mut logs, &mut checkpoints),
            Variant::Vae => {
                let o = train_vae(corpus, cfg, session)?;
                logs.push(o.log);
                checkpoints.extend(o.checkpoints);
                vae = Some((o.decoder.clone(), o.moments));
                o.decoder
            }
            Variant::VaeWgan => {
                let (decoder, bank) = vae
                    .as_ref()
                    .ok_or_else(|| Error::Config("a vae_wgan stage must follow a vae stage".into()))?;
                gan(train_vae_wgan(corpus, cfg, decoder, Some(bank), session)?, &mut logs, &mut checkpoints)
            }
        };
        let dim = g.spec.latent_dim().unwrap_or(0);
        let latent = match (&vae, cfg.latent) {
            (Some((_, bank)), super::config::LatentMode::LearnedMoments) => LatentSource::learned(bank.clone())?,
            _ => LatentSource::standard(dim),
        };
        last = Some((g, latent, cfg.seed));
    }
    let (mut generator, latent, seed) = last.expect("presets have at least one stage");
    if let Some(dir) = &session.out_dir {
        let samples = generate(&mut generator, &latent, SAMPLE_COUNT, seed)?;
        save_heightmap(&montage(&samples, 4)?, &dir.join("samples.png"))?;
    }
    Ok(RunOutcome { logs, checkpoints, generator, moments: vae.map(|(_, b)| b) })
}

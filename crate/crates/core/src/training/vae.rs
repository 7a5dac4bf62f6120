//! VAE training and the VAE-decoder-as-generator Wasserstein stage.

use std::path::{Path, PathBuf};

use rand_distr::{Distribution, StandardNormal};

use super::config::{Architecture, LatentMode, Reconstruction, TrainConfig, Variant};
use super::data::{Rngs, Sampler, Session, TileData};
use super::gan::{adversarial_specs, run_wgan_stage, GanOutcome, WganStage};
use super::log::{write_file, Accumulator, TrainLog};
use super::losses::{bce_logit_grad, kl_from_log_var, vae_loss};
use super::stage::StageLog;
use crate::dataset::{NormRange, TileCorpus};
use crate::error::{Error, Result};
use crate::models::{build_vae_decoder, build_vae_encoder, reparameterize, LatentSource, MomentBank, Shape3, VAE_LATENT_DIM};
use crate::nn::{load_checkpoint, Ctx, Network, Optimizer, Tensor};

pub const MOMENTS_FILE: &str = "moments.json";

#[derive(Debug)]
pub struct VaeOutcome {
    pub log: TrainLog,
    pub encoder: Network,
    pub decoder: Network,
    pub moments: MomentBank,
    pub checkpoints: Vec<PathBuf>,
}

/// Encoder heads as `(mu, log_var)`; the sigma head is read as log-variance.
fn encode(enc: &mut Network, x: &Tensor, ctx: &mut Ctx) -> (Tensor, Tensor) {
    let mut outs = enc.forward_all(x, ctx);
    let log_var = outs.pop().expect("sigma head");
    let mu = outs.pop().expect("mu head");
    (mu, log_var)
}

fn std_from_log_var(lv: &[f32]) -> Vec<f32> {
    lv.iter().map(|v| (0.5 * v).exp()).collect()
}

/// Frozen critic used for the feature-space reconstruction term.
struct FeatureCritic {
    net: Network,
    layer: String,
}

impl FeatureCritic {
    fn load(checkpoint: &str, layer: &str) -> Result<Self> {
        let net = load_checkpoint(Path::new(checkpoint))?;
        if net.spec.layer(layer).is_none() {
            return Err(Error::Config(format!("critic {} has no layer {layer}", net.spec.name)));
        }
        Ok(FeatureCritic { net, layer: layer.to_string() })
    }

    /// Half squared feature distance, batch-averaged, and its gradient
    /// with respect to `x_hat`.
    fn loss_and_grad(&mut self, x: &Tensor, x_hat: &Tensor, ctx: &mut Ctx) -> Result<(f64, Tensor)> {
        let fx = self.net.forward_to(x, &self.layer, ctx)?;
        let fh = self.net.forward_to(x_hat, &self.layer, ctx)?;
        let m = x.n as f32;
        let loss = fh.data.iter().zip(&fx.data).map(|(a, b)| 0.5 * ((a - b) as f64).powi(2)).sum::<f64>() / m as f64;
        let g = Tensor::new(fh.n, fh.shape, fh.data.iter().zip(&fx.data).map(|(a, b)| (a - b) / m).collect());
        let dx = self.net.backward_from(g, &self.layer)?;
        self.net.zero_grad();
        Ok((loss, dx))
    }
}

pub fn train_vae(corpus: &TileCorpus, cfg: &TrainConfig, session: &mut Session) -> Result<VaeOutcome> {
    cfg.validate()?;
    if cfg.variant != Variant::Vae {
        return Err(Error::Config(format!("train_vae cannot run variant {}", cfg.variant.as_str())));
    }
    let mut rngs = Rngs::new(cfg.seed);
    let mut enc = Network::new(build_vae_encoder(&cfg.scale, VAE_LATENT_DIM)?, &mut rngs.init)?;
    let mut dec = Network::new(build_vae_decoder(&cfg.scale, VAE_LATENT_DIM, cfg.generator_dropout)?, &mut rngs.init)?;
    let data = TileData::new(corpus, cfg.scale.resolution, NormRange::Unit)?;
    let mut features = match &cfg.reconstruction {
        Reconstruction::Bce => None,
        Reconstruction::CriticFeatures { critic_checkpoint, layer } => Some(FeatureCritic::load(critic_checkpoint, layer)?),
    };
    let mut enc_opt = Optimizer::new(cfg.optimizer);
    let mut dec_opt = Optimizer::new(cfg.optimizer);
    let dim = VAE_LATENT_DIM;

    session.observer.stage_started("vae", &dec, &enc);
    let mut stage = StageLog::new("vae", session, cfg.checkpoint_every);
    let mut sampler = Sampler::new(data.n);
    let steps = data.n.div_ceil(cfg.batch_size);
    for epoch in 0..cfg.epochs {
        stage.start_epoch();
        let mut acc = Accumulator::default();
        for _ in 0..steps {
            let idx = sampler.next_batch(cfg.batch_size, &mut rngs.data);
            let m = idx.len();
            let x = data.gather(&idx);
            let mut ctx = Ctx { train: true, rng: &mut rngs.dropout };
            let (mu, log_var) = encode(&mut enc, &x, &mut ctx);
            let std = std_from_log_var(&log_var.data);
            let eps: Vec<f32> = (0..m * dim).map(|_| StandardNormal.sample(&mut rngs.latent)).collect();
            let z = reparameterize(&mu.data, &std, &eps)?;
            let x_hat = dec.forward(&Tensor::new(m, Shape3::flat(dim), z), &mut ctx);

            let (recon, dz) = match features.as_mut() {
                None => {
                    let l = vae_loss(&x.data, &x_hat.data, &mu.data, &std, m)?;
                    let g = bce_logit_grad(&x_hat.data, &x.data);
                    // bce_logit_grad averages over every pixel; the loss sums pixels.
                    let per_sample = x.sample_len() as f32;
                    let g = Tensor::new(m, x_hat.shape, g.into_iter().map(|v| v * per_sample).collect());
                    (l.reconstruction, dec.backward(g, true))
                }
                Some(fc) => {
                    let mut eval = Ctx { train: false, rng: &mut rngs.dropout };
                    let (l, dxh) = fc.loss_and_grad(&x, &x_hat, &mut eval)?;
                    (l, dec.backward(dxh, false))
                }
            };
            let kl = kl_from_log_var(&mu.data, &log_var.data) / m as f64;
            let inv_m = 1.0 / m as f32;
            let dmu: Vec<f32> = dz.data.iter().zip(&mu.data).map(|(g, u)| g + u * inv_m).collect();
            let dlv: Vec<f32> = (0..m * dim)
                .map(|i| dz.data[i] * eps[i] * 0.5 * std[i] + 0.5 * (std[i] * std[i] - 1.0) * inv_m)
                .collect();
            enc.backward_heads(vec![Tensor::new(m, mu.shape, dmu), Tensor::new(m, log_var.shape, dlv)]);
            enc_opt.step(&mut enc);
            dec_opt.step(&mut dec);
            stage.session().observer.generator_updated(&dec);
            acc.add("vae_loss", recon + kl);
            acc.add("reconstruction", recon);
            acc.add("kl", kl);
        }
        stage.end_epoch(epoch, acc.means(), &[("enc", &enc), ("dec", &dec)])?;
    }
    let moments = capture_moments(&mut enc, &data, &mut rngs)?;
    if let Some(dir) = &stage.session().out_dir {
        write_file(&dir.join(MOMENTS_FILE), &serde_json::to_string(&moments).expect("moments serialize"))?;
    }
    let (log, checkpoints) = stage.finish(&[("enc", &enc), ("dec", &dec)])?;
    Ok(VaeOutcome { log, encoder: enc, decoder: dec, moments, checkpoints })
}

/// Encoder `(mu, sigma)` for every tile, in corpus order.
pub fn capture_moments(enc: &mut Network, data: &TileData, rngs: &mut Rngs) -> Result<MomentBank> {
    let dim = enc.layers.last().map(|l| l.spec.out_shape.numel()).unwrap_or(0);
    let mut bank = MomentBank::new(dim);
    let all: Vec<usize> = (0..data.n).collect();
    for chunk in all.chunks(64) {
        let x = data.gather(chunk);
        let mut ctx = Ctx { train: false, rng: &mut rngs.dropout };
        let (mu, lv) = encode(enc, &x, &mut ctx);
        let std = std_from_log_var(&lv.data);
        for (m, s) in mu.data.chunks(dim).zip(std.chunks(dim)) {
            bank.push(m.to_vec(), s.to_vec())?;
        }
    }
    Ok(bank)
}

pub fn load_moments(path: &Path) -> Result<MomentBank> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&s).map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line(), message: e.to_string() })
}

/// Wasserstein training whose generator starts as a copy of `decoder`.
pub fn train_vae_wgan(
    corpus: &TileCorpus,
    cfg: &TrainConfig,
    decoder: &Network,
    moments: Option<&MomentBank>,
    session: &mut Session,
) -> Result<GanOutcome> {
    cfg.validate()?;
    if cfg.variant != Variant::VaeWgan || cfg.architecture != Architecture::VaeDecoder {
        return Err(Error::Config("train_vae_wgan needs variant vae_wgan with the vae_decoder architecture".into()));
    }
    let dim = decoder
        .spec
        .latent_dim()
        .ok_or_else(|| Error::Shape("decoder does not take a latent vector".into()))?;
    let latent = match cfg.latent {
        LatentMode::StandardNormal => LatentSource::standard(dim),
        LatentMode::LearnedMoments => {
            let bank = moments.ok_or_else(|| Error::Config("learned_moments latent needs a moment bank".into()))?;
            if bank.dim != dim {
                return Err(Error::Shape(format!("moment bank width {} does not match decoder input {dim}", bank.dim)));
            }
            LatentSource::learned(bank.clone())?
        }
    };
    let (_, cs) = adversarial_specs(cfg)?;
    if decoder.spec.output_shape != cs.input_shape {
        return Err(Error::Shape(format!(
            "decoder output {} does not match critic input {}",
            decoder.spec.output_shape, cs.input_shape
        )));
    }
    let mut rngs = Rngs::new(cfg.seed);
    let mut g = decoder.clone();
    let mut c = Network::new(cs, &mut rngs.init)?;
    let data = TileData::new(corpus, cfg.scale.resolution, NormRange::Unit)?;
    let st = WganStage { name: "vae_wgan", epochs: cfg.epochs, alpha: None, latent: &latent };
    let (log, checkpoints) = run_wgan_stage(st, &mut g, &mut c, &data, cfg, &mut rngs, session)?;
    Ok(GanOutcome { logs: vec![log], generator: g, critic: c, checkpoints })
}

/// As [`train_vae_wgan`], reading the decoder (and optionally the moment
/// bank) from disk.
pub fn train_vae_wgan_from_files(
    corpus: &TileCorpus,
    cfg: &TrainConfig,
    decoder_checkpoint: &Path,
    moments: Option<&Path>,
    session: &mut Session,
) -> Result<GanOutcome> {
    let decoder = load_checkpoint(decoder_checkpoint)?;
    let bank = moments.map(load_moments).transpose()?;
    train_vae_wgan(corpus, cfg, &decoder, bank.as_ref(), session)
}

//! Adversarial training: DCGAN with hindering, WGAN with weight clipping,
//! and the staged progressive variant.

use std::path::PathBuf;

use super::config::{Architecture, TrainConfig, Variant};
use super::data::{Rngs, Sampler, Session, TileData};
use super::log::{Accumulator, TrainLog};
use super::losses::{bce, bce_logit_grad, critic_score_grads, generator_score_grad, wasserstein_losses};
use super::noise::{apply_instance_noise, noise_factor};
use super::stage::StageLog;
use crate::dataset::{NormRange, TileCorpus};
use crate::error::{Error, Result};
use crate::models::spec::{AlphaHandle, ModelSpec};
use crate::models::{
    build_dcgan_discriminator, build_dcgan_generator, build_prog_stage, build_vae_decoder, build_wgan,
    build_wgan_critic, LatentSource, ProgStage, Shape3, VAE_LATENT_DIM,
};
use crate::nn::{clip_weights, Ctx, Network, Optimizer, Tensor};

/// Everything an adversarial run produces.
#[derive(Debug)]
pub struct GanOutcome {
    pub logs: Vec<TrainLog>,
    pub generator: Network,
    pub critic: Network,
    pub checkpoints: Vec<PathBuf>,
}

/// Generator and discriminator/critic specs for a configuration.
pub fn adversarial_specs(cfg: &TrainConfig) -> Result<(ModelSpec, ModelSpec)> {
    let s = &cfg.scale;
    let gd = cfg.generator_dropout;
    match (cfg.variant, cfg.architecture) {
        (Variant::Dcgan, Architecture::Dcgan) => {
            Ok((build_dcgan_generator(s, gd)?, build_dcgan_discriminator(s, cfg.hindering.dropout)?))
        }
        (Variant::Wgan | Variant::VaeWgan, Architecture::Dcgan) => build_wgan(s, gd),
        (Variant::Wgan | Variant::VaeWgan, Architecture::ProgHigh) => Ok((
            build_prog_stage(ProgStage::GenHigh, s, None)?,
            build_prog_stage(ProgStage::CriticHigh, s, None)?,
        )),
        (Variant::Wgan | Variant::VaeWgan, Architecture::VaeDecoder) => {
            Ok((build_vae_decoder(s, VAE_LATENT_DIM, gd)?, build_wgan_critic(s)?))
        }
        (v, a) => Err(Error::Config(format!("architecture {a:?} is not available to {}", v.as_str()))),
    }
}

pub(crate) fn latent_batch(src: &LatentSource, n: usize, rngs: &mut Rngs) -> Tensor {
    Tensor::new(n, Shape3::flat(src.dim()), src.sample(n, &mut rngs.latent))
}

fn data_range(g: &Network) -> NormRange {
    g.spec.output_range().unwrap_or(NormRange::Symmetric)
}

fn expect_variant(cfg: &TrainConfig, allowed: &[Variant]) -> Result<()> {
    cfg.validate()?;
    if !allowed.contains(&cfg.variant) {
        return Err(Error::Config(format!("this loop cannot train variant {}", cfg.variant.as_str())));
    }
    Ok(())
}

pub fn train_dcgan(corpus: &TileCorpus, cfg: &TrainConfig, session: &mut Session) -> Result<GanOutcome> {
    expect_variant(cfg, &[Variant::Dcgan])?;
    let (gs, ds) = adversarial_specs(cfg)?;
    let mut rngs = Rngs::new(cfg.seed);
    let mut g = Network::new(gs, &mut rngs.init)?;
    let mut d = Network::new(ds, &mut rngs.init)?;
    let range = data_range(&g);
    let data = TileData::new(corpus, cfg.scale.resolution, range)?;
    let latent = LatentSource::standard(g.spec.latent_dim().expect("generator takes a latent vector"));
    let mut g_opt = Optimizer::new(cfg.optimizer);
    let mut d_opt = Optimizer::new(cfg.optimizer);
    let real_target = 1.0 - cfg.hindering.label_smoothing_beta;
    let bounds = range.bounds();

    session.observer.stage_started("dcgan", &g, &d);
    let mut stage = StageLog::new("dcgan", session, cfg.checkpoint_every);
    let mut sampler = Sampler::new(data.n);
    let steps = data.n.div_ceil(cfg.batch_size);
    for epoch in 0..cfg.epochs {
        stage.start_epoch();
        let factor = noise_factor(cfg.hindering.instance_noise, epoch, cfg.epochs.max(2))?;
        let mut acc = Accumulator::default();
        for _ in 0..steps {
            let idx = sampler.next_batch(cfg.batch_size, &mut rngs.data);
            let m = idx.len();
            let mut real = data.gather(&idx);
            let z = latent_batch(&latent, m, &mut rngs);
            let mut ctx = Ctx { train: true, rng: &mut rngs.dropout };
            let mut fake = g.forward(&z, &mut ctx);

            apply_instance_noise(&mut real.data, factor, bounds, &mut rngs.noise);
            apply_instance_noise(&mut fake.data, factor, bounds, &mut rngs.noise);
            let mut ctx = Ctx { train: true, rng: &mut rngs.dropout };
            let p_real = d.forward(&real, &mut ctx);
            let t_real = vec![real_target; m];
            let loss_real = bce(&p_real.data, &t_real);
            d.backward(Tensor::new(m, p_real.shape, bce_logit_grad(&p_real.data, &t_real)), true);
            let p_fake = d.forward(&fake, &mut ctx);
            let t_fake = vec![0.0; m];
            let loss_fake = bce(&p_fake.data, &t_fake);
            d.backward(Tensor::new(m, p_fake.shape, bce_logit_grad(&p_fake.data, &t_fake)), true);
            d_opt.step(&mut d);
            stage.session().observer.critic_updated(&d);

            let z = latent_batch(&latent, m, &mut rngs);
            let mut ctx = Ctx { train: true, rng: &mut rngs.dropout };
            let fake = g.forward(&z, &mut ctx);
            // D stays in training mode here so its batch statistics match the D step.
            let p = d.forward(&fake, &mut ctx);
            let t = vec![1.0; m];
            let loss_g = bce(&p.data, &t);
            let dx = d.backward(Tensor::new(m, p.shape, bce_logit_grad(&p.data, &t)), true);
            d.zero_grad();
            g.backward(dx, false);
            g_opt.step(&mut g);
            stage.session().observer.generator_updated(&g);

            acc.add("loss_d", 0.5 * (loss_real + loss_fake));
            acc.add("loss_d_real", loss_real);
            acc.add("loss_d_fake", loss_fake);
            acc.add("loss_g", loss_g);
        }
        let mut metrics = acc.means();
        metrics.push(("noise_factor".into(), factor));
        stage.end_epoch(epoch, metrics, &[("g", &g), ("d", &d)])?;
    }
    let (log, checkpoints) = stage.finish(&[("g", &g), ("d", &d)])?;
    Ok(GanOutcome { logs: vec![log], generator: g, critic: d, checkpoints })
}

/// Inputs to one Wasserstein training stage.
pub(crate) struct WganStage<'n> {
    pub name: &'n str,
    pub epochs: usize,
    pub alpha: Option<AlphaHandle>,
    pub latent: &'n LatentSource,
}

/// Runs one Wasserstein stage: per generator step, `n_critic` critic
/// updates each followed by weight clipping.
pub(crate) fn run_wgan_stage(
    st: WganStage,
    g: &mut Network,
    c: &mut Network,
    data: &TileData,
    cfg: &TrainConfig,
    rngs: &mut Rngs,
    session: &mut Session,
) -> Result<(TrainLog, Vec<PathBuf>)> {
    if st.latent.dim() != g.spec.latent_dim().unwrap_or(0) {
        return Err(Error::Shape(format!(
            "latent width {} does not match generator input {}",
            st.latent.dim(),
            g.spec.input_shape
        )));
    }
    let mut g_opt = Optimizer::new(cfg.optimizer);
    let mut c_opt = Optimizer::new(cfg.optimizer);
    session.observer.stage_started(st.name, g, c);
    let mut stage = StageLog::new(st.name, session, cfg.checkpoint_every);
    let mut sampler = Sampler::new(data.n);
    let steps = data.n.div_ceil(cfg.batch_size);
    for epoch in 0..st.epochs {
        stage.start_epoch();
        if let Some(a) = &st.alpha {
            a.set(if st.epochs > 1 { epoch as f32 / (st.epochs - 1) as f32 } else { 1.0 });
        }
        let mut acc = Accumulator::default();
        for _ in 0..steps {
            for _ in 0..cfg.n_critic {
                let idx = sampler.next_batch(cfg.batch_size, &mut rngs.data);
                let m = idx.len();
                let real = data.gather(&idx);
                let z = latent_batch(st.latent, m, rngs);
                let mut ctx = Ctx { train: true, rng: &mut rngs.dropout };
                let fake = g.forward(&z, &mut ctx);
                let (g_real, g_fake) = critic_score_grads(m, m);
                let s_real = c.forward(&real, &mut ctx);
                c.backward(Tensor::new(m, s_real.shape, g_real), false);
                let s_fake = c.forward(&fake, &mut ctx);
                c.backward(Tensor::new(m, s_fake.shape, g_fake), false);
                c_opt.step(c);
                clip_weights(c, cfg.clip_c);
                stage.session().observer.critic_updated(c);
                let to64 = |t: &Tensor| t.data.iter().map(|&v| v as f64).collect::<Vec<_>>();
                let w = wasserstein_losses(&to64(&s_real), &to64(&s_fake))?;
                acc.add("west_real", w.estimate_real);
                acc.add("west_fake", w.estimate_fake);
                acc.add("west_gap", w.gap);
                acc.add("loss_c", w.critic_loss);
            }
            let m = cfg.batch_size.min(data.n);
            let z = latent_batch(st.latent, m, rngs);
            let mut ctx = Ctx { train: true, rng: &mut rngs.dropout };
            let fake = g.forward(&z, &mut ctx);
            let s = c.forward(&fake, &mut ctx);
            let mean = s.data.iter().map(|&v| v as f64).sum::<f64>() / m as f64;
            let dx = c.backward(Tensor::new(m, s.shape, generator_score_grad(m)), false);
            c.zero_grad();
            g.backward(dx, false);
            g_opt.step(g);
            stage.session().observer.generator_updated(g);
            acc.add("west_g", mean);
            acc.add("loss_g", -mean);
        }
        let mut metrics = acc.means();
        if let Some(a) = &st.alpha {
            metrics.push(("alpha".into(), a.get() as f64));
        }
        stage.end_epoch(epoch, metrics, &[("g", g), ("c", c)])?;
    }
    stage.finish(&[("g", g), ("c", c)])
}

pub fn train_wgan(corpus: &TileCorpus, cfg: &TrainConfig, session: &mut Session) -> Result<GanOutcome> {
    expect_variant(cfg, &[Variant::Wgan])?;
    let (gs, cs) = adversarial_specs(cfg)?;
    let mut rngs = Rngs::new(cfg.seed);
    let mut g = Network::new(gs, &mut rngs.init)?;
    let mut c = Network::new(cs, &mut rngs.init)?;
    let data = TileData::new(corpus, cfg.scale.resolution, data_range(&g))?;
    let latent = LatentSource::standard(g.spec.latent_dim().expect("generator takes a latent vector"));
    let st = WganStage { name: "wgan", epochs: cfg.epochs, alpha: None, latent: &latent };
    let (log, checkpoints) = run_wgan_stage(st, &mut g, &mut c, &data, cfg, &mut rngs, session)?;
    Ok(GanOutcome { logs: vec![log], generator: g, critic: c, checkpoints })
}

/// Low resolution, then growth with a linear fade-in, then full
/// resolution. Each stage starts from fresh networks that inherit every
/// parameter whose name and shape match the previous stage.
pub fn train_proggan(corpus: &TileCorpus, cfg: &TrainConfig, session: &mut Session) -> Result<GanOutcome> {
    expect_variant(cfg, &[Variant::Proggan])?;
    let scale = cfg.scale;
    let mut rngs = Rngs::new(cfg.seed);
    let alpha = AlphaHandle::new(0.0);
    let mut logs = Vec::new();
    let mut checkpoints = Vec::new();
    let latent = LatentSource::standard(crate::models::GAN_LATENT_DIM);

    let stages = [
        ("proggan_low", ProgStage::GenLow, ProgStage::CriticLow, None),
        ("proggan_growth", ProgStage::GenGrowth, ProgStage::CriticGrowth, Some(alpha.clone())),
        ("proggan_high", ProgStage::GenHigh, ProgStage::CriticHigh, None),
    ];
    let mut prev: Option<(Network, Network)> = None;
    for (i, (name, gstage, cstage, a)) in stages.into_iter().enumerate() {
        let mut g = Network::new(build_prog_stage(gstage, &scale, a.clone())?, &mut rngs.init)?;
        let mut c = Network::new(build_prog_stage(cstage, &scale, a.clone())?, &mut rngs.init)?;
        if let Some((pg, pc)) = &prev {
            g.transfer_from(pg);
            c.transfer_from(pc);
        }
        let data = TileData::new(corpus, c.spec.input_shape.h, data_range(&g))?;
        let st = WganStage { name, epochs: cfg.stage_epochs[i], alpha: a, latent: &latent };
        let (log, ck) = run_wgan_stage(st, &mut g, &mut c, &data, cfg, &mut rngs, session)?;
        logs.push(log);
        checkpoints.extend(ck);
        prev = Some((g, c));
    }
    let (generator, critic) = prev.expect("three stages ran");
    Ok(GanOutcome { logs, generator, critic, checkpoints })
}

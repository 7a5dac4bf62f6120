//! Training loops for every variant, their losses and schedules, and the
//! experiment presets.

pub mod config;
pub mod data;
pub mod gan;
pub mod generate;
pub mod log;
pub mod losses;
pub mod noise;
pub mod run;
mod stage;
pub mod vae;

pub use config::{Architecture, Hindering, LatentMode, NoiseSchedule, Preset, Reconstruction, TrainConfig, Variant, DESK_EPOCHS, PRESET_IDS};
pub use data::{Rngs, Sampler, Session, TileData, TrainObserver};
pub use gan::{adversarial_specs, train_dcgan, train_proggan, train_wgan, GanOutcome};
pub use generate::{generate, generate_from_checkpoint};
pub use log::{EpochRecord, TrainLog};
pub use losses::{
    bce, bce_logit_grad, critic_score_grads, generator_score_grad, kl_divergence, kl_from_log_var, vae_loss,
    wasserstein_losses, VaeLoss, WassersteinLosses,
};
pub use noise::{apply_instance_noise, noise_factor};
pub use run::{run_preset, RunOutcome};
pub use vae::{capture_moments, load_moments, train_vae, train_vae_wgan, train_vae_wgan_from_files, VaeOutcome, MOMENTS_FILE};

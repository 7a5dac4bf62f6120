//! Loss values and their gradients.

use crate::error::{Error, Result};

/// Keras' clipping constant for probabilities inside cross-entropy.
pub const PROB_EPSILON: f64 = 1e-7;

/// Mean binary cross-entropy of probabilities `p` against `targets`.
pub fn bce(p: &[f32], targets: &[f32]) -> f64 {
    assert_eq!(p.len(), targets.len());
    let sum: f64 = p.iter().zip(targets).map(|(&p, &t)| bce_term(p as f64, t as f64)).sum();
    sum / p.len() as f64
}

fn bce_term(p: f64, t: f64) -> f64 {
    let p = p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
}

/// Gradient of [`bce`] with respect to the logits feeding a sigmoid that
/// produced `p`: `(p - t) / n`.
pub fn bce_logit_grad(p: &[f32], targets: &[f32]) -> Vec<f32> {
    let n = p.len() as f32;
    p.iter().zip(targets).map(|(p, t)| (p - t) / n).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WassersteinLosses {
    pub critic_loss: f64,
    pub generator_loss: f64,
    pub estimate_real: f64,
    pub estimate_fake: f64,
    pub gap: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn wasserstein_losses(scores_real: &[f64], scores_fake: &[f64]) -> Result<WassersteinLosses> {
    if scores_real.is_empty() || scores_fake.is_empty() {
        return Err(Error::invalid("wasserstein_losses needs non-empty score vectors"));
    }
    let r = mean(scores_real);
    let f = mean(scores_fake);
    Ok(WassersteinLosses {
        critic_loss: f - r,
        generator_loss: -f,
        estimate_real: r,
        estimate_fake: f,
        gap: r - f,
    })
}

/// Gradients of `critic_loss` with respect to the real and fake scores.
pub fn critic_score_grads(n_real: usize, n_fake: usize) -> (Vec<f32>, Vec<f32>) {
    (vec![-1.0 / n_real as f32; n_real], vec![1.0 / n_fake as f32; n_fake])
}

/// Gradient of `generator_loss` with respect to the fake scores.
pub fn generator_score_grad(n_fake: usize) -> Vec<f32> {
    vec![-1.0 / n_fake as f32; n_fake]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaeLoss {
    pub total: f64,
    pub reconstruction: f64,
    pub kl: f64,
}

/// KL divergence of `N(mu, sigma²)` from `N(0, 1)`, summed over dimensions:
/// `-½ Σ (1 + log σ² − μ² − σ²)`.
pub fn kl_divergence(mu: &[f32], sigma: &[f32]) -> f64 {
    mu.iter()
        .zip(sigma)
        .map(|(&m, &s)| {
            let (m, s) = (m as f64, s as f64);
            let var = s * s;
            -0.5 * (1.0 + var.ln() - m * m - var)
        })
        .sum()
}

/// Same divergence parameterized by log-variance.
pub fn kl_from_log_var(mu: &[f32], log_var: &[f32]) -> f64 {
    mu.iter()
        .zip(log_var)
        .map(|(&m, &lv)| {
            let (m, lv) = (m as f64, lv as f64);
            -0.5 * (1.0 + lv - m * m - lv.exp())
        })
        .sum()
}

/// Batch-averaged VAE loss over `n` samples: reconstruction BCE summed over
/// pixels plus KL summed over latent dimensions.
pub fn vae_loss(x: &[f32], x_hat: &[f32], mu: &[f32], sigma: &[f32], n: usize) -> Result<VaeLoss> {
    if x.len() != x_hat.len() || mu.len() != sigma.len() || n == 0 || !x.len().is_multiple_of(n) || !mu.len().is_multiple_of(n) {
        return Err(Error::Shape(format!(
            "vae_loss: x {} / x_hat {} / mu {} / sigma {} for {n} samples",
            x.len(),
            x_hat.len(),
            mu.len(),
            sigma.len()
        )));
    }
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("vae_loss: target value {v} outside [0, 1]")));
    }
    let recon: f64 = x.iter().zip(x_hat).map(|(&t, &p)| bce_term(p as f64, t as f64)).sum::<f64>() / n as f64;
    let kl = kl_divergence(mu, sigma) / n as f64;
    Ok(VaeLoss { total: recon + kl, reconstruction: recon, kl })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bce_of_half_is_ln2() {
        let l = bce(&[0.5, 0.5], &[1.0, 0.0]);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_example() {
        let w = wasserstein_losses(&[1.0, 3.0], &[0.0, -2.0]).unwrap();
        assert_eq!(w.critic_loss, -3.0);
        assert_eq!(w.gap, 3.0);
        assert_eq!(wasserstein_losses(&[1.0], &[-4.0]).unwrap().generator_loss, 4.0);
        let same = wasserstein_losses(&[0.7, 0.1], &[0.7, 0.1]).unwrap();
        assert_eq!((same.critic_loss, same.gap), (0.0, 0.0));
        assert!(wasserstein_losses(&[], &[1.0]).is_err());
    }

    #[test]
    fn vae_loss_examples() {
        let l = vae_loss(&[0.5; 4], &[0.5; 4], &[0.0], &[1.0], 1).unwrap();
        assert!((l.reconstruction - 4.0 * std::f64::consts::LN_2).abs() < 1e-6);
        assert_eq!(l.kl, 0.0);
        assert!((kl_divergence(&[1.0], &[1.0]) - 0.5).abs() < 1e-12);
        assert!((kl_from_log_var(&[1.0], &[0.0]) - 0.5).abs() < 1e-12);
        assert!(vae_loss(&[1.5], &[0.5], &[0.0], &[1.0], 1).is_err());
        assert!(vae_loss(&[0.5; 2], &[0.5], &[0.0], &[1.0], 1).is_err());
    }
}

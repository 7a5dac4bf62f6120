//! Instance-noise schedules.

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::NoiseSchedule;
use crate::error::{Error, Result};

const PEAK: f64 = 0.5;

/// Noise scale at `epoch` of `epochs`; the midpoint is `epochs / 2`.
#[allow(deprecated)]
pub fn noise_factor(schedule: NoiseSchedule, epoch: usize, epochs: usize) -> Result<f64> {
    if epochs < 2 || epoch > epochs {
        return Err(Error::invalid(format!("noise_factor: epoch {epoch} outside 0..={epochs} (epochs must be >= 2)")));
    }
    let (e, total) = (epoch as f64, epochs as f64);
    let half = total / 2.0;
    let rising = e * PEAK / half;
    let descent = PEAK - (e - half) * PEAK / half;
    Ok(match schedule {
        NoiseSchedule::None => 0.0,
        NoiseSchedule::Schedule1 => e * PEAK / total,
        NoiseSchedule::Schedule3 if e <= half => rising,
        NoiseSchedule::Schedule3 => descent,
        NoiseSchedule::Schedule2 if e <= half => rising,
        NoiseSchedule::Schedule2 => 0.5 * descent,
        NoiseSchedule::Schedule2Literal if e <= half => rising,
        NoiseSchedule::Schedule2Literal => PEAK - e * PEAK / e,
    })
}

/// Adds `factor · N(0, 1)` to every value, then clamps to `[lo, hi]`.
pub fn apply_instance_noise<R: Rng + ?Sized>(batch: &mut [f32], factor: f64, range: (f32, f32), rng: &mut R) {
    if factor == 0.0 {
        return;
    }
    let f = factor as f32;
    for v in batch.iter_mut() {
        let n: f32 = rng.sample(StandardNormal);
        *v = (*v + f * n).clamp(range.0, range.1);
    }
}

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::network::Network;

const KERAS_EPSILON: f32 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam { lr: f32, beta1: f32 },
    Rmsprop { lr: f32 },
}

impl OptimizerKind {
    pub fn lr(&self) -> f32 {
        match *self {
            OptimizerKind::Adam { lr, .. } | OptimizerKind::Rmsprop { lr } => lr,
        }
    }

    pub fn with_lr(self, lr: f32) -> Self {
        match self {
            OptimizerKind::Adam { beta1, .. } => OptimizerKind::Adam { lr, beta1 },
            OptimizerKind::Rmsprop { .. } => OptimizerKind::Rmsprop { lr },
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Slot {
    m: Vec<f32>,
    v: Vec<f32>,
}

/// Stateful optimizer; per-parameter state is keyed by parameter name.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    slots: HashMap<String, Slot>,
    steps: u64,
}

impl Optimizer {
    pub const BETA2: f32 = 0.999;
    pub const RHO: f32 = 0.9;

    pub fn new(kind: OptimizerKind) -> Self {
        Optimizer { kind, slots: HashMap::new(), steps: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies the accumulated gradients and clears them.
    pub fn step(&mut self, net: &mut Network) {
        self.steps += 1;
        let t = self.steps as i32;
        for p in net.params_mut().filter(|p| p.trainable) {
            let slot = self.slots.entry(p.name.clone()).or_default();
            if slot.v.len() != p.value.len() {
                slot.m = vec![0.0; p.value.len()];
                slot.v = vec![0.0; p.value.len()];
            }
            match self.kind {
                OptimizerKind::Adam { lr, beta1 } => {
                    let b2 = Self::BETA2;
                    let lr_t = lr * (1.0 - b2.powi(t)).sqrt() / (1.0 - beta1.powi(t));
                    for i in 0..p.value.len() {
                        let g = p.grad[i];
                        slot.m[i] = beta1 * slot.m[i] + (1.0 - beta1) * g;
                        slot.v[i] = b2 * slot.v[i] + (1.0 - b2) * g * g;
                        p.value[i] -= lr_t * slot.m[i] / (slot.v[i].sqrt() + KERAS_EPSILON);
                    }
                }
                OptimizerKind::Rmsprop { lr } => {
                    let rho = Self::RHO;
                    for i in 0..p.value.len() {
                        let g = p.grad[i];
                        slot.v[i] = rho * slot.v[i] + (1.0 - rho) * g * g;
                        p.value[i] -= lr * g / (slot.v[i].sqrt() + KERAS_EPSILON);
                    }
                }
            }
            p.zero_grad();
        }
    }
}

/// Clamps every trainable parameter of `net` into `[-c, c]`.
pub fn clip_weights(net: &mut Network, c: f32) {
    assert!(c > 0.0, "clip constant must be positive");
    for p in net.params_mut().filter(|p| p.trainable) {
        p.value.iter_mut().for_each(|w| *w = w.clamp(-c, c));
    }
}

/// Largest absolute trainable parameter value.
pub fn max_abs_weight(net: &Network) -> f32 {
    net.params()
        .filter(|p| p.trainable)
        .flat_map(|p| p.value.iter())
        .fold(0.0f32, |m, w| m.max(w.abs()))
}

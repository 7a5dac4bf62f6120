//! Declarative network descriptions.

use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::NormRange;

/// Kernel size of every conv/deconv layer.
pub const KERNEL: usize = 5;
pub const LEAKY_SLOPE: f32 = 0.2;
pub const INIT_STD: f32 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape3 {
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape3 {
    pub const fn new(c: usize, h: usize, w: usize) -> Self {
        Shape3 { c, h, w }
    }

    pub const fn flat(n: usize) -> Self {
        Shape3 { c: n, h: 1, w: 1 }
    }

    pub fn numel(&self) -> usize {
        self.c * self.h * self.w
    }
}

impl fmt::Display for Shape3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.c, self.h, self.w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Dense,
    Conv,
    Deconv,
    BatchNorm,
    LeakyRelu,
    Relu,
    Dropout,
    Flatten,
    Reshape,
    Upsample,
    Downsample,
    WeightedSum,
}

impl LayerKind {
    pub fn table_name(self) -> &'static str {
        match self {
            LayerKind::Dense => "Dense",
            LayerKind::Conv => "Conv",
            LayerKind::Deconv => "Deconv",
            LayerKind::BatchNorm => "BatchNorm",
            LayerKind::LeakyRelu => "LeakyReLU",
            LayerKind::Relu => "ReLU",
            LayerKind::Dropout => "Dropout",
            LayerKind::Flatten => "Flatten",
            LayerKind::Reshape => "Reshape",
            LayerKind::Upsample => "UpSampling",
            LayerKind::Downsample => "Downsample",
            LayerKind::WeightedSum => "WeightedSum",
        }
    }

    pub fn has_weights(self) -> bool {
        matches!(self, LayerKind::Dense | LayerKind::Conv | LayerKind::Deconv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    None,
    LeakyRelu,
    Relu,
    Tanh,
    Sigmoid,
    Linear,
}

impl Activation {
    pub fn table_name(self) -> &'static str {
        match self {
            Activation::None => "-",
            Activation::LeakyRelu => "LeakyReLU",
            Activation::Relu => "ReLU",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Linear => "linear",
        }
    }

    /// Value interval of the activation's output, when bounded.
    pub fn output_range(self) -> Option<NormRange> {
        match self {
            Activation::Tanh => Some(NormRange::Symmetric),
            Activation::Sigmoid => Some(NormRange::Unit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    Same,
}

/// Where a layer sits relative to a fade-in blend or a multi-head output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Trunk,
    /// Low-resolution path of a fade-in, weighted by `1 - alpha`.
    FadeOld,
    /// High-resolution path of a fade-in, weighted by `alpha`.
    FadeNew,
    /// Parallel output head reading the trunk output.
    Head,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    /// Unique within the model; parameter names are `{name}.{param}` and
    /// weights transfer between models by name.
    pub name: String,
    pub kind: LayerKind,
    pub kernel: Option<usize>,
    pub stride: usize,
    pub padding: Padding,
    pub activation: Activation,
    pub in_shape: Shape3,
    pub out_shape: Shape3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropout_rate: Option<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaky_slope: Option<f32>,
    #[serde(default)]
    pub branch: Branch,
    /// Named block from the architecture tables (e.g. `DECONV_1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
}

impl LayerSpec {
    pub fn table_name(&self) -> String {
        if self.branch == Branch::Head {
            format!("{} ({})", self.name, self.kind.table_name())
        } else {
            self.kind.table_name().to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub mean: f32,
    pub std: f32,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            mean: 0.0,
            std: INIT_STD,
        }
    }
}

/// Shared fade-in weight read by `weighted_sum` layers.
#[derive(Debug, Clone)]
pub struct AlphaHandle(Arc<AtomicU32>);

impl AlphaHandle {
    pub fn new(alpha: f32) -> Self {
        AlphaHandle(Arc::new(AtomicU32::new(alpha.clamp(0.0, 1.0).to_bits())))
    }

    pub fn get(&self) -> f32 {
        f32::from_bits(self.0.load(Ordering::Relaxed))
    }

    pub fn set(&self, alpha: f32) {
        self.0.store(alpha.clamp(0.0, 1.0).to_bits(), Ordering::Relaxed)
    }
}

impl Default for AlphaHandle {
    fn default() -> Self {
        AlphaHandle::new(0.0)
    }
}

impl PartialEq for AlphaHandle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub input_shape: Shape3,
    pub output_shape: Shape3,
    pub layers: Vec<LayerSpec>,
    pub init: InitSpec,
    #[serde(skip)]
    pub alpha: Option<AlphaHandle>,
}

impl ModelSpec {
    pub fn layer(&self, name: &str) -> Option<&LayerSpec> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn has_fade(&self) -> bool {
        self.layers.iter().any(|l| l.kind == LayerKind::WeightedSum)
    }

    /// Latent width for models fed by a dense layer from a vector input.
    pub fn latent_dim(&self) -> Option<usize> {
        (self.input_shape.h == 1 && self.input_shape.w == 1).then_some(self.input_shape.c)
    }

    /// Output interval of the final trunk layer, if bounded.
    pub fn output_range(&self) -> Option<NormRange> {
        self.layers
            .iter()
            .rev()
            .find(|l| l.branch != Branch::Head)
            .and_then(|l| l.activation.output_range())
    }

    pub fn final_activation(&self) -> Activation {
        self.layers
            .iter()
            .rev()
            .find(|l| l.kind.has_weights())
            .map(|l| l.activation)
            .unwrap_or(Activation::None)
    }

    pub fn weighted_layers(&self) -> impl Iterator<Item = &LayerSpec> {
        self.layers.iter().filter(|l| l.kind.has_weights())
    }

    /// One row per layer: `block | layer | activation | input | output`.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for l in &self.layers {
            let block = l.block.as_deref().unwrap_or("-");
            out.push_str(&format!(
                "{} | {} | {} | {} | {}\n",
                block,
                l.table_name(),
                l.activation.table_name(),
                l.in_shape,
                l.out_shape
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec is serializable")
    }
}

/// Output extent of a SAME-padded convolution.
pub fn conv_out(len: usize, stride: usize) -> usize {
    len.div_ceil(stride)
}

/// Output extent of a SAME-padded transposed convolution.
pub fn deconv_out(len: usize, stride: usize) -> usize {
    len * stride
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_handle_is_shared_and_clamped() {
        let a = AlphaHandle::new(0.0);
        let b = a.clone();
        b.set(0.25);
        assert_eq!(a.get(), 0.25);
        a.set(4.0);
        assert_eq!(b.get(), 1.0);
        assert_eq!(a, b);
        assert_ne!(a, AlphaHandle::new(1.0));
    }

    #[test]
    fn shape_arithmetic() {
        assert_eq!(conv_out(128, 1), 128);
        assert_eq!(conv_out(128, 2), 64);
        assert_eq!(conv_out(7, 2), 4);
        assert_eq!(deconv_out(8, 2), 16);
    }
}

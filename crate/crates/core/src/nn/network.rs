//! Executes a [`ModelSpec`] forward and backward, including fade-in blends
//! and parallel output heads.

use rand::RngCore;

use super::layers::{Ctx, Layer};
use super::tensor::{Param, Tensor};
use crate::error::{Error, Result};
use crate::models::spec::{AlphaHandle, Branch, ModelSpec};

#[derive(Debug, Clone)]
pub struct Network {
    pub spec: ModelSpec,
    pub layers: Vec<Layer>,
    alpha_used: f32,
}

fn merge(a: Option<Tensor>, b: Option<Tensor>) -> Option<Tensor> {
    match (a, b) {
        (Some(mut a), Some(b)) => {
            a.add_assign(&b);
            Some(a)
        }
        (a, b) => a.or(b),
    }
}

impl Network {
    /// Instantiates every layer with weights drawn per the spec's init.
    pub fn new(spec: ModelSpec, rng: &mut dyn RngCore) -> Result<Self> {
        if spec.has_fade() && spec.alpha.is_none() {
            return Err(Error::invalid(format!("{} has a fade-in but no alpha handle", spec.name)));
        }
        let layers = spec
            .layers
            .iter()
            .map(|l| Layer::new(l, spec.init.mean, spec.init.std, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Network { spec, layers, alpha_used: 0.0 })
    }

    pub fn alpha(&self) -> Option<&AlphaHandle> {
        self.spec.alpha.as_ref()
    }

    pub fn has_heads(&self) -> bool {
        self.layers.iter().any(|l| l.spec.branch == Branch::Head)
    }

    /// Runs the network; returns the trunk output followed by any head outputs.
    pub fn forward_all(&mut self, x: &Tensor, ctx: &mut Ctx) -> Vec<Tensor> {
        self.forward_range(x, ctx, self.layers.len())
    }

    fn forward_range(&mut self, x: &Tensor, ctx: &mut Ctx, end: usize) -> Vec<Tensor> {
        assert_eq!(x.shape.numel(), self.spec.input_shape.numel(), "{}: input shape", self.spec.name);
        let mut trunk = x.clone().reshaped(self.spec.input_shape);
        let mut old: Option<Tensor> = None;
        let mut new: Option<Tensor> = None;
        let mut heads = Vec::new();
        for layer in &mut self.layers[..end] {
            match layer.spec.branch {
                Branch::Trunk if layer.is_weighted_sum() => {
                    let a = self.spec.alpha.as_ref().map(|h| h.get()).unwrap_or(0.0);
                    self.alpha_used = a;
                    let o = old.take().expect("fade-in without old path");
                    let n = new.take().expect("fade-in without new path");
                    let mut t = o.scaled(1.0 - a);
                    t.add_assign(&n.scaled(a));
                    trunk = t;
                }
                Branch::Trunk => trunk = layer.forward(&trunk, ctx),
                Branch::FadeOld => old = Some(layer.forward(old.as_ref().unwrap_or(&trunk), ctx)),
                Branch::FadeNew => new = Some(layer.forward(new.as_ref().unwrap_or(&trunk), ctx)),
                Branch::Head => heads.push(layer.forward(&trunk, ctx)),
            }
        }
        let mut out = vec![trunk];
        out.extend(heads);
        out
    }

    /// Trunk output of a single-output network.
    pub fn forward(&mut self, x: &Tensor, ctx: &mut Ctx) -> Tensor {
        self.forward_all(x, ctx).swap_remove(0)
    }

    /// Output of the named layer; later layers are not run.
    pub fn forward_to(&mut self, x: &Tensor, layer: &str, ctx: &mut Ctx) -> Result<Tensor> {
        let idx = self.layer_index(layer)?;
        if self.layers[..=idx].iter().any(|l| l.spec.branch != Branch::Trunk) {
            return Err(Error::invalid(format!("{layer} is not on a plain trunk")));
        }
        Ok(self.forward_range(x, ctx, idx + 1).swap_remove(0))
    }

    fn layer_index(&self, layer: &str) -> Result<usize> {
        self.layers
            .iter()
            .position(|l| l.spec.name == layer)
            .ok_or_else(|| Error::invalid(format!("{} has no layer {layer}", self.spec.name)))
    }

    /// Backward pass for a network without heads. `from_logits` treats the
    /// incoming gradient as already taken with respect to the final
    /// pre-activation (for fused sigmoid + cross-entropy).
    pub fn backward(&mut self, grad: Tensor, from_logits: bool) -> Tensor {
        self.backward_range(Some(grad), Vec::new(), from_logits, self.layers.len())
    }

    /// Backward pass from the head gradients (trunk output unused).
    pub fn backward_heads(&mut self, head_grads: Vec<Tensor>) -> Tensor {
        self.backward_range(None, head_grads, false, self.layers.len())
    }

    /// Backward from the output of the layer given to [`forward_to`](Self::forward_to).
    pub fn backward_from(&mut self, grad: Tensor, layer: &str) -> Result<Tensor> {
        let idx = self.layer_index(layer)?;
        Ok(self.backward_range(Some(grad), Vec::new(), false, idx + 1))
    }

    fn backward_range(&mut self, grad: Option<Tensor>, mut head_grads: Vec<Tensor>, from_logits: bool, end: usize) -> Tensor {
        let mut trunk = grad;
        let mut old: Option<Tensor> = None;
        let mut new: Option<Tensor> = None;
        let mut first = true;
        let a = self.alpha_used;
        for layer in self.layers[..end].iter_mut().rev() {
            let skip = first && from_logits;
            match layer.spec.branch {
                Branch::Head => {
                    let g = head_grads.pop().expect("one gradient per head");
                    trunk = merge(trunk, Some(layer.backward(g, false)));
                }
                Branch::Trunk if layer.is_weighted_sum() => {
                    let g = trunk.take().expect("gradient reaches the fade-in");
                    old = Some(g.clone().scaled(1.0 - a));
                    new = Some(g.scaled(a));
                }
                Branch::Trunk => {
                    let pending = merge(old.take(), new.take());
                    let g = merge(trunk.take(), pending).expect("gradient reaches every trunk layer");
                    trunk = Some(layer.backward(g, skip));
                }
                Branch::FadeOld => old = Some(layer.backward(old.take().expect("old-path gradient"), false)),
                Branch::FadeNew => new = Some(layer.backward(new.take().expect("new-path gradient"), false)),
            }
            first = false;
        }
        let g = merge(trunk, merge(old, new)).expect("non-empty network");
        g.reshaped(self.spec.input_shape)
    }

    pub fn params(&self) -> impl Iterator<Item = &Param> {
        self.layers.iter().flat_map(|l| l.params.iter())
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        self.layers.iter_mut().flat_map(|l| l.params.iter_mut())
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params().find(|p| p.name == name)
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.params_mut().find(|p| p.name == name)
    }

    pub fn zero_grad(&mut self) {
        self.params_mut().for_each(Param::zero_grad);
    }

    /// Copies every parameter whose name and shape match `src`; returns
    /// the copied names.
    pub fn transfer_from(&mut self, src: &Network) -> Vec<String> {
        let mut copied = Vec::new();
        for p in self.params_mut() {
            if let Some(q) = src.param(&p.name) {
                if q.dims == p.dims {
                    p.value.copy_from_slice(&q.value);
                    copied.push(p.name.clone());
                }
            }
        }
        copied
    }

    pub fn trainable_count(&self) -> usize {
        self.params().filter(|p| p.trainable).map(|p| p.value.len()).sum()
    }
}

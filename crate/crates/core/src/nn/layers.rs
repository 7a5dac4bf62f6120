//! Layer kernels with explicit backward passes.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use super::gemm::{gemm, ConvGeom, Op};
use super::tensor::{Param, Tensor};
use crate::error::{Error, Result};
use crate::models::spec::{Activation, LayerKind, LayerSpec, LEAKY_SLOPE};
use crate::models::Shape3;

pub const BN_MOMENTUM: f32 = 0.9;
pub const BN_EPSILON: f32 = 1e-5;

/// Per-call execution state.
pub struct Ctx<'a> {
    pub train: bool,
    pub rng: &'a mut dyn RngCore,
}

#[derive(Debug, Clone)]
enum Kernel {
    Dense,
    Conv(ConvGeom),
    /// Geometry of the convolution this layer is the adjoint of.
    Deconv(ConvGeom),
    BatchNorm,
    Leaky(f32),
    Relu,
    Dropout(f32),
    Reshape,
    Upsample,
    Downsample,
    WeightedSum,
}

/// One executable layer: parameters plus whatever the backward pass needs.
#[derive(Debug, Clone)]
pub struct Layer {
    pub spec: LayerSpec,
    kernel: Kernel,
    pub params: Vec<Param>,
    input: Option<Tensor>,
    output: Option<Tensor>,
    mask: Vec<f32>,
    bn_xhat: Vec<f32>,
    bn_inv_std: Vec<f32>,
    bn_batch_stats: bool,
}

fn apply_activation(act: Activation, v: &mut [f32]) {
    match act {
        Activation::Tanh => v.iter_mut().for_each(|x| *x = x.tanh()),
        Activation::Sigmoid => v.iter_mut().for_each(|x| *x = sigmoid(*x)),
        Activation::Relu => v.iter_mut().for_each(|x| *x = x.max(0.0)),
        Activation::LeakyRelu => v.iter_mut().for_each(|x| {
            if *x < 0.0 {
                *x *= LEAKY_SLOPE
            }
        }),
        Activation::None | Activation::Linear => {}
    }
}

/// Multiplies `g` by the activation derivative expressed through the output `y`.
fn activation_backward(act: Activation, y: &[f32], g: &mut [f32]) {
    match act {
        Activation::Tanh => g.iter_mut().zip(y).for_each(|(g, y)| *g *= 1.0 - y * y),
        Activation::Sigmoid => g.iter_mut().zip(y).for_each(|(g, y)| *g *= y * (1.0 - y)),
        Activation::Relu => g.iter_mut().zip(y).for_each(|(g, y)| {
            if *y <= 0.0 {
                *g = 0.0
            }
        }),
        Activation::LeakyRelu => g.iter_mut().zip(y).for_each(|(g, y)| {
            if *y < 0.0 {
                *g *= LEAKY_SLOPE
            }
        }),
        Activation::None | Activation::Linear => {}
    }
}

pub fn sigmoid(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Layer {
    /// Builds the layer and draws its weights from `N(mean, std)`.
    pub fn new(spec: &LayerSpec, mean: f32, std: f32, rng: &mut dyn RngCore) -> Result<Self> {
        let (i, o) = (spec.in_shape, spec.out_shape);
        let normal = Normal::new(mean, std).map_err(|e| Error::invalid(format!("init: {e}")))?;
        let mut draw = |n: usize| -> Vec<f32> { (0..n).map(|_| normal.sample(&mut *rng)).collect() };
        let name = |p: &str| format!("{}.{}", spec.name, p);
        let k = spec.kernel.unwrap_or(0);
        let (kernel, params) = match spec.kind {
            LayerKind::Dense => {
                let (fi, fo) = (i.numel(), o.numel());
                (
                    Kernel::Dense,
                    vec![
                        Param::new(name("weight"), vec![fo, fi], draw(fo * fi), true),
                        Param::filled(name("bias"), vec![fo], 0.0, true),
                    ],
                )
            }
            LayerKind::Conv => {
                let g = ConvGeom::same(i.c, i.h, i.w, k, spec.stride);
                if (g.out_h, g.out_w) != (o.h, o.w) {
                    return Err(Error::Shape(format!("{}: conv output mismatch", spec.name)));
                }
                (
                    Kernel::Conv(g),
                    vec![
                        Param::new(name("weight"), vec![o.c, i.c, k, k], draw(o.c * i.c * k * k), true),
                        Param::filled(name("bias"), vec![o.c], 0.0, true),
                    ],
                )
            }
            LayerKind::Deconv => {
                let g = ConvGeom::same(o.c, o.h, o.w, k, spec.stride);
                if (g.out_h, g.out_w) != (i.h, i.w) {
                    return Err(Error::Shape(format!("{}: deconv output mismatch", spec.name)));
                }
                (
                    Kernel::Deconv(g),
                    vec![
                        Param::new(name("weight"), vec![i.c, o.c, k, k], draw(i.c * o.c * k * k), true),
                        Param::filled(name("bias"), vec![o.c], 0.0, true),
                    ],
                )
            }
            LayerKind::BatchNorm => (
                Kernel::BatchNorm,
                vec![
                    Param::filled(name("gamma"), vec![i.c], 1.0, true),
                    Param::filled(name("beta"), vec![i.c], 0.0, true),
                    Param::filled(name("running_mean"), vec![i.c], 0.0, false),
                    Param::filled(name("running_var"), vec![i.c], 1.0, false),
                ],
            ),
            LayerKind::LeakyRelu => (Kernel::Leaky(spec.leaky_slope.unwrap_or(LEAKY_SLOPE)), vec![]),
            LayerKind::Relu => (Kernel::Relu, vec![]),
            LayerKind::Dropout => (Kernel::Dropout(spec.dropout_rate.unwrap_or(0.5)), vec![]),
            LayerKind::Flatten | LayerKind::Reshape => (Kernel::Reshape, vec![]),
            LayerKind::Upsample => (Kernel::Upsample, vec![]),
            LayerKind::Downsample => (Kernel::Downsample, vec![]),
            LayerKind::WeightedSum => (Kernel::WeightedSum, vec![]),
        };
        Ok(Layer {
            spec: spec.clone(),
            kernel,
            params,
            input: None,
            output: None,
            mask: Vec::new(),
            bn_xhat: Vec::new(),
            bn_inv_std: Vec::new(),
            bn_batch_stats: false,
        })
    }

    pub fn forward(&mut self, x: &Tensor, ctx: &mut Ctx) -> Tensor {
        assert_eq!(x.shape.numel(), self.spec.in_shape.numel(), "{}: input shape", self.spec.name);
        let out_shape = self.spec.out_shape;
        let n = x.n;
        let act = self.spec.activation;
        match self.kernel.clone() {
            Kernel::Dense => {
                let (fi, fo) = (x.sample_len(), out_shape.numel());
                let mut y = Tensor::zeros(n, out_shape);
                for yrow in y.data.chunks_mut(fo) {
                    yrow.copy_from_slice(&self.params[1].value);
                }
                gemm(n, fi, fo, &x.data, Op::N, &self.params[0].value, Op::T, 1.0, &mut y.data);
                apply_activation(act, &mut y.data);
                self.input = Some(x.clone());
                self.output = Some(y.clone());
                y
            }
            Kernel::Conv(g) => {
                let cout = out_shape.c;
                let cols = g.col_cols();
                let mut col = vec![0.0; g.col_rows() * cols];
                let mut y = Tensor::zeros(n, out_shape);
                for (s, ys) in y.data.chunks_mut(cout * cols).enumerate() {
                    g.im2col(x.sample(s), &mut col);
                    for (c, plane) in ys.chunks_mut(cols).enumerate() {
                        plane.fill(self.params[1].value[c]);
                    }
                    gemm(cout, g.col_rows(), cols, &self.params[0].value, Op::N, &col, Op::N, 1.0, ys);
                }
                apply_activation(act, &mut y.data);
                self.input = Some(x.clone());
                self.output = Some(y.clone());
                y
            }
            Kernel::Deconv(g) => {
                let cin = x.shape.c;
                let cols = g.col_cols();
                let plane = out_shape.h * out_shape.w;
                let mut col = vec![0.0; g.col_rows() * cols];
                let mut y = Tensor::zeros(n, out_shape);
                for (s, ys) in y.data.chunks_mut(out_shape.numel()).enumerate() {
                    gemm(g.col_rows(), cin, cols, &self.params[0].value, Op::T, x.sample(s), Op::N, 0.0, &mut col);
                    g.col2im(&col, ys);
                    for (c, p) in ys.chunks_mut(plane).enumerate() {
                        let b = self.params[1].value[c];
                        p.iter_mut().for_each(|v| *v += b);
                    }
                }
                apply_activation(act, &mut y.data);
                self.input = Some(x.clone());
                self.output = Some(y.clone());
                y
            }
            Kernel::BatchNorm => self.batchnorm_forward(x, ctx.train),
            Kernel::Leaky(slope) => {
                let mut y = x.clone().reshaped(out_shape);
                y.data.iter_mut().for_each(|v| {
                    if *v < 0.0 {
                        *v *= slope
                    }
                });
                self.output = Some(y.clone());
                y
            }
            Kernel::Relu => {
                let mut y = x.clone().reshaped(out_shape);
                y.data.iter_mut().for_each(|v| *v = v.max(0.0));
                self.output = Some(y.clone());
                y
            }
            Kernel::Dropout(rate) => {
                let mut y = x.clone().reshaped(out_shape);
                if ctx.train && rate > 0.0 {
                    let keep = 1.0 - rate;
                    self.mask = (0..y.data.len())
                        .map(|_| if ctx.rng.random::<f32>() < keep { 1.0 / keep } else { 0.0 })
                        .collect();
                    y.data.iter_mut().zip(&self.mask).for_each(|(v, m)| *v *= m);
                } else {
                    self.mask.clear();
                }
                y
            }
            Kernel::Reshape => x.clone().reshaped(out_shape),
            Kernel::Upsample => {
                let s = x.shape;
                let mut y = Tensor::zeros(n, out_shape);
                for (src, dst) in x.data.chunks(s.h * s.w).zip(y.data.chunks_mut(4 * s.h * s.w)) {
                    for oy in 0..2 * s.h {
                        for ox in 0..2 * s.w {
                            dst[oy * 2 * s.w + ox] = src[(oy / 2) * s.w + ox / 2];
                        }
                    }
                }
                y
            }
            Kernel::Downsample => {
                let s = x.shape;
                let (oh, ow) = (out_shape.h, out_shape.w);
                let mut y = Tensor::zeros(n, out_shape);
                for (src, dst) in x.data.chunks(s.h * s.w).zip(y.data.chunks_mut(oh * ow)) {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let i = 2 * oy * s.w + 2 * ox;
                            dst[oy * ow + ox] = 0.25 * (src[i] + src[i + 1] + src[i + s.w] + src[i + s.w + 1]);
                        }
                    }
                }
                y
            }
            Kernel::WeightedSum => panic!("weighted_sum is evaluated by the network"),
        }
    }

    fn batchnorm_forward(&mut self, x: &Tensor, train: bool) -> Tensor {
        let c = x.shape.c;
        let hw = x.shape.h * x.shape.w;
        let n = x.n;
        let m = (n * hw) as f32;
        let mut y = x.clone();
        let (mean, var) = if train {
            let mut mean = vec![0.0f64; c];
            let mut var = vec![0.0f64; c];
            for s in 0..n {
                for ch in 0..c {
                    let p = &x.data[(s * c + ch) * hw..(s * c + ch + 1) * hw];
                    mean[ch] += p.iter().map(|&v| v as f64).sum::<f64>();
                }
            }
            mean.iter_mut().for_each(|v| *v /= m as f64);
            for s in 0..n {
                for ch in 0..c {
                    let p = &x.data[(s * c + ch) * hw..(s * c + ch + 1) * hw];
                    var[ch] += p.iter().map(|&v| (v as f64 - mean[ch]).powi(2)).sum::<f64>();
                }
            }
            var.iter_mut().for_each(|v| *v /= m as f64);
            let mean: Vec<f32> = mean.into_iter().map(|v| v as f32).collect();
            let var: Vec<f32> = var.into_iter().map(|v| v as f32).collect();
            for ch in 0..c {
                let rm = &mut self.params[2].value[ch];
                *rm = BN_MOMENTUM * *rm + (1.0 - BN_MOMENTUM) * mean[ch];
                let rv = &mut self.params[3].value[ch];
                *rv = BN_MOMENTUM * *rv + (1.0 - BN_MOMENTUM) * var[ch];
            }
            (mean, var)
        } else {
            (self.params[2].value.clone(), self.params[3].value.clone())
        };
        self.bn_inv_std = var.iter().map(|v| 1.0 / (v + BN_EPSILON).sqrt()).collect();
        self.bn_xhat.resize(x.data.len(), 0.0);
        for s in 0..n {
            for ch in 0..c {
                let (g, b, mu, inv) = (self.params[0].value[ch], self.params[1].value[ch], mean[ch], self.bn_inv_std[ch]);
                let range = (s * c + ch) * hw..(s * c + ch + 1) * hw;
                for i in range {
                    let xh = (x.data[i] - mu) * inv;
                    self.bn_xhat[i] = xh;
                    y.data[i] = g * xh + b;
                }
            }
        }
        self.bn_batch_stats = train;
        y
    }

    /// Accumulates parameter gradients and returns the input gradient.
    /// With `skip_activation` the incoming gradient is taken to be with
    /// respect to the pre-activation values already.
    pub fn backward(&mut self, grad: Tensor, skip_activation: bool) -> Tensor {
        let in_shape = self.spec.in_shape;
        let mut g = grad;
        let n = g.n;
        if matches!(self.kernel, Kernel::Dense | Kernel::Conv(_) | Kernel::Deconv(_)) && !skip_activation {
            let y = self.output.as_ref().expect("backward before forward");
            activation_backward(self.spec.activation, &y.data, &mut g.data);
        }
        match self.kernel.clone() {
            Kernel::Dense => {
                let x = self.input.as_ref().expect("backward before forward");
                let (fi, fo) = (in_shape.numel(), self.spec.out_shape.numel());
                let (w, b) = self.params.split_at_mut(1);
                gemm(fo, n, fi, &g.data, Op::T, &x.data, Op::N, 1.0, &mut w[0].grad);
                for row in g.data.chunks(fo) {
                    b[0].grad.iter_mut().zip(row).for_each(|(a, v)| *a += v);
                }
                let mut dx = Tensor::zeros(n, x.shape);
                gemm(n, fo, fi, &g.data, Op::N, &w[0].value, Op::N, 0.0, &mut dx.data);
                dx
            }
            Kernel::Conv(geo) => {
                let x = self.input.as_ref().expect("backward before forward");
                let cout = self.spec.out_shape.c;
                let cols = geo.col_cols();
                let rows = geo.col_rows();
                let mut col = vec![0.0; rows * cols];
                let mut dcol = vec![0.0; rows * cols];
                let mut dx = Tensor::zeros(n, x.shape);
                let (w, b) = self.params.split_at_mut(1);
                for s in 0..n {
                    let gs = &g.data[s * cout * cols..(s + 1) * cout * cols];
                    geo.im2col(x.sample(s), &mut col);
                    gemm(cout, cols, rows, gs, Op::N, &col, Op::T, 1.0, &mut w[0].grad);
                    for (c, p) in gs.chunks(cols).enumerate() {
                        b[0].grad[c] += p.iter().sum::<f32>();
                    }
                    gemm(rows, cout, cols, &w[0].value, Op::T, gs, Op::N, 0.0, &mut dcol);
                    let len = x.sample_len();
                    geo.col2im(&dcol, &mut dx.data[s * len..(s + 1) * len]);
                }
                dx
            }
            Kernel::Deconv(geo) => {
                let x = self.input.as_ref().expect("backward before forward");
                let cin = in_shape.c;
                let cols = geo.col_cols();
                let rows = geo.col_rows();
                let plane = self.spec.out_shape.h * self.spec.out_shape.w;
                let olen = self.spec.out_shape.numel();
                let mut dcol = vec![0.0; rows * cols];
                let mut dx = Tensor::zeros(n, x.shape);
                let (w, b) = self.params.split_at_mut(1);
                for s in 0..n {
                    let gs = &g.data[s * olen..(s + 1) * olen];
                    for (c, p) in gs.chunks(plane).enumerate() {
                        b[0].grad[c] += p.iter().sum::<f32>();
                    }
                    geo.im2col(gs, &mut dcol);
                    let ilen = x.sample_len();
                    gemm(cin, cols, rows, x.sample(s), Op::N, &dcol, Op::T, 1.0, &mut w[0].grad);
                    gemm(cin, rows, cols, &w[0].value, Op::N, &dcol, Op::N, 0.0, &mut dx.data[s * ilen..(s + 1) * ilen]);
                }
                dx
            }
            Kernel::BatchNorm => self.batchnorm_backward(g),
            Kernel::Leaky(slope) => {
                let y = self.output.as_ref().expect("backward before forward");
                g.data.iter_mut().zip(&y.data).for_each(|(g, y)| {
                    if *y < 0.0 {
                        *g *= slope
                    }
                });
                g.reshaped(in_shape)
            }
            Kernel::Relu => {
                let y = self.output.as_ref().expect("backward before forward");
                g.data.iter_mut().zip(&y.data).for_each(|(g, y)| {
                    if *y <= 0.0 {
                        *g = 0.0
                    }
                });
                g.reshaped(in_shape)
            }
            Kernel::Dropout(_) => {
                if !self.mask.is_empty() {
                    g.data.iter_mut().zip(&self.mask).for_each(|(g, m)| *g *= m);
                }
                g.reshaped(in_shape)
            }
            Kernel::Reshape => g.reshaped(in_shape),
            Kernel::Upsample => {
                let s = in_shape;
                let mut dx = Tensor::zeros(n, s);
                for (dst, src) in dx.data.chunks_mut(s.h * s.w).zip(g.data.chunks(4 * s.h * s.w)) {
                    for oy in 0..2 * s.h {
                        for ox in 0..2 * s.w {
                            dst[(oy / 2) * s.w + ox / 2] += src[oy * 2 * s.w + ox];
                        }
                    }
                }
                dx
            }
            Kernel::Downsample => {
                let s = in_shape;
                let (oh, ow) = (self.spec.out_shape.h, self.spec.out_shape.w);
                let mut dx = Tensor::zeros(n, s);
                for (dst, src) in dx.data.chunks_mut(s.h * s.w).zip(g.data.chunks(oh * ow)) {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let v = 0.25 * src[oy * ow + ox];
                            let i = 2 * oy * s.w + 2 * ox;
                            dst[i] += v;
                            dst[i + 1] += v;
                            dst[i + s.w] += v;
                            dst[i + s.w + 1] += v;
                        }
                    }
                }
                dx
            }
            Kernel::WeightedSum => panic!("weighted_sum is evaluated by the network"),
        }
    }

    fn batchnorm_backward(&mut self, g: Tensor) -> Tensor {
        let s = self.spec.in_shape;
        let (c, hw, n) = (s.c, s.h * s.w, g.n);
        let m = (n * hw) as f32;
        let mut dx = Tensor::zeros(n, s);
        let mut dgamma = vec![0.0f32; c];
        let mut dbeta = vec![0.0f32; c];
        for smp in 0..n {
            for ch in 0..c {
                for i in (smp * c + ch) * hw..(smp * c + ch + 1) * hw {
                    dgamma[ch] += g.data[i] * self.bn_xhat[i];
                    dbeta[ch] += g.data[i];
                }
            }
        }
        for smp in 0..n {
            for ch in 0..c {
                let k = self.params[0].value[ch] * self.bn_inv_std[ch];
                for i in (smp * c + ch) * hw..(smp * c + ch + 1) * hw {
                    dx.data[i] = if self.bn_batch_stats {
                        k / m * (m * g.data[i] - dbeta[ch] - self.bn_xhat[i] * dgamma[ch])
                    } else {
                        k * g.data[i]
                    };
                }
            }
        }
        for ch in 0..c {
            self.params[0].grad[ch] += dgamma[ch];
            self.params[1].grad[ch] += dbeta[ch];
        }
        dx
    }

    pub fn is_weighted_sum(&self) -> bool {
        matches!(self.kernel, Kernel::WeightedSum)
    }

    pub fn out_shape(&self) -> Shape3 {
        self.spec.out_shape
    }
}

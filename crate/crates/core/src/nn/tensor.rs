use crate::models::Shape3;

/// A batch of `n` samples, each of shape `shape`, stored contiguously (NCHW).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub n: usize,
    pub shape: Shape3,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(n: usize, shape: Shape3, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), n * shape.numel(), "tensor data does not match {n}×{shape}");
        Tensor { n, shape, data }
    }

    pub fn zeros(n: usize, shape: Shape3) -> Self {
        Tensor { n, shape, data: vec![0.0; n * shape.numel()] }
    }

    pub fn sample_len(&self) -> usize {
        self.shape.numel()
    }

    pub fn sample(&self, i: usize) -> &[f32] {
        let len = self.sample_len();
        &self.data[i * len..(i + 1) * len]
    }

    pub fn reshaped(mut self, shape: Shape3) -> Self {
        assert_eq!(shape.numel(), self.shape.numel());
        self.shape = shape;
        self
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        assert_eq!(self.data.len(), other.data.len());
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }

    pub fn scaled(mut self, s: f32) -> Self {
        self.data.iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f32 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }
}

/// A named parameter tensor with its gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub dims: Vec<usize>,
    pub value: Vec<f32>,
    pub grad: Vec<f32>,
    /// Running statistics are stored but never updated by optimizers.
    pub trainable: bool,
}

impl Param {
    pub fn new(name: String, dims: Vec<usize>, value: Vec<f32>, trainable: bool) -> Self {
        assert_eq!(dims.iter().product::<usize>(), value.len());
        let grad = vec![0.0; value.len()];
        Param { name, dims, value, grad, trainable }
    }

    pub fn filled(name: String, dims: Vec<usize>, v: f32, trainable: bool) -> Self {
        let n = dims.iter().product();
        Param::new(name, dims, vec![v; n], trainable)
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

use super::spec::*;

/// Incrementally appends layers while tracking the running shape.
pub struct SpecBuilder {
    name: String,
    input: Shape3,
    layers: Vec<LayerSpec>,
    trunk: Shape3,
    old: Option<Shape3>,
    new: Option<Shape3>,
    branch: Branch,
    block: Option<String>,
}

impl SpecBuilder {
    pub fn new(name: &str, input: Shape3) -> Self {
        SpecBuilder {
            name: name.to_string(),
            input,
            layers: Vec::new(),
            trunk: input,
            old: None,
            new: None,
            branch: Branch::Trunk,
            block: None,
        }
    }

    pub fn block(&mut self, block: Option<&str>) -> &mut Self {
        self.block = block.map(str::to_string);
        self
    }

    pub fn branch(&mut self, branch: Branch) -> &mut Self {
        self.branch = branch;
        self
    }

    fn current(&self) -> Shape3 {
        match self.branch {
            Branch::Trunk | Branch::Head => self.trunk,
            Branch::FadeOld => self.old.unwrap_or(self.trunk),
            Branch::FadeNew => self.new.unwrap_or(self.trunk),
        }
    }

    fn push(&mut self, mut layer: LayerSpec) -> &mut Self {
        layer.in_shape = self.current();
        layer.branch = self.branch;
        layer.block = self.block.clone();
        let out = layer.out_shape;
        match self.branch {
            Branch::Trunk => self.trunk = out,
            Branch::FadeOld => self.old = Some(out),
            Branch::FadeNew => self.new = Some(out),
            Branch::Head => {}
        }
        self.layers.push(layer);
        self
    }

    fn layer(&self, name: &str, kind: LayerKind, out: Shape3) -> LayerSpec {
        LayerSpec {
            name: name.to_string(),
            kind,
            kernel: None,
            stride: 1,
            padding: Padding::Same,
            activation: Activation::None,
            in_shape: self.current(),
            out_shape: out,
            dropout_rate: None,
            leaky_slope: None,
            branch: self.branch,
            block: None,
        }
    }

    pub fn dense(&mut self, name: &str, units: usize, act: Activation) -> &mut Self {
        let mut l = self.layer(name, LayerKind::Dense, Shape3::flat(units));
        l.activation = act;
        self.push(l)
    }

    pub fn reshape(&mut self, name: &str, to: Shape3) -> &mut Self {
        assert_eq!(self.current().numel(), to.numel(), "reshape must keep element count");
        let l = self.layer(name, LayerKind::Reshape, to);
        self.push(l)
    }

    pub fn flatten(&mut self, name: &str) -> &mut Self {
        let n = self.current().numel();
        let l = self.layer(name, LayerKind::Flatten, Shape3::flat(n));
        self.push(l)
    }

    pub fn conv(&mut self, name: &str, channels: usize, stride: usize, act: Activation) -> &mut Self {
        let s = self.current();
        let out = Shape3::new(channels, conv_out(s.h, stride), conv_out(s.w, stride));
        let mut l = self.layer(name, LayerKind::Conv, out);
        l.kernel = Some(KERNEL);
        l.stride = stride;
        l.activation = act;
        self.push(l)
    }

    pub fn deconv(&mut self, name: &str, channels: usize, stride: usize, act: Activation) -> &mut Self {
        let s = self.current();
        let out = Shape3::new(channels, deconv_out(s.h, stride), deconv_out(s.w, stride));
        let mut l = self.layer(name, LayerKind::Deconv, out);
        l.kernel = Some(KERNEL);
        l.stride = stride;
        l.activation = act;
        self.push(l)
    }

    pub fn batchnorm(&mut self, name: &str) -> &mut Self {
        let l = self.layer(name, LayerKind::BatchNorm, self.current());
        self.push(l)
    }

    pub fn leaky_relu(&mut self, name: &str) -> &mut Self {
        let mut l = self.layer(name, LayerKind::LeakyRelu, self.current());
        l.activation = Activation::LeakyRelu;
        l.leaky_slope = Some(LEAKY_SLOPE);
        self.push(l)
    }

    pub fn relu(&mut self, name: &str) -> &mut Self {
        let mut l = self.layer(name, LayerKind::Relu, self.current());
        l.activation = Activation::Relu;
        self.push(l)
    }

    pub fn dropout(&mut self, name: &str, rate: f32) -> &mut Self {
        let mut l = self.layer(name, LayerKind::Dropout, self.current());
        l.dropout_rate = Some(rate);
        self.push(l)
    }

    pub fn upsample(&mut self, name: &str) -> &mut Self {
        let s = self.current();
        let l = self.layer(name, LayerKind::Upsample, Shape3::new(s.c, s.h * 2, s.w * 2));
        self.push(l)
    }

    pub fn downsample(&mut self, name: &str) -> &mut Self {
        let s = self.current();
        let l = self.layer(name, LayerKind::Downsample, Shape3::new(s.c, s.h / 2, s.w / 2));
        self.push(l)
    }

    /// Closes a fade-in: both paths must have produced the same shape.
    pub fn weighted_sum(&mut self, name: &str) -> &mut Self {
        let old = self.old.take().expect("fade-in needs an old path");
        let new = self.new.take().expect("fade-in needs a new path");
        assert_eq!(old, new, "fade-in paths must agree on shape");
        self.branch = Branch::Trunk;
        let mut l = self.layer(name, LayerKind::WeightedSum, new);
        l.in_shape = new;
        self.push(l)
    }

    pub fn finish(self) -> ModelSpec {
        let output = self
            .layers
            .iter()
            .rev()
            .find(|l| l.branch != Branch::Head)
            .map(|l| l.out_shape)
            .unwrap_or(self.input);
        ModelSpec {
            name: self.name,
            input_shape: self.input,
            output_shape: output,
            layers: self.layers,
            init: InitSpec::default(),
            alpha: None,
        }
    }
}

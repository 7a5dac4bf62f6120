use hmgan::models::spec::{Activation, AlphaHandle, Branch, Shape3};
use hmgan::models::SpecBuilder;
use hmgan::nn::{Ctx, Network, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_tensor(n: usize, shape: Shape3, rng: &mut ChaCha8Rng) -> Tensor {
    let data = (0..n * shape.numel()).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    Tensor::new(n, shape, data)
}

/// Loss `sum(out * r)` in f64, evaluated in training mode without dropout.
fn loss(net: &mut Network, x: &Tensor, r: &[f32]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let y = net.forward(x, &mut Ctx { train: true, rng: &mut rng });
    y.data.iter().zip(r).map(|(a, b)| *a as f64 * *b as f64).sum()
}

/// Compares analytic input and parameter gradients against central differences.
fn check_gradients(mut net: Network, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Scale weights up so signals do not vanish through small-init layers.
    for p in net.params_mut().filter(|p| p.trainable) {
        for v in p.value.iter_mut() {
            *v = rng.random_range(-0.5f32..0.5);
        }
    }
    let x = rand_tensor(n, net.spec.input_shape, &mut rng);
    let r: Vec<f32> = (0..n * net.spec.output_shape.numel()).map(|_| rng.random_range(-1.0f32..1.0)).collect();

    let mut ctx_rng = ChaCha8Rng::seed_from_u64(0);
    let y = net.forward(&x, &mut Ctx { train: true, rng: &mut ctx_rng });
    net.zero_grad();
    let dx = net.backward(Tensor::new(n, y.shape, r.clone()), false);

    // Small step: BN followed by (leaky) ReLU puts many values near a kink.
    let eps = 1e-4f32;
    let tol = |a: f64, b: f64| (a - b).abs() <= 2e-2 * a.abs().max(b.abs()).max(1.0);
    for i in (0..x.data.len()).step_by((x.data.len() / 25).max(1)) {
        let mut xp = x.clone();
        xp.data[i] += eps;
        let mut xm = x.clone();
        xm.data[i] -= eps;
        let fd = (loss(&mut net, &xp, &r) - loss(&mut net, &xm, &r)) / (2.0 * eps as f64);
        assert!(tol(fd, dx.data[i] as f64), "{}: input grad {i}: fd {fd} vs {}", net.spec.name, dx.data[i]);
    }
    let grads: Vec<(String, Vec<f32>)> = net.params().filter(|p| p.trainable).map(|p| (p.name.clone(), p.grad.clone())).collect();
    for (name, g) in grads {
        for i in (0..g.len()).step_by((g.len() / 10).max(1)) {
            let orig = net.param(&name).unwrap().value[i];
            net.param_mut(&name).unwrap().value[i] = orig + eps;
            let lp = loss(&mut net, &x, &r);
            net.param_mut(&name).unwrap().value[i] = orig - eps;
            let lm = loss(&mut net, &x, &r);
            net.param_mut(&name).unwrap().value[i] = orig;
            let fd = (lp - lm) / (2.0 * eps as f64);
            assert!(tol(fd, g[i] as f64), "{}: {name}[{i}]: fd {fd} vs {}", net.spec.name, g[i]);
        }
    }
}

fn build(b: SpecBuilder, alpha: Option<AlphaHandle>) -> Network {
    let mut spec = b.finish();
    spec.alpha = alpha;
    Network::new(spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
}

#[test]
fn dense_and_activations() {
    let mut b = SpecBuilder::new("dense", Shape3::flat(6));
    b.dense("d1", 5, Activation::Tanh).dense("d2", 4, Activation::Sigmoid).dense("d3", 3, Activation::Linear);
    check_gradients(build(b, None), 3, 1);
}

#[test]
fn conv_stack_strides_and_batchnorm() {
    let mut b = SpecBuilder::new("conv", Shape3::new(2, 7, 6));
    b.conv("c1", 3, 2, Activation::None)
        .batchnorm("bn1")
        .leaky_relu("a1")
        .conv("c2", 2, 1, Activation::None)
        .relu("a2")
        .flatten("flat")
        .dense("head", 1, Activation::Linear);
    check_gradients(build(b, None), 3, 2);
}

#[test]
fn deconv_stack() {
    let mut b = SpecBuilder::new("deconv", Shape3::flat(4));
    b.dense("dense", 2 * 3 * 3, Activation::None)
        .reshape("reshape", Shape3::new(2, 3, 3))
        .deconv("d1", 3, 2, Activation::None)
        .batchnorm("bn")
        .leaky_relu("act")
        .deconv("d2", 1, 1, Activation::Tanh);
    check_gradients(build(b, None), 2, 3);
}

#[test]
fn resampling_layers() {
    let mut b = SpecBuilder::new("resample", Shape3::new(2, 4, 4));
    b.upsample("up").conv("c", 2, 1, Activation::Tanh).downsample("down").downsample("down2");
    check_gradients(build(b, None), 2, 4);
}

#[test]
fn fade_in_paths() {
    for a in [0.0, 0.3, 1.0] {
        let mut b = SpecBuilder::new("fade", Shape3::new(1, 4, 4));
        b.conv("stem", 2, 1, Activation::None);
        b.branch(Branch::FadeOld).conv("old", 1, 1, Activation::Tanh).upsample("old_up");
        b.branch(Branch::FadeNew).upsample("new_up").conv("new", 1, 1, Activation::Tanh);
        b.weighted_sum("fade");
        b.conv("tail", 1, 2, Activation::Linear);
        check_gradients(build(b, Some(AlphaHandle::new(a))), 2, 5);
    }
}

#[test]
fn deconv_is_adjoint_of_conv() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for stride in [1, 2] {
        let mut cb = SpecBuilder::new("c", Shape3::new(2, 8, 8));
        cb.conv("k", 3, stride, Activation::None);
        let mut conv = build(cb, None);
        let out = conv.spec.output_shape;
        let mut db = SpecBuilder::new("d", out);
        db.deconv("k", 2, stride, Activation::None);
        let mut deconv = build(db, None);
        let w = conv.param("k.weight").unwrap().value.clone();
        deconv.param_mut("k.weight").unwrap().value.copy_from_slice(&w);
        let x = rand_tensor(1, Shape3::new(2, 8, 8), &mut rng);
        let y = rand_tensor(1, out, &mut rng);
        let mut r = ChaCha8Rng::seed_from_u64(0);
        let cx = conv.forward(&x, &mut Ctx { train: false, rng: &mut r });
        let dy = deconv.forward(&y, &mut Ctx { train: false, rng: &mut r });
        let lhs: f64 = cx.data.iter().zip(&y.data).map(|(a, b)| (*a as f64) * (*b as f64)).sum();
        let rhs: f64 = x.data.iter().zip(&dy.data).map(|(a, b)| (*a as f64) * (*b as f64)).sum();
        assert!((lhs - rhs).abs() < 1e-4, "stride {stride}: {lhs} vs {rhs}");
    }
}

#[test]
fn stride_two_deconv_places_kernel_like_tf() {
    // 1×1 input, k=5, s=2: SAME padding puts one row/column before, so the
    // 2×2 output reads kernel taps (1..=2, 1..=2).
    let mut b = SpecBuilder::new("d", Shape3::new(1, 1, 1));
    b.deconv("k", 1, 2, Activation::None);
    let mut net = build(b, None);
    let w: Vec<f32> = (0..25).map(|i| i as f32).collect();
    net.param_mut("k.weight").unwrap().value.copy_from_slice(&w);
    let mut r = ChaCha8Rng::seed_from_u64(0);
    let y = net.forward(&Tensor::new(1, Shape3::new(1, 1, 1), vec![1.0]), &mut Ctx { train: false, rng: &mut r });
    assert_eq!(y.data, vec![6.0, 7.0, 11.0, 12.0]);
}

#[test]
fn heads_receive_separate_gradients() {
    let mut b = SpecBuilder::new("heads", Shape3::flat(4));
    b.dense("trunk", 3, Activation::None).relu("act");
    b.branch(Branch::Head).dense("mu", 2, Activation::None).dense("sigma", 2, Activation::None);
    let mut net = build(b, None);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = rand_tensor(2, Shape3::flat(4), &mut rng);
    let outs = net.forward_all(&x, &mut Ctx { train: true, rng: &mut rng });
    assert_eq!(outs.len(), 3);
    assert_eq!(outs[1].shape, Shape3::flat(2));
    net.zero_grad();
    let zeros = Tensor::zeros(2, Shape3::flat(2));
    net.backward_heads(vec![Tensor::new(2, Shape3::flat(2), vec![1.0; 4]), zeros]);
    assert!(net.param("mu.weight").unwrap().grad.iter().any(|g| *g != 0.0));
    assert!(net.param("sigma.weight").unwrap().grad.iter().all(|g| *g == 0.0));
}

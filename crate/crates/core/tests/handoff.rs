//! Weights carried between training stages arrive unchanged.

use hmgan::dataset::synthetic::land_tiles;
use hmgan::dataset::TileCorpus;
use hmgan::models::{NamedModel, Scale};
use hmgan::nn::{load_checkpoint, Network};
use hmgan::training::{train_proggan, train_vae_wgan, Architecture, Session, TrainConfig, TrainObserver, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Snapshots {
    /// (stage, generator, critic) at the start of each stage.
    starts: Vec<(String, Network, Network)>,
}

impl TrainObserver for Snapshots {
    fn stage_started(&mut self, stage: &str, g: &Network, c: &Network) {
        self.starts.push((stage.to_string(), g.clone(), c.clone()));
    }
}

fn corpus() -> TileCorpus {
    TileCorpus::from_tiles(land_tiles(16, 32, 3)).unwrap()
}

/// Every parameter of `to` that `from` also has is bit-identical; returns how many.
fn shared_bit_equal(from: &Network, to: &Network) -> usize {
    let mut n = 0;
    for p in to.params() {
        if let Some(q) = from.param(&p.name).filter(|q| q.dims == p.dims) {
            let same = p.value.iter().zip(&q.value).all(|(a, b)| a.to_bits() == b.to_bits());
            assert!(same, "{} changed in transfer", p.name);
            n += 1;
        }
    }
    n
}

#[test]
fn progressive_stages_start_from_the_previous_finals() {
    let mut cfg = TrainConfig::new(Variant::Proggan, 1);
    cfg.set_epochs(1);
    cfg.scale = Scale::DESK;
    cfg.batch_size = 8;
    let dir = tempfile::tempdir().unwrap();
    let mut snaps = Snapshots::default();
    train_proggan(&corpus(), &cfg, &mut Session::new(Some(dir.path().to_path_buf()), &mut snaps)).unwrap();
    assert_eq!(snaps.starts.len(), 3);
    // Final weights of each stage as written to disk, BN running statistics included.
    let ckpt = |stage: &str, role: &str| load_checkpoint(&dir.path().join("checkpoints").join(format!("{stage}_{role}.safetensors"))).unwrap();
    for pair in snaps.starts.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let g = shared_bit_equal(&ckpt(&prev.0, "g"), &next.1);
        let c = shared_bit_equal(&ckpt(&prev.0, "c"), &next.2);
        assert!(g > 0 && c > 0, "{} shares nothing with {}", next.0, prev.0);
    }
}

#[test]
fn decoder_enters_the_wasserstein_stage_unchanged() {
    let spec = NamedModel::VaeDec.build(&Scale::DESK).unwrap();
    let decoder = Network::new(spec, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let mut cfg = TrainConfig::new(Variant::VaeWgan, 1);
    cfg.architecture = Architecture::VaeDecoder;
    cfg.scale = Scale::DESK;
    cfg.batch_size = 8;
    let mut snaps = Snapshots::default();
    train_vae_wgan(&corpus(), &cfg, &decoder, None, &mut Session::new(None, &mut snaps)).unwrap();
    let start = &snaps.starts[0].1;
    assert_eq!(shared_bit_equal(&decoder, start), decoder.params().count());
    assert_eq!(start.params().count(), decoder.params().count());
}

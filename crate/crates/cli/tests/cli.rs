use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hmgan::dataset::synthetic::{land_tiles, terrain};
use hmgan::dataset::{save_png, AugmentSpec, CorpusManifest, ManifestEntry, TileCorpus};

fn hmgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmgan")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Desk-sized corpus written in the on-disk corpus layout.
fn small_corpus(dir: &Path, n: usize) -> PathBuf {
    let corpus = TileCorpus::from_tiles(land_tiles(n, 32, 11)).unwrap();
    let manifest = CorpusManifest {
        tile_size: 32,
        stride: 32,
        target: 32,
        rounds: 1,
        seed: 11,
        entries: (0..n)
            .map(|i| ManifestEntry {
                tile_id: format!("t{i:05}"),
                round: 0,
                row: 0,
                col: i,
                x: 32 * i,
                y: 0,
                transform: AugmentSpec::default(),
                kept: true,
                reject_reason: None,
            })
            .collect(),
        kept_count: n,
    };
    let out = dir.join("corpus");
    corpus.write(&out, &manifest).unwrap();
    out
}

#[test]
fn usage_errors_exit_with_one() {
    let o = hmgan(&["inspect", "--model", "dcgan-g", "--bogus"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(code(&hmgan(&[])), 1);
    assert_eq!(code(&hmgan(&["--help"])), 0);
    // Training without a budget is refused.
    let o = hmgan(&["train", "--preset", "e5", "--corpus", "x"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing");
    let o = hmgan(&["train", "--variant", "wgan", "--epochs", "1", "--corpus", s(&missing), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(code(&hmgan(&["inspect", "--model", "nope"])), 2);
    assert_eq!(code(&hmgan(&["train", "--preset", "e99", "--epochs", "1", "--corpus", s(&missing)])), 2);
}

#[test]
fn inspect_ends_with_tanh_deconv() {
    let o = hmgan(&["inspect", "--model", "dcgan-g"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let last: Vec<&str> = text.lines().last().unwrap().split(" | ").collect();
    assert_eq!(&last[1..], ["Deconv", "tanh", "32x128x128", "1x128x128"]);
}

#[test]
fn dataset_build_is_seeded_and_keeps_every_land_crop() {
    let dir = tempfile::tempdir().unwrap();
    let raster = dir.path().join("land.png");
    save_png(&terrain(4096, 4096, 5, false), &raster).unwrap();
    let mut manifests = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = hmgan(&["dataset-build", "--input", s(&raster), "--rounds", "1", "--seed", "3", "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let m = CorpusManifest::read(out.join(hmgan::dataset::corpus::MANIFEST_FILE)).unwrap();
        // 1024 tiles at stride 512 over 4096: 7 positions per axis.
        let per_axis = (4096 - 1024) / 512 + 1;
        assert_eq!(m.kept_count, per_axis * per_axis);
        manifests.push(std::fs::read(out.join(hmgan::dataset::corpus::MANIFEST_FILE)).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
}

#[test]
fn train_generate_plot_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), 24);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hmgan(&[
            "train", "--variant", "wgan", "--desk-scale", "--epochs", "2", "--batch-size", "8", "--seed", "4",
            "--corpus", s(&corpus), "--out", s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stderr(&o).contains("[wgan] epoch 1"));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let log = std::fs::read_to_string(a.join("wgan.csv")).unwrap();
    assert_eq!(log, std::fs::read_to_string(b.join("wgan.csv")).unwrap());
    assert!(log.starts_with("epoch,metric_name,value\n0,west_real,"));
    assert!(a.join("config.toml").is_file() && a.join("samples.png").is_file());
    let ckpt = a.join("checkpoints").join("wgan_g.safetensors");
    assert!(ckpt.is_file());

    let samples = dir.path().join("samples");
    let o = hmgan(&["generate", "--checkpoint", s(&ckpt), "--n", "5", "--seed", "2", "--out", s(&samples)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tile = hmgan::dataset::load_raster(samples.join("sample_004.png")).unwrap();
    assert_eq!((tile.width(), tile.height()), (32, 32));
    let grid = hmgan::dataset::load_raster(samples.join("montage.png")).unwrap();
    // Three columns, two rows, one-pixel separators.
    assert_eq!((grid.width(), grid.height()), (3 * 32 + 2, 2 * 32 + 1));

    let plots = dir.path().join("plots");
    let o = hmgan(&["plot", "--log", s(&a.join("wgan.csv")), "--out", s(&plots)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["curves.svg", "wasserstein.svg", "gap.svg"] {
        assert!(std::fs::read_to_string(plots.join(f)).unwrap().contains("<polyline"), "{f}");
    }
    let summary = std::fs::read_to_string(plots.join("summary.json")).unwrap();
    assert!(summary.contains("\"name\": \"gap\"") && summary.contains("\"final\""));

    let mesh = dir.path().join("mesh").join("t.obj");
    let o = hmgan(&["export-mesh", "--heightmap", s(&samples.join("sample_000.png")), "--scale", "4", "--out", s(&mesh)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let obj = std::fs::read_to_string(mesh).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 32 * 32);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * 31 * 31);
}

#[test]
fn learned_latents_read_the_saved_moments() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), 12);
    let out = dir.path().join("run");
    let o = hmgan(&[
        "train", "--preset", "e10", "--desk-scale", "--epochs", "1", "--batch-size", "6", "--corpus", s(&corpus),
        "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("moments.json").is_file());
    let ckpt = out.join("checkpoints").join("vae_wgan_g.safetensors");
    let samples = dir.path().join("samples");
    let o = hmgan(&["generate", "--checkpoint", s(&ckpt), "--n", "2", "--latent", "learned", "--out", s(&samples)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(samples.join("sample_001.png").is_file());
}

#[test]
fn exploding_training_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), 8);
    let out = dir.path().join("run");
    let o = hmgan(&[
        "train", "--variant", "vae", "--desk-scale", "--epochs", "20", "--lr", "1e30", "--batch-size", "4",
        "--corpus", s(&corpus), "--out", s(&out),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("non-finite"), "{}", stderr(&o));
}

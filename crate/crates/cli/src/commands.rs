use std::path::{Path, PathBuf};
use std::time::Instant;

use hmgan::dataset::{build_corpus, load_raster, save_png, CorpusConfig, TileCorpus};
use hmgan::export::{default_height_scale, heightmap_to_mesh, montage, save_mesh_obj};
use hmgan::metrics::{gap_series, load_log, render_curves, summary_json, CurveSeries};
use hmgan::models::{LatentSource, NamedModel, Scale};
use hmgan::training::{
    generate_from_checkpoint, load_moments, run_preset, EpochRecord, LatentMode, Preset, Session, TrainObserver,
    Variant, MOMENTS_FILE,
};
use hmgan::{Error, Result};

use crate::{DatasetBuild, ExportMesh, Generate, Inspect, LatentArg, Plot, Train};

pub const OUT_DIR_ENV: &str = "HMGAN_OUT_DIR";

fn default_out(sub: &str) -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")).join(sub)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn dataset_build(a: DatasetBuild) -> Result<()> {
    let out = a.out.unwrap_or_else(|| default_out("corpus"));
    let source = load_raster(&a.input)?;
    let cfg = CorpusConfig {
        rounds: a.rounds,
        tile: a.tile,
        stride: a.stride,
        target: a.target,
        seed: a.seed,
        ..CorpusConfig::default()
    };
    let (corpus, manifest) = build_corpus(&source, &cfg)?;
    corpus.write(&out, &manifest)?;
    println!("kept {} of {} tiles -> {}", manifest.kept_count, manifest.entries.len(), out.display());
    Ok(())
}

struct Progress {
    last: Instant,
}

impl TrainObserver for Progress {
    fn epoch_finished(&mut self, stage: &str, r: &EpochRecord) {
        let m: Vec<String> = r.metrics.iter().map(|(n, v)| format!("{n}={v:.4}")).collect();
        eprintln!("[{stage}] epoch {} ({:.1}s) {}", r.epoch, self.last.elapsed().as_secs_f64(), m.join(" "));
        self.last = Instant::now();
    }
}

/// Flags over preset over built-in defaults.
fn resolve_preset(a: &Train) -> Result<Preset> {
    let variant = a.variant.as_deref().map(Variant::parse).transpose()?;
    let mut preset = match (&a.preset, variant) {
        (Some(p), _) if Path::new(p).is_file() => Preset::load(Path::new(p))?,
        (Some(p), _) => Preset::builtin(p)?,
        (None, Some(v)) => Preset::ad_hoc(v, a.epochs.unwrap_or(hmgan::training::DESK_EPOCHS)),
        (None, None) => unreachable!("clap requires --variant or --preset"),
    };
    if let (Some(v), Some(last)) = (variant, preset.stages.last()) {
        if last.variant != v {
            return Err(Error::Config(format!(
                "--variant {} conflicts with preset {} ({})",
                v.as_str(),
                preset.id,
                last.variant.as_str()
            )));
        }
    }
    if a.desk_scale {
        preset.desk_scale(a.epochs);
    } else if let Some(e) = a.epochs {
        preset.set_epochs(e);
    }
    for s in &mut preset.stages {
        if let Some(seed) = a.seed {
            s.seed = seed;
        }
        if let Some(b) = a.batch_size {
            s.batch_size = b;
        }
        if let Some(lr) = a.lr {
            s.optimizer = s.optimizer.with_lr(lr);
        }
        if let Some(c) = a.clip_c {
            s.clip_c = c;
        }
        if let Some(n) = a.n_critic {
            s.n_critic = n;
        }
        if let Some(k) = a.checkpoint_every {
            s.checkpoint_every = k;
        }
        if let (Some(l), Variant::VaeWgan) = (a.latent, s.variant) {
            s.latent = match l {
                LatentArg::Normal => LatentMode::StandardNormal,
                LatentArg::Learned => LatentMode::LearnedMoments,
            };
        }
        s.validate()?;
    }
    Ok(preset)
}

pub fn train(a: Train) -> Result<()> {
    let preset = resolve_preset(&a)?;
    let out = a.out.clone().unwrap_or_else(|| default_out(&preset.id));
    let (corpus, _) = TileCorpus::load(&a.corpus)?;
    create_dir(&out)?;
    let mut progress = Progress { last: Instant::now() };
    let mut session = Session::new(Some(out.clone()), &mut progress);
    let outcome = run_preset(&corpus, &preset, &mut session)?;
    for log in &outcome.logs {
        println!("{}: {} epochs", log.stage, log.records.len());
    }
    println!("wrote {} checkpoints under {}", outcome.checkpoints.len(), out.display());
    Ok(())
}

pub fn generate(a: Generate) -> Result<()> {
    let out = a.out.unwrap_or_else(|| default_out("samples"));
    let latent = match a.latent {
        LatentArg::Normal => {
            let net = hmgan::nn::load_checkpoint(&a.checkpoint)?;
            let dim = net
                .spec
                .latent_dim()
                .ok_or_else(|| Error::Shape(format!("{} is not a generator", a.checkpoint.display())))?;
            LatentSource::standard(dim)
        }
        LatentArg::Learned => {
            let path = match a.moments {
                Some(p) => p,
                None => a
                    .checkpoint
                    .parent()
                    .and_then(Path::parent)
                    .map(|run| run.join(MOMENTS_FILE))
                    .ok_or_else(|| Error::invalid("--latent learned needs --moments"))?,
            };
            LatentSource::learned(load_moments(&path)?)?
        }
    };
    let tiles = generate_from_checkpoint(&a.checkpoint, &latent, a.n, a.seed)?;
    create_dir(&out)?;
    for (i, t) in tiles.iter().enumerate() {
        save_png(t, out.join(format!("sample_{i:03}.png")))?;
    }
    let columns = (tiles.len() as f64).sqrt().ceil() as usize;
    save_png(&montage(&tiles, columns.max(1))?, out.join("montage.png"))?;
    println!("wrote {} samples to {}", tiles.len(), out.display());
    Ok(())
}

fn find<'a>(series: &'a [CurveSeries], name: &str) -> Option<&'a CurveSeries> {
    series.iter().find(|s| s.name == name)
}

pub fn plot(a: Plot) -> Result<()> {
    let series = load_log(&a.log)?;
    if series.is_empty() {
        return Err(Error::invalid(format!("{} holds no metrics", a.log.display())));
    }
    create_dir(&a.out)?;
    let title = a.log.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut summary = series.clone();
    render_curves(&series, &a.out.join("curves.svg"), &title)?;
    if let (Some(real), Some(fake)) = (find(&series, "west_real"), find(&series, "west_fake")) {
        let mut estimates = vec![real.clone(), fake.clone()];
        estimates.extend(find(&series, "west_g").cloned());
        render_curves(&estimates, &a.out.join("wasserstein.svg"), &format!("{title}: critic estimates"))?;
        let gap = gap_series(real, fake)?;
        render_curves(std::slice::from_ref(&gap), &a.out.join("gap.svg"), &format!("{title}: real - fake"))?;
        summary.push(gap);
    }
    if let (Some(d), Some(g)) = (find(&series, "loss_d"), find(&series, "loss_g")) {
        render_curves(&[d.clone(), g.clone()], &a.out.join("losses.svg"), &format!("{title}: losses"))?;
    }
    let path = a.out.join("summary.json");
    std::fs::write(&path, summary_json(&summary) + "\n").map_err(|e| Error::io(&path, e))?;
    println!("wrote plots and summary to {}", a.out.display());
    Ok(())
}

pub fn export_mesh(a: ExportMesh) -> Result<()> {
    let h = load_raster(&a.heightmap)?;
    let scale = a.scale.unwrap_or_else(|| default_height_scale(&h));
    let mesh = heightmap_to_mesh(&h, scale)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    save_mesh_obj(&mesh, &a.out)?;
    println!("{} vertices, {} faces -> {}", mesh.vertices.len(), mesh.faces.len(), a.out.display());
    Ok(())
}

pub fn inspect(a: Inspect) -> Result<()> {
    let model: NamedModel = a.model.parse()?;
    let scale = if a.desk_scale { Scale::DESK } else { Scale::FULL };
    let spec = model.build(&scale)?;
    if a.json {
        println!("{}", spec.to_json());
    } else {
        println!("block | layer | act | input | output");
        print!("{}", spec.table());
    }
    Ok(())
}

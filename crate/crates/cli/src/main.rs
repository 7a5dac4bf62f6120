//! `hmgan` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hmgan", version, about = "Heightmap generation with GANs and VAEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Crop, augment, filter and downscale a source raster into a tile corpus.
    DatasetBuild(DatasetBuild),
    /// Train a network from a preset or a bare variant.
    Train(Train),
    /// Sample heightmaps from a generator checkpoint.
    Generate(Generate),
    /// Render training curves and a summary from a training log.
    Plot(Plot),
    /// Convert a heightmap into a Wavefront OBJ triangle mesh.
    ExportMesh(ExportMesh),
    /// Print the layer table of a network.
    Inspect(Inspect),
}

#[derive(Debug, Args)]
struct DatasetBuild {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1024)]
    tile: usize,
    #[arg(long, default_value_t = 512)]
    stride: usize,
    #[arg(long, default_value_t = 15)]
    rounds: usize,
    #[arg(long, default_value_t = 128)]
    target: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory [default: $HMGAN_OUT_DIR/corpus]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).multiple(true).args(["variant", "preset"]))]
#[command(group = clap::ArgGroup::new("budget").required(true).multiple(true).args(["epochs", "desk_scale"]))]
struct Train {
    #[arg(long, value_parser = ["dcgan", "wgan", "proggan", "vae", "vae-wgan", "vae_wgan"])]
    variant: Option<String>,
    /// Built-in preset id (e1..e11) or a path to a preset TOML file.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    corpus: PathBuf,
    /// Epochs per stage; progressive runs use this for each of their three stages.
    #[arg(long)]
    epochs: Option<usize>,
    /// Small networks on 32x32 tiles; defaults to 200 epochs unless --epochs is given.
    #[arg(long)]
    desk_scale: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f32>,
    #[arg(long)]
    clip_c: Option<f32>,
    #[arg(long)]
    n_critic: Option<usize>,
    #[arg(long)]
    latent: Option<LatentArg>,
    /// Periodic checkpoint cadence in epochs (0 keeps only final weights).
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Output directory [default: $HMGAN_OUT_DIR/<preset id>]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LatentArg {
    Normal,
    Learned,
}

#[derive(Debug, Args)]
struct Generate {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, value_enum, default_value_t = LatentArg::Normal)]
    latent: LatentArg,
    /// Encoder moments for --latent learned [default: moments.json of the run]
    #[arg(long)]
    moments: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory [default: $HMGAN_OUT_DIR/samples]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Plot {
    #[arg(long)]
    log: PathBuf,
    /// Output directory for the charts and summary.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExportMesh {
    #[arg(long)]
    heightmap: PathBuf,
    /// Height of a 255 pixel in mesh units [default: a quarter of the width]
    #[arg(long)]
    scale: Option<f32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct Inspect {
    #[arg(long)]
    model: String,
    /// Show the reduced desk-scale network instead of the full one.
    #[arg(long)]
    desk_scale: bool,
    #[arg(long)]
    json: bool,
}

const EXIT_DATA: u8 = 2;
const EXIT_NON_FINITE: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::DatasetBuild(a) => commands::dataset_build(a),
        Command::Train(a) => commands::train(a),
        Command::Generate(a) => commands::generate(a),
        Command::Plot(a) => commands::plot(a),
        Command::ExportMesh(a) => commands::export_mesh(a),
        Command::Inspect(a) => commands::inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                hmgan::Error::NonFinite { .. } => ExitCode::from(EXIT_NON_FINITE),
                _ => ExitCode::from(EXIT_DATA),
            }
        }
    }
}

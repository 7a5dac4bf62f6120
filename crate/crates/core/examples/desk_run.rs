//! Trains one preset at desk scale on synthetic 32×32 land tiles and
//! prints each epoch's metrics.
//!
//! `cargo run --release -p hmgan --example desk_run -- e5 20 [batch] [width divisor]`

use hmgan::dataset::synthetic::land_tiles;
use hmgan::dataset::TileCorpus;
use hmgan::training::{run_preset, EpochRecord, Preset, Session, TrainObserver};

struct Printer;

impl TrainObserver for Printer {
    fn epoch_finished(&mut self, stage: &str, r: &EpochRecord) {
        let m: Vec<String> = r.metrics.iter().map(|(n, v)| format!("{n}={v:.4}")).collect();
        println!("{stage} {:>4} {:.2}s {}", r.epoch, r.seconds, m.join(" "));
    }
}

fn main() -> hmgan::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "e5".into());
    let epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let corpus = TileCorpus::from_tiles(land_tiles(200, 32, 7))?;
    let mut preset = Preset::builtin(&id)?;
    preset.desk_scale(Some(epochs));
    if let Some(b) = args.next().and_then(|s| s.parse().ok()) {
        preset.stages.iter_mut().for_each(|s| s.batch_size = b);
    }
    if let Some(d) = args.next().and_then(|s| s.parse().ok()) {
        preset.set_scale(hmgan::models::Scale { resolution: 32, width_divisor: d });
    }
    let mut printer = Printer;
    let mut session = Session::new(None, &mut printer);
    run_preset(&corpus, &preset, &mut session)?;
    Ok(())
}

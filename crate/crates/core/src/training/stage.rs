//! Per-stage bookkeeping shared by every training loop: epoch records,
//! log files and checkpoints.

use std::path::PathBuf;
use std::time::Instant;

use super::data::Session;
use super::log::{EpochRecord, TrainLog};
use crate::error::Result;
use crate::nn::{save_checkpoint, Network};

pub(crate) struct StageLog<'s, 'a> {
    pub log: TrainLog,
    session: &'s mut Session<'a>,
    checkpoint_every: usize,
    pub checkpoints: Vec<PathBuf>,
    started: Instant,
}

impl<'s, 'a> StageLog<'s, 'a> {
    pub fn new(stage: &str, session: &'s mut Session<'a>, checkpoint_every: usize) -> Self {
        StageLog { log: TrainLog::new(stage), session, checkpoint_every, checkpoints: Vec::new(), started: Instant::now() }
    }

    pub fn session(&mut self) -> &mut Session<'a> {
        self.session
    }

    pub fn start_epoch(&mut self) {
        self.started = Instant::now();
    }

    /// Records the epoch; on a non-finite value the log written so far is
    /// flushed before the error is returned.
    pub fn end_epoch(&mut self, epoch: usize, metrics: Vec<(String, f64)>, nets: &[(&str, &Network)]) -> Result<()> {
        let record = EpochRecord { epoch, metrics, seconds: self.started.elapsed().as_secs_f64() };
        self.session.observer.epoch_finished(&self.log.stage, &record);
        if let Err(e) = self.log.push(record) {
            self.write_log()?;
            return Err(e);
        }
        if self.checkpoint_every > 0 && (epoch + 1).is_multiple_of(self.checkpoint_every) {
            self.save(nets, Some(epoch))?;
        }
        Ok(())
    }

    fn save(&mut self, nets: &[(&str, &Network)], epoch: Option<usize>) -> Result<()> {
        let Some(dir) = self.session.checkpoint_dir() else { return Ok(()) };
        for (role, net) in nets {
            let file = match epoch {
                Some(e) => format!("{}_{role}_e{:05}.safetensors", self.log.stage, e + 1),
                None => format!("{}_{role}.safetensors", self.log.stage),
            };
            let path = dir.join(file);
            save_checkpoint(net, &path)?;
            self.checkpoints.push(path);
        }
        Ok(())
    }

    fn write_log(&self) -> Result<()> {
        if let Some(dir) = &self.session.out_dir {
            self.log.write_csv(&dir.join(format!("{}.csv", self.log.stage)))?;
            self.log.write_timing(&dir.join(format!("{}_timing.csv", self.log.stage)))?;
        }
        Ok(())
    }

    /// Writes the final checkpoints and log files.
    pub fn finish(mut self, nets: &[(&str, &Network)]) -> Result<(TrainLog, Vec<PathBuf>)> {
        self.save(nets, None)?;
        self.write_log()?;
        Ok((self.log, self.checkpoints))
    }
}

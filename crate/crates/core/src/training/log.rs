//! Per-epoch training records and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "epoch,metric_name,value";

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// Zero-based epoch index within the stage.
    pub epoch: usize,
    /// Metric values in a fixed per-variant order.
    pub metrics: Vec<(String, f64)>,
    /// Wall time; kept out of the CSV so logs stay reproducible.
    pub seconds: f64,
}

impl EpochRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub stage: String,
    pub records: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn new(stage: impl Into<String>) -> Self {
        TrainLog { stage: stage.into(), records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends a record, failing on the first non-finite value.
    pub fn push(&mut self, record: EpochRecord) -> Result<()> {
        let bad = record.metrics.iter().find(|(_, v)| !v.is_finite()).cloned();
        let epoch = record.epoch;
        self.records.push(record);
        match bad {
            Some((metric, value)) => Err(Error::NonFinite { metric, epoch, value }),
            None => Ok(()),
        }
    }

    pub fn values(&self, metric: &str) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.get(metric)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            for (name, v) in &r.metrics {
                writeln!(out, "{},{},{}", r.epoch, name, v).expect("writing to a String");
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv())
    }

    /// `epoch,seconds` rows.
    pub fn write_timing(&self, path: &Path) -> Result<()> {
        let mut out = String::from("epoch,seconds\n");
        for r in &self.records {
            writeln!(out, "{},{}", r.epoch, r.seconds).expect("writing to a String");
        }
        write_file(path, &out)
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Running mean of several named metrics across the steps of one epoch.
#[derive(Debug, Default)]
pub(crate) struct Accumulator {
    sums: Vec<(String, f64, usize)>,
}

impl Accumulator {
    pub fn add(&mut self, name: &str, v: f64) {
        match self.sums.iter_mut().find(|(n, _, _)| n == name) {
            Some(e) => {
                e.1 += v;
                e.2 += 1;
            }
            None => self.sums.push((name.to_string(), v, 1)),
        }
    }

    pub fn means(&self) -> Vec<(String, f64)> {
        self.sums.iter().map(|(n, s, c)| (n.clone(), s / *c as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_long_format() {
        let mut log = TrainLog::new("x");
        log.push(EpochRecord { epoch: 0, metrics: vec![("a".into(), 1.5), ("b".into(), -0.25)], seconds: 3.0 })
            .unwrap();
        assert_eq!(log.to_csv(), "epoch,metric_name,value\n0,a,1.5\n0,b,-0.25\n");
    }

    #[test]
    fn non_finite_is_reported() {
        let mut log = TrainLog::new("x");
        let err = log
            .push(EpochRecord { epoch: 4, metrics: vec![("loss".into(), f64::NAN)], seconds: 0.0 })
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { epoch: 4, .. }));
        assert_eq!(log.len(), 1);
    }
}

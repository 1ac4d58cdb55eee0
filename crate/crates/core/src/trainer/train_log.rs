use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRAIN_LOG_HEADER: [&str; 8] =
    ["epoch", "loss_g", "loss_d", "sigma_batch", "tvs", "pcm4", "wass", "js"];

/// One evaluation epoch. Losses are means over that epoch's batches; the
/// remaining columns are measured on fresh evaluation samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub epoch: usize,
    pub loss_g: f64,
    pub loss_d: f64,
    pub sigma_batch: f64,
    pub tvs: f64,
    pub pcm4: f64,
    pub wass: f64,
    pub js: f64,
}

impl LogRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.loss_g,
            self.loss_d,
            self.sigma_batch,
            self.tvs,
            self.pcm4,
            self.wass,
            self.js,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrainLog {
    records: Vec<LogRecord>,
}

impl TrainLog {
    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn first(&self) -> Option<&LogRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&LogRecord> {
        self.records.last()
    }

    pub fn at_epoch(&self, epoch: usize) -> Option<&LogRecord> {
        self.records.iter().find(|r| r.epoch == epoch)
    }

    /// Appends a record; epochs must strictly increase.
    pub fn push(&mut self, rec: LogRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if rec.epoch <= last.epoch {
                return Err(Error::structural(format!(
                    "log epoch {} does not follow {}",
                    rec.epoch, last.epoch
                )));
            }
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        // Header is written explicitly so an empty log still has one.
        w.write_record(TRAIN_LOG_HEADER)
            .map_err(|e| Error::csv("<memory>", e))?;
        for r in &self.records {
            w.write_record([
                r.epoch.to_string(),
                r.loss_g.to_string(),
                r.loss_d.to_string(),
                r.sigma_batch.to_string(),
                r.tvs.to_string(),
                r.pcm4.to_string(),
                r.wass.to_string(),
                r.js.to_string(),
            ])
            .map_err(|e| Error::csv("<memory>", e))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::structural(format!("flushing csv buffer: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
        if header.iter().ne(TRAIN_LOG_HEADER) {
            return Err(Error::input(format!(
                "{}: unexpected training log header",
                path.display()
            )));
        }
        let mut log = Self::default();
        for rec in r.deserialize() {
            let rec: LogRecord = rec.map_err(|e| Error::csv(path, e))?;
            log.push(rec)
                .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
        }
        Ok(log)
    }
}

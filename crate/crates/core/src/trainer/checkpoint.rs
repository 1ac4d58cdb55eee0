use std::fmt;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::generator::GeneratorState;
use super::train_log::TrainLog;
use crate::error::{Error, Result};
use crate::nets::Adam;

pub const CHECKPOINT_FORMAT: &str = "geoqugan-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// Written when training hit a non-finite loss; parameters are those
    /// in effect when the failure was detected.
    Diverged,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "ok",
            Self::Diverged => "diverged",
        })
    }
}

/// Everything needed to continue a run bit-for-bit: parameters, optimizer
/// moments, the training RNG and the log so far. Stored as JSON with
/// round-trip-exact floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub status: RunStatus,
    /// Completed epochs.
    pub epoch: usize,
    pub config: TrainConfig,
    pub sigma_target: f64,
    pub generator: GeneratorState,
    pub discriminator: Vec<f64>,
    pub adam_g: Adam,
    pub adam_d: Adam,
    pub rng: ChaCha8Rng,
    pub log: TrainLog,
}

impl Checkpoint {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        status: RunStatus,
        epoch: usize,
        config: TrainConfig,
        sigma_target: f64,
        generator: GeneratorState,
        discriminator: Vec<f64>,
        adam_g: Adam,
        adam_d: Adam,
        rng: ChaCha8Rng,
        log: TrainLog,
    ) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            status,
            epoch,
            config,
            sigma_target,
            generator,
            discriminator,
            adam_g,
            adam_d,
            rng,
            log,
        }
    }

    pub fn check_header(&self) -> Result<()> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::input(format!(
                "unsupported checkpoint {} v{} (expected {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION})",
                self.format, self.version
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        ckpt.check_header()
            .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
        Ok(ckpt)
    }
}

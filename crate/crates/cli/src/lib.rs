//! Command implementations behind the `geoqugan` binary.

pub mod cli;
pub mod dataset_cmd;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// Env var naming the default root for run directories.
pub const OUT_ROOT_ENV: &str = "GEOQUGAN_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] geoqugan::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_input() => EXIT_INPUT,
            CliError::Io { .. } => EXIT_INPUT,
            CliError::Core(_) => EXIT_RUNTIME,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(io_err(path))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(path, text)
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Core(geoqugan::Error::Input(format!("{}: {e}", path.display()))))
}

pub fn dispatch(cmd: cli::Command) -> Result<()> {
    match cmd {
        cli::Command::Dataset(a) => dataset_cmd::run(&a).map(|_| ()),
        cli::Command::Train(a) => run::train(&a).map(|_| ()),
        cli::Command::Evaluate(a) => run::evaluate(&a).map(|_| ()),
        cli::Command::Report(a) => report::run(&a).map(|_| ()),
    }
}

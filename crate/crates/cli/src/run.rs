//! Run directories: layout, manifest, training and re-evaluation.
//!
//! ```text
//! <run>/manifest.json
//! <run>/train_log.csv
//! <run>/metrics.json
//! <run>/samples.csv
//! <run>/checkpoints/epoch_00025.json ... final.json
//! ```

use std::path::{Path, PathBuf};

use geoqugan::dataset::{read_dataset_csv, sha256_file, weights_of};
use geoqugan::k4::{EdgeWeights, EDGE_LABELS};
use geoqugan::metrics::MetricsReport;
use geoqugan::trainer::{
    final_evaluation, Checkpoint, Generator, ModelPreset, RunStatus, TrainConfig, Trainer,
    MODEL_PRESETS,
};
use log::info;
use serde::{Deserialize, Serialize};

use crate::cli::{EvaluateArgs, TrainArgs};
use crate::{io_err, read_json, write_file, write_json, CliError, Result};

pub const MANIFEST_FORMAT: &str = "geoqugan-run";
pub const MANIFEST_VERSION: u32 = 1;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const FINAL_CHECKPOINT: &str = "checkpoints/final.json";
pub const DIVERGED_CHECKPOINT: &str = "checkpoints/diverged.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Running,
    Complete,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    pub path: PathBuf,
    pub sha256: String,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub train_log: String,
    pub metrics: String,
    pub samples: String,
    pub checkpoints: String,
    pub final_checkpoint: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            train_log: TRAIN_LOG_FILE.into(),
            metrics: METRICS_FILE.into(),
            samples: SAMPLES_FILE.into(),
            checkpoints: CHECKPOINT_DIR.into(),
            final_checkpoint: FINAL_CHECKPOINT.into(),
        }
    }
}

/// Everything needed to reproduce a run directory from its dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub version: u32,
    pub model: String,
    pub seed: u64,
    pub code_version: String,
    pub state: RunState,
    pub config: TrainConfig,
    pub dataset: DatasetRef,
    pub sigma_target: f64,
    pub outputs: Outputs,
}

impl RunManifest {
    pub fn load(run: &Path) -> Result<Self> {
        let m: Self = read_json(&run.join(MANIFEST_FILE))?;
        if m.format != MANIFEST_FORMAT || m.version != MANIFEST_VERSION {
            return Err(geoqugan::Error::Input(format!(
                "{}: unsupported manifest {} v{}",
                run.display(),
                m.format,
                m.version
            ))
            .into());
        }
        Ok(m)
    }
}

/// Files that must exist for a run to count as finished.
pub fn missing_outputs(run: &Path) -> Vec<&'static str> {
    [MANIFEST_FILE, FINAL_CHECKPOINT, TRAIN_LOG_FILE, METRICS_FILE, SAMPLES_FILE]
        .into_iter()
        .filter(|f| !run.join(f).is_file())
        .collect()
}

pub fn preset(name: &str) -> Result<ModelPreset> {
    ModelPreset::by_name(name).map_err(|e| CliError::Usage(e.to_string()))
}

fn expand_models(names: &[String]) -> Result<Vec<ModelPreset>> {
    if names.iter().any(|n| n == "all") {
        return Ok(MODEL_PRESETS.to_vec());
    }
    names.iter().map(|n| preset(n)).collect()
}

/// Defaults, then the JSON config file, then the model preset and flags.
pub fn build_config(args: &TrainArgs, model: &ModelPreset) -> Result<TrainConfig> {
    let mut cfg: TrainConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => TrainConfig::default(),
    };
    model.apply(&mut cfg);
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = args.$flag.clone() { cfg.$field = v; })*
        };
    }
    set!(
        epochs => epochs,
        batch_size => batch_size,
        lambda => lambda,
        variance => variance_regularizer,
        scaling => scaling_head,
        eval_every => eval_every,
        eval_samples => eval_samples,
        final_eval_samples => final_eval_samples,
        discriminator_hidden => discriminator_hidden,
        opposite_from_data => opposite_from_data
    );
    if let Some(n) = args.bootstrap_resamples {
        cfg.metrics.bootstrap.resamples = n;
    }
    Ok(cfg)
}

pub fn load_weights(path: &Path) -> Result<(Vec<EdgeWeights>, DatasetRef)> {
    let records = read_dataset_csv(path)?;
    let dataset = DatasetRef {
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
        records: records.len(),
    };
    Ok((weights_of(&records), dataset))
}

pub fn write_samples(path: &Path, samples: &[EdgeWeights]) -> Result<()> {
    let mut out = EDGE_LABELS
        .iter()
        .map(|e| format!("w_{}", e.to_lowercase()))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for w in samples {
        let row: Vec<String> = w.iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_file(path, out)
}

pub fn read_samples(path: &Path) -> Result<Vec<EdgeWeights>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |line: usize| {
        CliError::from(geoqugan::Error::Input(format!(
            "{}: line {line}: expected six numbers",
            path.display()
        )))
    };
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(i + 1))?;
            <[f64; 6]>::try_from(vals).map_err(|_| bad(i + 1))
        })
        .collect()
}

pub fn print_report(title: &str, r: &MetricsReport) {
    println!("{title}");
    for (name, e, scale) in [
        ("Wass", r.wass, 1.0),
        ("JS", r.js, 1.0),
        ("TVS %", r.tvs, 100.0),
        ("4PCM %", r.pcm4, 100.0),
        ("sigma", r.sigma, 1.0),
    ] {
        println!(
            "  {name:<7} {:>9.4}  [{:.4}, {:.4}]",
            scale * e.point,
            scale * e.ci_low,
            scale * e.ci_high
        );
    }
}

fn prepare_dir(run: &Path) -> Result<()> {
    let ckpts = run.join(CHECKPOINT_DIR);
    std::fs::create_dir_all(&ckpts).map_err(io_err(&ckpts))
}

fn checkpoint_writer(run: &Path) -> impl FnMut(&Checkpoint) -> geoqugan::Result<()> + '_ {
    move |c: &Checkpoint| {
        let name = match c.status {
            RunStatus::Ok => format!("epoch_{:05}.json", c.epoch),
            RunStatus::Diverged => "diverged.json".to_string(),
        };
        c.save(&run.join(CHECKPOINT_DIR).join(name))
    }
}

/// Trains a prepared trainer and writes every run output.
fn execute(run: &Path, trainer: Trainer<'_>, mut manifest: RunManifest) -> Result<()> {
    manifest.state = RunState::Running;
    write_json(&run.join(MANIFEST_FILE), &manifest)?;
    let outcome = match trainer.run(checkpoint_writer(run)) {
        Ok(o) => o,
        Err(e) => {
            if matches!(e, geoqugan::Error::Training(_)) {
                manifest.state = RunState::Diverged;
                write_json(&run.join(MANIFEST_FILE), &manifest)?;
                eprintln!("diagnostic checkpoint: {}", run.join(DIVERGED_CHECKPOINT).display());
            }
            return Err(e.into());
        }
    };
    outcome.checkpoint.save(&run.join(FINAL_CHECKPOINT))?;
    outcome.log.write_csv(&run.join(TRAIN_LOG_FILE))?;
    write_samples(&run.join(SAMPLES_FILE), &outcome.samples)?;
    write_json(&run.join(METRICS_FILE), &outcome.report)?;
    manifest.state = RunState::Complete;
    write_json(&run.join(MANIFEST_FILE), &manifest)?;
    print_report(&format!("{} (seed {}) -> {}", manifest.model, manifest.seed, run.display()), &outcome.report);
    Ok(())
}

fn resume(args: &TrainArgs, ckpt_path: &Path) -> Result<Vec<PathBuf>> {
    let run = ckpt_path
        .parent()
        .and_then(Path::parent)
        .ok_or_else(|| CliError::Usage("checkpoint must live in <run>/checkpoints/".into()))?
        .to_path_buf();
    let mut manifest = RunManifest::load(&run)?;
    let mut ckpt = Checkpoint::load(ckpt_path)?;
    if let Some(epochs) = args.epochs {
        if epochs < ckpt.epoch {
            return Err(CliError::Usage(format!(
                "--epochs {epochs} is before the checkpoint epoch {}",
                ckpt.epoch
            )));
        }
        ckpt.config.epochs = epochs;
    }
    let (data, dataset) = load_weights(&args.data)?;
    if dataset.sha256 != manifest.dataset.sha256 {
        return Err(geoqugan::Error::Input(format!(
            "{} is not the dataset this run was trained on",
            args.data.display()
        ))
        .into());
    }
    manifest.config = ckpt.config.clone();
    info!("resuming {} from epoch {}", run.display(), ckpt.epoch);
    let trainer = Trainer::resume(ckpt, &data)?;
    execute(&run, trainer, manifest)?;
    Ok(vec![run])
}

/// Trains every requested model for every seed. Returns the run directories.
pub fn train(args: &TrainArgs) -> Result<Vec<PathBuf>> {
    if let Some(ckpt) = &args.resume {
        return resume(args, ckpt);
    }
    let models = expand_models(&args.model)?;
    let (data, dataset) = load_weights(&args.data)?;
    let mut runs = Vec::new();
    let mut plan = Vec::new();
    for model in &models {
        let base = build_config(args, model)?;
        let seeds = if args.seed.is_empty() { vec![base.seed] } else { args.seed.clone() };
        for seed in seeds {
            let cfg = TrainConfig { seed, ..base.clone() };
            cfg.validate()?;
            plan.push((model, cfg));
        }
    }
    if args.run_name.is_some() && plan.len() != 1 {
        return Err(CliError::Usage("--run-name needs exactly one model and seed".into()));
    }
    for (model, cfg) in plan {
        let name = args
            .run_name
            .clone()
            .unwrap_or_else(|| format!("{}_seed{}", model.name, cfg.seed));
        let run = args.out_root.join(name);
        prepare_dir(&run)?;
        let trainer = Trainer::new(cfg.clone(), &data)?;
        let manifest = RunManifest {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            model: model.name.into(),
            seed: cfg.seed,
            code_version: env!("CARGO_PKG_VERSION").into(),
            state: RunState::Running,
            sigma_target: trainer.sigma_target(),
            config: cfg,
            dataset: dataset.clone(),
            outputs: Outputs::default(),
        };
        info!("training {} into {}", model.name, run.display());
        execute(&run, trainer, manifest)?;
        runs.push(run);
    }
    Ok(runs)
}

pub fn evaluate(args: &EvaluateArgs) -> Result<MetricsReport> {
    let missing = missing_outputs(&args.run);
    if !missing.is_empty() {
        return Err(geoqugan::Error::Input(format!(
            "{} is not a finished run (missing {})",
            args.run.display(),
            missing.join(", ")
        ))
        .into());
    }
    let manifest = RunManifest::load(&args.run)?;
    let ckpt = Checkpoint::load(&args.run.join(FINAL_CHECKPOINT))?;
    let generator = Generator::from_state(&ckpt.generator)?;
    let data_path = args.data.clone().unwrap_or_else(|| manifest.dataset.path.clone());
    let (data, dataset) = load_weights(&data_path)?;
    if args.data.is_none() && dataset.sha256 != manifest.dataset.sha256 {
        return Err(geoqugan::Error::Input(format!(
            "{} changed since training",
            data_path.display()
        ))
        .into());
    }
    let mut cfg = ckpt.config.clone();
    if let Some(n) = args.samples {
        cfg.final_eval_samples = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let (_, report) = final_evaluation(&generator, &data, &cfg)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.run.join("evaluation.json"));
    write_json(&out, &report)?;
    print_report(&format!("{} (seed {})", manifest.model, manifest.seed), &report);
    Ok(report)
}

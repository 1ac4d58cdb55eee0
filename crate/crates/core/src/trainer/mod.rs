//! Adversarial training of classical and quantum generators against a
//! shared MLP discriminator.

mod checkpoint;
mod config;
mod generator;
mod train_log;
mod losses;

pub use checkpoint::{Checkpoint, RunStatus, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use config::{GeneratorKind, GradientMethod, ModelPreset, TrainConfig, MODEL_PRESETS};
pub use generator::{sample_latents, Generator, GeneratorState, Latent, QuantumGenerator, LATENT_DIM};
pub use train_log::{LogRecord, TrainLog, TRAIN_LOG_HEADER};
pub use losses::{bce_loss, variance_loss, VarianceLoss};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::k4::{EdgeWeights, NUM_EDGES};
use crate::metrics::{mean_sample_std, snapshot, MetricConfig, MetricsReport};
use crate::nets::{Adam, Mlp, MlpCache, MlpSpec};

/// RNG stream reserved for the final evaluation; per-epoch evaluations use
/// the epoch number as their stream.
const FINAL_EVAL_STREAM: u64 = u64::MAX;

fn eval_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Discriminator probabilities and caches for a batch, in order.
fn discriminate(disc: &Mlp, xs: &[EdgeWeights]) -> Result<(Vec<f64>, Vec<MlpCache>)> {
    let mut preds = Vec::with_capacity(xs.len());
    let mut caches = Vec::with_capacity(xs.len());
    for x in xs {
        let (out, cache) = disc.forward(x)?;
        preds.push(out[0]);
        caches.push(cache);
    }
    Ok((preds, caches))
}

/// Generator loss with its gradient w.r.t. the generator's trainable values.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorObjective {
    /// `BCE(D(G(z)), 1)` plus `λ·(σ_batch − σ_target)²` when enabled.
    pub loss: f64,
    pub bce: f64,
    pub sigma_batch: f64,
    pub grad: Vec<f64>,
}

/// Evaluates the generator objective on latents `zs` with `disc` held fixed.
pub fn generator_objective(
    gen: &Generator,
    disc: &Mlp,
    zs: &[Latent],
    cfg: &TrainConfig,
    sigma_target: f64,
) -> Result<GeneratorObjective> {
    let fake = gen.generate_batch(zs)?;
    let (preds, caches) = discriminate(disc, &fake)?;
    let (bce, grad_p) = bce_loss(&preds, &vec![1.0; preds.len()])?;
    let mut grad_w = Vec::with_capacity(fake.len());
    for (cache, gp) in caches.iter().zip(&grad_p) {
        let gx = disc.backward_into(cache, &[*gp], None)?;
        grad_w.push(std::array::from_fn::<f64, NUM_EDGES, _>(|k| gx[k]));
    }
    let mut loss = bce;
    let sigma_batch = if cfg.variance_regularizer {
        let v = variance_loss(&fake, sigma_target)?;
        loss += cfg.lambda * v.loss;
        for (g, vg) in grad_w.iter_mut().zip(&v.grad) {
            for k in 0..NUM_EDGES {
                g[k] += cfg.lambda * vg[k];
            }
        }
        v.sigma_batch
    } else {
        mean_sample_std(&fake)
    };
    let grad = gen.pullback(zs, &grad_w)?;
    Ok(GeneratorObjective {
        loss,
        bce,
        sigma_batch,
        grad,
    })
}

/// Draws `n` samples with the given RNG and scores them against `real`.
pub fn evaluate(
    gen: &Generator,
    real: &[EdgeWeights],
    n: usize,
    metrics: &MetricConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<EdgeWeights>, MetricsReport)> {
    let zs = sample_latents(rng, n);
    let samples = gen.generate_batch(&zs)?;
    let report = MetricsReport::compute(&samples, real, metrics)?;
    Ok((samples, report))
}

/// The end-of-training evaluation: `cfg.final_eval_samples` draws from a
/// seed-derived stream that training itself never touches.
pub fn final_evaluation(
    gen: &Generator,
    real: &[EdgeWeights],
    cfg: &TrainConfig,
) -> Result<(Vec<EdgeWeights>, MetricsReport)> {
    let mut rng = eval_rng(cfg.seed, FINAL_EVAL_STREAM);
    evaluate(gen, real, cfg.final_eval_samples, &cfg.metrics, &mut rng)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub generator: Generator,
    pub discriminator: Mlp,
    pub log: TrainLog,
    pub sigma_target: f64,
    /// Final-evaluation samples behind `report`.
    pub samples: Vec<EdgeWeights>,
    pub report: MetricsReport,
    pub checkpoint: Checkpoint,
}

/// Mean losses over the batches of one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss_g: f64,
    pub loss_d: f64,
}

/// Full training state; advances one epoch at a time.
#[derive(Debug, Clone)]
pub struct Trainer<'a> {
    cfg: TrainConfig,
    data: &'a [EdgeWeights],
    sigma_target: f64,
    generator: Generator,
    discriminator: Mlp,
    adam_g: Adam,
    adam_d: Adam,
    rng: ChaCha8Rng,
    epoch: usize,
    log: TrainLog,
}

fn check_data(cfg: &TrainConfig, data: &[EdgeWeights]) -> Result<()> {
    cfg.validate()?;
    if data.len() < cfg.batch_size {
        return Err(Error::input(format!(
            "dataset has {} samples, fewer than one batch of {}",
            data.len(),
            cfg.batch_size
        )));
    }
    for (i, w) in data.iter().enumerate() {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("sample {i} is not on the simplex")));
        }
    }
    Ok(())
}

impl<'a> Trainer<'a> {
    pub fn new(cfg: TrainConfig, data: &'a [EdgeWeights]) -> Result<Self> {
        check_data(&cfg, data)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let generator = Generator::init(&cfg, data, &mut rng)?;
        let discriminator = Mlp::init(MlpSpec::discriminator(&cfg.discriminator_hidden)?, &mut rng);
        Ok(Self {
            sigma_target: mean_sample_std(data),
            adam_g: Adam::new(generator.num_trainable(), cfg.lr_g),
            adam_d: Adam::new(discriminator.params().len(), cfg.lr_d),
            generator,
            discriminator,
            rng,
            epoch: 0,
            log: TrainLog::default(),
            cfg,
            data,
        })
    }

    /// Continues from a healthy checkpoint. The dataset must be the one the
    /// run started with.
    pub fn resume(ckpt: Checkpoint, data: &'a [EdgeWeights]) -> Result<Self> {
        ckpt.check_header()?;
        if ckpt.status != RunStatus::Ok {
            return Err(Error::input(format!(
                "cannot resume from a {} checkpoint",
                ckpt.status
            )));
        }
        check_data(&ckpt.config, data)?;
        let sigma_target = mean_sample_std(data);
        if sigma_target.to_bits() != ckpt.sigma_target.to_bits() {
            return Err(Error::input("dataset differs from the one the checkpoint was trained on"));
        }
        let generator = Generator::from_state(&ckpt.generator)?;
        let discriminator = Mlp::new(
            MlpSpec::discriminator(&ckpt.config.discriminator_hidden)?,
            ckpt.discriminator,
        )?;
        if ckpt.adam_g.m.len() != generator.num_trainable()
            || ckpt.adam_d.m.len() != discriminator.params().len()
        {
            return Err(Error::input("optimizer state does not match the networks"));
        }
        Ok(Self {
            cfg: ckpt.config,
            data,
            sigma_target,
            generator,
            discriminator,
            adam_g: ckpt.adam_g,
            adam_d: ckpt.adam_d,
            rng: ckpt.rng,
            epoch: ckpt.epoch,
            log: ckpt.log,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn sigma_target(&self) -> f64 {
        self.sigma_target
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn discriminator(&self) -> &Mlp {
        &self.discriminator
    }

    pub fn log(&self) -> &TrainLog {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        self.epoch >= self.cfg.epochs
    }

    pub fn checkpoint(&self, status: RunStatus) -> Checkpoint {
        Checkpoint::new(
            status,
            self.epoch,
            self.cfg.clone(),
            self.sigma_target,
            self.generator.state(),
            self.discriminator.params().to_vec(),
            self.adam_g.clone(),
            self.adam_d.clone(),
            self.rng.clone(),
            self.log.clone(),
        )
    }

    fn discriminator_step(&mut self, real: &[EdgeWeights], fake: &[EdgeWeights]) -> Result<f64> {
        let batch: Vec<EdgeWeights> = real.iter().chain(fake).copied().collect();
        let targets: Vec<f64> = real
            .iter()
            .map(|_| self.cfg.real_label)
            .chain(fake.iter().map(|_| self.cfg.fake_label))
            .collect();
        let (preds, caches) = discriminate(&self.discriminator, &batch)?;
        let (loss, grad_p) = bce_loss(&preds, &targets)?;
        if !loss.is_finite() {
            return Err(Error::Training(format!("discriminator loss is {loss}")));
        }
        let mut grad = vec![0.0; self.discriminator.params().len()];
        for (cache, gp) in caches.iter().zip(&grad_p) {
            self.discriminator
                .backward_into(cache, &[*gp], Some(&mut grad))?;
        }
        self.adam_d.step(self.discriminator.params_mut(), &grad)?;
        Ok(loss)
    }

    fn generator_step(&mut self, zs: &[Latent]) -> Result<f64> {
        let obj = generator_objective(
            &self.generator,
            &self.discriminator,
            zs,
            &self.cfg,
            self.sigma_target,
        )?;
        if !obj.loss.is_finite() {
            return Err(Error::Training(format!("generator loss is {}", obj.loss)));
        }
        let mut values = self.generator.trainable();
        self.adam_g.step(&mut values, &obj.grad)?;
        self.generator.set_trainable(&values)?;
        Ok(obj.loss)
    }

    /// One pass over the shuffled data: a discriminator step then a
    /// generator step per full batch.
    pub fn step_epoch(&mut self) -> Result<EpochStats> {
        if self.is_finished() {
            return Err(Error::structural("training already finished"));
        }
        let b = self.cfg.batch_size;
        let mut order: Vec<usize> = (0..self.data.len()).collect();
        order.shuffle(&mut self.rng);
        let (mut sum_g, mut sum_d, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks_exact(b) {
            let real: Vec<EdgeWeights> = chunk.iter().map(|&i| self.data[i]).collect();
            let zs = sample_latents(&mut self.rng, b);
            let fake = self.generator.generate_batch(&zs)?;
            sum_d += self.discriminator_step(&real, &fake)?;
            sum_g += self.generator_step(&zs)?;
            batches += 1;
        }
        self.epoch += 1;
        let n = batches as f64;
        Ok(EpochStats {
            epoch: self.epoch,
            loss_g: sum_g / n,
            loss_d: sum_d / n,
        })
    }

    fn record(&mut self, stats: &EpochStats) -> Result<()> {
        let mut rng = eval_rng(self.cfg.seed, self.epoch as u64);
        let zs = sample_latents(&mut rng, self.cfg.eval_samples);
        let samples = self.generator.generate_batch(&zs)?;
        let snap = snapshot(&samples, self.data, &self.cfg.metrics)?;
        let rec = LogRecord {
            epoch: self.epoch,
            loss_g: stats.loss_g,
            loss_d: stats.loss_d,
            sigma_batch: snap.sigma,
            tvs: snap.tvs,
            pcm4: snap.pcm4,
            wass: snap.wass,
            js: snap.js,
        };
        if !rec.is_finite() {
            return Err(Error::Training(format!(
                "non-finite evaluation at epoch {}",
                self.epoch
            )));
        }
        log::info!(
            "epoch {:>4}  loss_g {:.4}  loss_d {:.4}  sigma {:.4}  tvs {:.3}  pcm4 {:.3}  wass {:.4}",
            rec.epoch,
            rec.loss_g,
            rec.loss_d,
            rec.sigma_batch,
            rec.tvs,
            rec.pcm4,
            rec.wass
        );
        self.log.push(rec)
    }

    fn advance(&mut self, on_checkpoint: &mut dyn FnMut(&Checkpoint) -> Result<()>) -> Result<()> {
        while !self.is_finished() {
            let stats = self.step_epoch()?;
            if !(stats.loss_g.is_finite() && stats.loss_d.is_finite()) {
                return Err(Error::Training(format!(
                    "non-finite epoch loss at epoch {}",
                    stats.epoch
                )));
            }
            if self.cfg.is_eval_epoch(self.epoch) {
                self.record(&stats)?;
                on_checkpoint(&self.checkpoint(RunStatus::Ok))?;
            }
        }
        Ok(())
    }

    /// Trains to the configured epoch count. Checkpoints go to
    /// `on_checkpoint` at every evaluation epoch; on divergence a
    /// diagnostic checkpoint is emitted before the error is returned.
    pub fn run(mut self, mut on_checkpoint: impl FnMut(&Checkpoint) -> Result<()>) -> Result<TrainOutcome> {
        if let Err(e) = self.advance(&mut on_checkpoint) {
            if matches!(e, Error::Training(_)) {
                on_checkpoint(&self.checkpoint(RunStatus::Diverged))?;
            }
            return Err(e);
        }
        let (samples, report) = final_evaluation(&self.generator, self.data, &self.cfg)?;
        Ok(TrainOutcome {
            checkpoint: self.checkpoint(RunStatus::Ok),
            generator: self.generator,
            discriminator: self.discriminator,
            log: self.log,
            sigma_target: self.sigma_target,
            samples,
            report,
        })
    }
}

/// Trains from scratch, discarding intermediate checkpoints.
pub fn train(cfg: &TrainConfig, data: &[EdgeWeights]) -> Result<TrainOutcome> {
    Trainer::new(cfg.clone(), data)?.run(|_| Ok(()))
}

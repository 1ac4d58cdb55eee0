use serde::{Deserialize, Serialize};

use crate::ansatz::TopologyVariant;
use crate::error::{Error, Result};
use crate::metrics::MetricConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Classical,
    Quantum(TopologyVariant),
}

/// How quantum generator gradients are obtained during training.
///
/// Both give the exact same derivative; `ParameterShift` runs two (four for
/// CRY) circuits per parameter and sample, `Adjoint` one reverse sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    Adjoint,
    ParameterShift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub generator: GeneratorKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub real_label: f64,
    pub fake_label: f64,
    pub variance_regularizer: bool,
    pub lambda: f64,
    pub scaling_head: bool,
    /// A log record is written at epoch 1, every `eval_every` epochs, and at
    /// the final epoch.
    pub eval_every: usize,
    pub eval_samples: usize,
    pub final_eval_samples: usize,
    pub seed: u64,
    pub discriminator_hidden: Vec<usize>,
    pub rotation_init_std: f64,
    pub entangler_init_std: f64,
    /// Derive Opposite/Combined couplings from training-set correlations.
    pub opposite_from_data: bool,
    pub gradient: GradientMethod,
    pub metrics: MetricConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorKind::Quantum(TopologyVariant::Triangle),
            epochs: 1000,
            batch_size: 64,
            lr_g: 5e-4,
            lr_d: 2e-4,
            real_label: 0.9,
            fake_label: 0.0,
            variance_regularizer: false,
            lambda: 5000.0,
            scaling_head: false,
            eval_every: 25,
            eval_samples: 500,
            final_eval_samples: 5000,
            seed: 0,
            discriminator_hidden: vec![256, 128, 64],
            rotation_init_std: 0.1,
            // N(0, 0.01) read as a variance.
            entangler_init_std: 0.1,
            opposite_from_data: false,
            gradient: GradientMethod::Adjoint,
            metrics: MetricConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::input(m));
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return fail("batch size must be at least 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be finite and non-negative, got {}", self.lambda));
        }
        if !(self.real_label > 0.0 && self.real_label <= 1.0) {
            return fail(format!("real label must be in (0, 1], got {}", self.real_label));
        }
        if !(0.0..1.0).contains(&self.fake_label) {
            return fail(format!("fake label must be in [0, 1), got {}", self.fake_label));
        }
        if !(self.lr_g > 0.0 && self.lr_d > 0.0) {
            return fail("learning rates must be positive".into());
        }
        if self.eval_every == 0 {
            return fail("evaluation cadence must be at least 1 epoch".into());
        }
        if self.eval_samples < 2 || self.final_eval_samples < 2 {
            return fail("evaluation needs at least 2 samples".into());
        }
        if self.discriminator_hidden.len() != 3 {
            return fail(format!(
                "discriminator needs 3 hidden layers, got {}",
                self.discriminator_hidden.len()
            ));
        }
        if self.generator == GeneratorKind::Classical && self.scaling_head {
            return fail("the scaling head applies to quantum generators only".into());
        }
        if self.rotation_init_std < 0.0 || self.entangler_init_std < 0.0 {
            return fail("initialization std must be non-negative".into());
        }
        Ok(())
    }

    pub fn is_eval_epoch(&self, epoch: usize) -> bool {
        epoch == 1 || epoch % self.eval_every == 0 || epoch == self.epochs
    }

    pub fn eval_epochs(&self) -> Vec<usize> {
        (1..=self.epochs).filter(|&e| self.is_eval_epoch(e)).collect()
    }
}

/// A named experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelPreset {
    pub name: &'static str,
    pub generator: GeneratorKind,
    pub variance_regularizer: bool,
    pub scaling_head: bool,
}

const fn quantum(name: &'static str, v: TopologyVariant) -> ModelPreset {
    ModelPreset {
        name,
        generator: GeneratorKind::Quantum(v),
        variance_regularizer: false,
        scaling_head: false,
    }
}

pub const MODEL_PRESETS: [ModelPreset; 12] = [
    ModelPreset {
        name: "gan_classic",
        generator: GeneratorKind::Classical,
        variance_regularizer: false,
        scaling_head: false,
    },
    quantum("qugan_ring", TopologyVariant::Ring),
    quantum("qugan_all_to_all", TopologyVariant::AllToAll),
    quantum("qugan_triangle", TopologyVariant::Triangle),
    quantum("qugan_opposite", TopologyVariant::Opposite),
    quantum("qugan_combined", TopologyVariant::Combined),
    quantum("qugan_triangle_cyclic_cnot", TopologyVariant::TriangleCyclicCnot),
    quantum("qugan_triangle_cyclic_crot", TopologyVariant::TriangleCyclicCrot),
    quantum("qugan_triangle_noncyclic_cnot", TopologyVariant::TriangleNoncyclicCnot),
    quantum("qugan_triangle_noncyclic_crot", TopologyVariant::TriangleNoncyclicCrot),
    ModelPreset {
        name: "qugan_triangle_loss",
        generator: GeneratorKind::Quantum(TopologyVariant::Triangle),
        variance_regularizer: true,
        scaling_head: false,
    },
    ModelPreset {
        name: "qugan_triangle_loss_scale",
        generator: GeneratorKind::Quantum(TopologyVariant::Triangle),
        variance_regularizer: true,
        scaling_head: true,
    },
];

impl ModelPreset {
    pub fn by_name(name: &str) -> Result<Self> {
        MODEL_PRESETS
            .iter()
            .copied()
            .find(|p| p.name == name)
            .ok_or_else(|| {
                let names: Vec<_> = MODEL_PRESETS.iter().map(|p| p.name).collect();
                Error::input(format!("unknown model '{name}', expected one of: {}", names.join(", ")))
            })
    }

    pub fn apply(&self, cfg: &mut TrainConfig) {
        cfg.generator = self.generator;
        cfg.variance_regularizer = self.variance_regularizer;
        cfg.scaling_head = self.scaling_head;
    }

    pub fn config(&self) -> TrainConfig {
        let mut cfg = TrainConfig::default();
        self.apply(&mut cfg);
        cfg
    }
}

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{GeneratorKind, GradientMethod, TrainConfig};
use crate::ansatz::{Ansatz, TopologyVariant};
use crate::error::{Error, Result};
use crate::k4::{EdgeWeights, NUM_EDGES};
use crate::nets::{simplex_head, simplex_head_backward, Mlp, MlpSpec, ScalingHead};

pub const LATENT_DIM: usize = 6;

pub type Latent = [f64; LATENT_DIM];

/// Draws `n` latent vectors from `N(0, I)`.
pub fn sample_latents<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Latent> {
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.sample(StandardNormal)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGenerator {
    ansatz: Ansatz,
    params: Vec<f64>,
    head: Option<ScalingHead>,
    gradient: GradientMethod,
}

impl QuantumGenerator {
    pub fn new(
        ansatz: Ansatz,
        params: Vec<f64>,
        head: Option<ScalingHead>,
        gradient: GradientMethod,
    ) -> Result<Self> {
        if params.len() != ansatz.num_params() {
            return Err(Error::structural(format!(
                "{} expects {} angles, got {}",
                ansatz.variant(),
                ansatz.num_params(),
                params.len()
            )));
        }
        Ok(Self {
            ansatz,
            params,
            head,
            gradient,
        })
    }

    pub fn ansatz(&self) -> &Ansatz {
        &self.ansatz
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn head(&self) -> Option<&ScalingHead> {
        self.head.as_ref()
    }

    fn project(&self, v: &[f64; NUM_EDGES]) -> EdgeWeights {
        match &self.head {
            Some(h) => h.forward(v),
            None => simplex_head(v),
        }
    }

    fn generate(&self, z: &Latent) -> Result<EdgeWeights> {
        Ok(self.project(&self.ansatz.forward(z, &self.params)?))
    }

    /// Gradient of `grad_wᵀ · G(z)` w.r.t. circuit angles then head scales.
    fn pullback_one(&self, z: &Latent, grad_w: &EdgeWeights) -> Result<Vec<f64>> {
        let v = self.ansatz.forward(z, &self.params)?;
        let (grad_v, grad_pre) = match &self.head {
            Some(h) => {
                let (gv, gp) = h.backward(&v, grad_w);
                (gv, Some(gp))
            }
            None => (simplex_head_backward(&v, grad_w), None),
        };
        let mut out = match self.gradient {
            GradientMethod::Adjoint => self.ansatz.vjp(z, &self.params, &grad_v)?.1,
            GradientMethod::ParameterShift => self.ansatz.jacobian(z, &self.params)?.vjp(&grad_v),
        };
        if let Some(gp) = grad_pre {
            out.extend_from_slice(&gp);
        }
        Ok(out)
    }
}

/// A trainable map from latent vectors to K4 edge weights.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Classical(Mlp),
    Quantum(QuantumGenerator),
}

impl Generator {
    /// Fresh generator for `cfg`. `data` is only consulted for data-driven
    /// opposite-edge couplings.
    pub fn init<R: Rng + ?Sized>(cfg: &TrainConfig, data: &[EdgeWeights], rng: &mut R) -> Result<Self> {
        match cfg.generator {
            GeneratorKind::Classical => Ok(Self::Classical(Mlp::init(MlpSpec::classical_generator(), rng))),
            GeneratorKind::Quantum(variant) => {
                let ansatz = if cfg.opposite_from_data && variant.uses_opposite_pairs() {
                    Ansatz::data_driven(variant, data)?
                } else {
                    Ansatz::new(variant)?
                };
                let params = ansatz.init_params(rng, cfg.rotation_init_std, cfg.entangler_init_std);
                let head = cfg.scaling_head.then(ScalingHead::default);
                Ok(Self::Quantum(QuantumGenerator::new(ansatz, params, head, cfg.gradient)?))
            }
        }
    }

    pub fn kind(&self) -> GeneratorKind {
        match self {
            Self::Classical(_) => GeneratorKind::Classical,
            Self::Quantum(q) => GeneratorKind::Quantum(q.ansatz.variant()),
        }
    }

    pub fn generate(&self, z: &Latent) -> Result<EdgeWeights> {
        match self {
            Self::Classical(mlp) => {
                let (out, _) = mlp.forward(z)?;
                Ok(std::array::from_fn(|i| out[i]))
            }
            Self::Quantum(q) => q.generate(z),
        }
    }

    /// Samples in latent order; evaluated in parallel.
    pub fn generate_batch(&self, zs: &[Latent]) -> Result<Vec<EdgeWeights>> {
        zs.par_iter().map(|z| self.generate(z)).collect()
    }

    /// All trainable values as one flat vector (circuit angles, then head
    /// pre-scales when present).
    pub fn trainable(&self) -> Vec<f64> {
        match self {
            Self::Classical(mlp) => mlp.params().to_vec(),
            Self::Quantum(q) => {
                let mut out = q.params.clone();
                if let Some(h) = &q.head {
                    out.extend_from_slice(&h.pre_scale);
                }
                out
            }
        }
    }

    pub fn num_trainable(&self) -> usize {
        match self {
            Self::Classical(mlp) => mlp.params().len(),
            Self::Quantum(q) => q.params.len() + if q.head.is_some() { NUM_EDGES } else { 0 },
        }
    }

    pub fn set_trainable(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_trainable() {
            return Err(Error::structural(format!(
                "generator has {} trainable values, got {}",
                self.num_trainable(),
                values.len()
            )));
        }
        match self {
            Self::Classical(mlp) => mlp.params_mut().copy_from_slice(values),
            Self::Quantum(q) => {
                let n = q.params.len();
                q.params.copy_from_slice(&values[..n]);
                if let Some(h) = &mut q.head {
                    h.pre_scale.copy_from_slice(&values[n..]);
                }
            }
        }
        Ok(())
    }

    /// `Σ_b grad_ws[b]ᵀ · ∂G(zs[b])/∂trainable`. Per-sample terms run in
    /// parallel and are summed in batch order.
    pub fn pullback(&self, zs: &[Latent], grad_ws: &[EdgeWeights]) -> Result<Vec<f64>> {
        if zs.len() != grad_ws.len() {
            return Err(Error::structural(format!(
                "{} latents vs {} output gradients",
                zs.len(),
                grad_ws.len()
            )));
        }
        let per_sample: Vec<Vec<f64>> = zs
            .par_iter()
            .zip(grad_ws.par_iter())
            .map(|(z, g)| match self {
                Self::Classical(mlp) => {
                    let (_, cache) = mlp.forward(z)?;
                    Ok(mlp.backward(&cache, g)?.0)
                }
                Self::Quantum(q) => q.pullback_one(z, g),
            })
            .collect::<Result<_>>()?;
        let mut total = vec![0.0; self.num_trainable()];
        for g in &per_sample {
            for (t, x) in total.iter_mut().zip(g) {
                *t += x;
            }
        }
        Ok(total)
    }

    pub fn state(&self) -> GeneratorState {
        match self {
            Self::Classical(mlp) => GeneratorState::Classical {
                params: mlp.params().to_vec(),
            },
            Self::Quantum(q) => GeneratorState::Quantum {
                variant: q.ansatz.variant(),
                pairs: q.ansatz.pairs().to_vec(),
                params: q.params.clone(),
                scales: q.head.as_ref().map(ScalingHead::alphas),
                pre_scale: q.head.as_ref().map(|h| h.pre_scale),
                gradient: q.gradient,
            },
        }
    }

    pub fn from_state(state: &GeneratorState) -> Result<Self> {
        match state {
            GeneratorState::Classical { params } => Ok(Self::Classical(Mlp::new(
                MlpSpec::classical_generator(),
                params.clone(),
            )?)),
            GeneratorState::Quantum {
                variant,
                pairs,
                params,
                pre_scale,
                gradient,
                ..
            } => {
                let ansatz = Ansatz::with_pairs(*variant, pairs.clone())?;
                let head = pre_scale.map(|pre_scale| ScalingHead { pre_scale });
                Ok(Self::Quantum(QuantumGenerator::new(ansatz, params.clone(), head, *gradient)?))
            }
        }
    }
}

/// Serializable generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorState {
    Classical {
        params: Vec<f64>,
    },
    Quantum {
        variant: TopologyVariant,
        pairs: Vec<(usize, usize)>,
        params: Vec<f64>,
        /// Effective per-edge scales, informational only.
        scales: Option<[f64; NUM_EDGES]>,
        pre_scale: Option<[f64; NUM_EDGES]>,
        gradient: GradientMethod,
    },
}

//! Small dense networks with hand-written reverse mode, the simplex and
//! scaling heads that turn `<σz>` readouts into edge weights, and Adam.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::k4::{EdgeWeights, NUM_EDGES};

/// Floor on the normalizer of both simplex heads.
pub const HEAD_EPS: f64 = 1e-8;
pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Activation {
    Identity,
    LeakyRelu { slope: f64 },
    Sigmoid,
    Softmax,
}

impl Activation {
    fn apply(self, pre: &[f64]) -> Vec<f64> {
        match self {
            Activation::Identity => pre.to_vec(),
            Activation::LeakyRelu { slope } => pre
                .iter()
                .map(|&x| if x > 0.0 { x } else { slope * x })
                .collect(),
            Activation::Sigmoid => pre.iter().map(|&x| sigmoid(x)).collect(),
            Activation::Softmax => {
                let max = pre.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = pre.iter().map(|&x| (x - max).exp()).collect();
                let sum: f64 = exps.iter().sum();
                exps.into_iter().map(|e| e / sum).collect()
            }
        }
    }

    /// Gradient w.r.t. the pre-activation given the gradient w.r.t. the output.
    fn backward(self, pre: &[f64], out: &[f64], grad_out: &[f64]) -> Vec<f64> {
        match self {
            Activation::Identity => grad_out.to_vec(),
            Activation::LeakyRelu { slope } => pre
                .iter()
                .zip(grad_out)
                .map(|(&x, &g)| if x > 0.0 { g } else { slope * g })
                .collect(),
            Activation::Sigmoid => out
                .iter()
                .zip(grad_out)
                .map(|(&y, &g)| g * y * (1.0 - y))
                .collect(),
            Activation::Softmax => {
                let dot: f64 = out.iter().zip(grad_out).map(|(y, g)| y * g).sum();
                out.iter().zip(grad_out).map(|(&y, &g)| y * (g - dot)).collect()
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Layer widths and per-layer activations. Parameters are serialized layer
/// by layer as the row-major weight matrix (`out × in`) followed by the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub name: String,
    pub widths: Vec<usize>,
    pub activations: Vec<Activation>,
}

impl MlpSpec {
    pub fn new(name: impl Into<String>, widths: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        if widths.len() < 2 || activations.len() != widths.len() - 1 {
            return Err(Error::structural(format!(
                "{} widths need {} activations, got {}",
                widths.len(),
                widths.len().saturating_sub(1),
                activations.len()
            )));
        }
        if widths.contains(&0) {
            return Err(Error::structural("zero-width layer"));
        }
        Ok(Self {
            name: name.into(),
            widths,
            activations,
        })
    }

    /// 6 → 6 leaky → 6 linear → softmax; 84 parameters.
    pub fn classical_generator() -> Self {
        Self::new(
            "generator",
            vec![NUM_EDGES, NUM_EDGES, NUM_EDGES],
            vec![Activation::LeakyRelu { slope: LEAKY_SLOPE }, Activation::Softmax],
        )
        .expect("static spec")
    }

    /// `6 → hidden... → 1` with leaky hiddens and a sigmoid output.
    pub fn discriminator(hidden: &[usize]) -> Result<Self> {
        let mut widths = vec![NUM_EDGES];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let mut acts = vec![Activation::LeakyRelu { slope: LEAKY_SLOPE }; hidden.len()];
        acts.push(Activation::Sigmoid);
        Self::new("discriminator", widths, acts)
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("validated")
    }

    pub fn num_layers(&self) -> usize {
        self.activations.len()
    }

    pub fn num_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn layer_offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut offset = 0;
        self.widths.windows(2).map(move |w| {
            let start = offset;
            offset += w[0] * w[1] + w[1];
            (start, w[0], w[1])
        })
    }
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    generation: u64,
    /// Input to each layer (`activations[0]` is the network input).
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: MlpSpec,
    params: Vec<f64>,
    generation: u64,
}

impl Mlp {
    pub fn new(spec: MlpSpec, params: Vec<f64>) -> Result<Self> {
        if params.len() != spec.num_params() {
            return Err(Error::structural(format!(
                "{} expects {} parameters, got {}",
                spec.name,
                spec.num_params(),
                params.len()
            )));
        }
        Ok(Self {
            spec,
            params,
            generation: 0,
        })
    }

    pub fn zeros(spec: MlpSpec) -> Self {
        let n = spec.num_params();
        Self::new(spec, vec![0.0; n]).expect("sized to spec")
    }

    /// Uniform `±1/√fan_in` for weights and biases.
    pub fn init<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R) -> Self {
        let mut params = Vec::with_capacity(spec.num_params());
        for (_, fan_in, fan_out) in spec.layer_offsets() {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out + fan_out {
                params.push(rng.random_range(-bound..bound));
            }
        }
        Self::new(spec, params).expect("sized to spec")
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable parameters. Invalidates outstanding forward caches.
    pub fn params_mut(&mut self) -> &mut [f64] {
        self.generation += 1;
        &mut self.params
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, MlpCache)> {
        if input.len() != self.spec.input_dim() {
            return Err(Error::structural(format!(
                "{} expects input of length {}, got {}",
                self.spec.name,
                self.spec.input_dim(),
                input.len()
            )));
        }
        let mut inputs = Vec::with_capacity(self.spec.num_layers());
        let mut pres = Vec::with_capacity(self.spec.num_layers());
        let mut x = input.to_vec();
        for ((start, fan_in, fan_out), act) in
            self.spec.layer_offsets().zip(self.spec.activations.iter())
        {
            let weights = &self.params[start..start + fan_in * fan_out];
            let bias = &self.params[start + fan_in * fan_out..start + fan_in * fan_out + fan_out];
            let pre: Vec<f64> = (0..fan_out)
                .map(|o| {
                    let row = &weights[o * fan_in..(o + 1) * fan_in];
                    bias[o] + dot(row, &x)
                })
                .collect();
            let out = act.apply(&pre);
            inputs.push(std::mem::replace(&mut x, out));
            pres.push(pre);
        }
        let cache = MlpCache {
            generation: self.generation,
            inputs,
            pre: pres,
            output: x.clone(),
        };
        Ok((x, cache))
    }

    /// Returns `(parameter gradient, input gradient)`.
    pub fn backward(&self, cache: &MlpCache, grad_out: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut grad_params = vec![0.0; self.params.len()];
        let grad_in = self.backward_into(cache, grad_out, Some(&mut grad_params))?;
        Ok((grad_params, grad_in))
    }

    /// Input gradient only, adding the parameter gradient into `acc` when
    /// given.
    pub fn backward_into(
        &self,
        cache: &MlpCache,
        grad_out: &[f64],
        mut acc: Option<&mut [f64]>,
    ) -> Result<Vec<f64>> {
        if cache.generation != self.generation || cache.inputs.len() != self.spec.num_layers() {
            return Err(Error::structural(format!(
                "stale forward cache for {}",
                self.spec.name
            )));
        }
        if grad_out.len() != self.spec.output_dim() {
            return Err(Error::structural(format!(
                "output gradient has length {}, expected {}",
                grad_out.len(),
                self.spec.output_dim()
            )));
        }
        if let Some(acc) = &acc {
            if acc.len() != self.params.len() {
                return Err(Error::structural(format!(
                    "gradient buffer has length {}, expected {}",
                    acc.len(),
                    self.params.len()
                )));
            }
        }
        let layers: Vec<_> = self.spec.layer_offsets().collect();
        let mut g = grad_out.to_vec();
        for (l, &(start, fan_in, fan_out)) in layers.iter().enumerate().rev() {
            let out = if l + 1 < layers.len() {
                &cache.inputs[l + 1]
            } else {
                &cache.output
            };
            let delta = self.spec.activations[l].backward(&cache.pre[l], out, &g);
            let x = &cache.inputs[l][..fan_in];
            let n_w = fan_in * fan_out;
            let weights = &self.params[start..start + n_w];
            if let Some(acc) = acc.as_deref_mut() {
                let (gw, gb) = acc[start..start + n_w + fan_out].split_at_mut(n_w);
                for ((row, &d), b) in gw.chunks_exact_mut(fan_in).zip(&delta).zip(gb) {
                    for (r, &xi) in row.iter_mut().zip(x) {
                        *r += d * xi;
                    }
                    *b += d;
                }
            }
            let mut grad_in = vec![0.0; fan_in];
            for (row, &d) in weights.chunks_exact(fan_in).zip(&delta) {
                for (gi, &w) in grad_in.iter_mut().zip(row) {
                    *gi += d * w;
                }
            }
            g = grad_in;
        }
        Ok(g)
    }
}

/// Dot product with four independent partial sums.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Divides by the sum, floored at [`HEAD_EPS`] so the all-`-1` readout maps
/// to zeros instead of NaN. Returns the weights and the divisor used.
fn project(s: &[f64; NUM_EDGES]) -> (EdgeWeights, f64, bool) {
    let sum: f64 = s.iter().sum();
    let floored = sum < HEAD_EPS;
    let denom = if floored { HEAD_EPS } else { sum };
    (std::array::from_fn(|i| s[i] / denom), denom, floored)
}

fn project_backward(s: &[f64; NUM_EDGES], grad_w: &[f64; NUM_EDGES]) -> [f64; NUM_EDGES] {
    let (_, denom, floored) = project(s);
    if floored {
        return std::array::from_fn(|j| grad_w[j] / denom);
    }
    let dot: f64 = grad_w.iter().zip(s).map(|(g, x)| g * x).sum();
    std::array::from_fn(|j| grad_w[j] / denom - dot / (denom * denom))
}

fn shift(v: &[f64; NUM_EDGES]) -> [f64; NUM_EDGES] {
    std::array::from_fn(|i| (1.0 + v[i]) / 2.0)
}

/// `w = v' / Σ v'` with `v' = (1 + v) / 2`.
pub fn simplex_head(v: &[f64; NUM_EDGES]) -> EdgeWeights {
    project(&shift(v)).0
}

pub fn simplex_head_backward(v: &[f64; NUM_EDGES], grad_w: &[f64; NUM_EDGES]) -> [f64; NUM_EDGES] {
    let g = project_backward(&shift(v), grad_w);
    std::array::from_fn(|j| 0.5 * g[j])
}

/// Learnable positive per-edge scales `α = softplus(a)` applied to the
/// shifted readout before the simplex projection. Only relative scale
/// matters: `α` and `c·α` give the same weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingHead {
    pub pre_scale: [f64; NUM_EDGES],
}

impl Default for ScalingHead {
    /// Neutral start, `α_i = 1`.
    fn default() -> Self {
        Self {
            pre_scale: [(std::f64::consts::E - 1.0).ln(); NUM_EDGES],
        }
    }
}

impl ScalingHead {
    pub fn from_alphas(alpha: &[f64; NUM_EDGES]) -> Result<Self> {
        if alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::input("scales must be positive and finite"));
        }
        // Inverse softplus: a = ln(e^α - 1).
        Ok(Self {
            pre_scale: std::array::from_fn(|i| alpha[i].exp_m1().ln()),
        })
    }

    pub fn alphas(&self) -> [f64; NUM_EDGES] {
        std::array::from_fn(|i| softplus(self.pre_scale[i]))
    }

    fn scaled(&self, v: &[f64; NUM_EDGES]) -> [f64; NUM_EDGES] {
        let alpha = self.alphas();
        let shifted = shift(v);
        std::array::from_fn(|i| alpha[i] * shifted[i])
    }

    pub fn forward(&self, v: &[f64; NUM_EDGES]) -> EdgeWeights {
        project(&self.scaled(v)).0
    }

    /// Returns `(gradient w.r.t. v, gradient w.r.t. pre_scale)`.
    pub fn backward(
        &self,
        v: &[f64; NUM_EDGES],
        grad_w: &[f64; NUM_EDGES],
    ) -> ([f64; NUM_EDGES], [f64; NUM_EDGES]) {
        let alpha = self.alphas();
        let shifted = shift(v);
        let grad_s = project_backward(&self.scaled(v), grad_w);
        let grad_v = std::array::from_fn(|j| 0.5 * grad_s[j] * alpha[j]);
        let grad_pre =
            std::array::from_fn(|k| grad_s[k] * shifted[k] * sigmoid(self.pre_scale[k]));
        (grad_v, grad_pre)
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl Adam {
    pub const BETA1: f64 = 0.5;
    pub const BETA2: f64 = 0.999;
    pub const EPS: f64 = 1e-8;

    pub fn new(num_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: Self::BETA1,
            beta2: Self::BETA2,
            eps: Self::EPS,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::structural(format!(
                "optimizer tracks {} parameters, got {} params and {} gradients",
                self.m.len(),
                params.len(),
                grad.len()
            )));
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::Training(format!(
                "non-finite gradient {} at index {i}",
                grad[i]
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

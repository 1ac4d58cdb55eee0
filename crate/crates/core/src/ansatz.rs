//! Circuit topologies for the quantum generator.
//!
//! Every template starts with an `RY(z_i)` encoding of the latent vector on
//! wire `i`, followed by `L` layers of `RX·RY·RZ` on each wire and the
//! variant's entangling pattern. CNOT variants use five layers, CRY variants
//! three, so all of them carry 90 trainable angles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::k4::{EdgeWeights, NUM_EDGES, OPPOSITE_PAIRS, TRIANGLES};
use crate::statevector::{
    adjoint_vjp, param_shift_jacobian, run_circuit, AngleSource, CircuitTemplate, GateOp,
    Jacobian, NUM_QUBITS,
};

/// Trainable parameter count shared by every quantum variant.
pub const QUANTUM_PARAM_COUNT: usize = 90;

const ROTATIONS_PER_WIRE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyVariant {
    Ring,
    AllToAll,
    /// Same circuit as `TriangleNoncyclicCnot`.
    Triangle,
    Opposite,
    Combined,
    TriangleCyclicCnot,
    TriangleCyclicCrot,
    TriangleNoncyclicCnot,
    TriangleNoncyclicCrot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    Cnot,
    Cry,
}

impl TopologyVariant {
    pub const ALL: [TopologyVariant; 9] = [
        TopologyVariant::Ring,
        TopologyVariant::AllToAll,
        TopologyVariant::Triangle,
        TopologyVariant::Opposite,
        TopologyVariant::Combined,
        TopologyVariant::TriangleCyclicCnot,
        TopologyVariant::TriangleCyclicCrot,
        TopologyVariant::TriangleNoncyclicCnot,
        TopologyVariant::TriangleNoncyclicCrot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyVariant::Ring => "ring",
            TopologyVariant::AllToAll => "all_to_all",
            TopologyVariant::Triangle => "triangle",
            TopologyVariant::Opposite => "opposite",
            TopologyVariant::Combined => "combined",
            TopologyVariant::TriangleCyclicCnot => "triangle_cyclic_cnot",
            TopologyVariant::TriangleCyclicCrot => "triangle_cyclic_crot",
            TopologyVariant::TriangleNoncyclicCnot => "triangle_noncyclic_cnot",
            TopologyVariant::TriangleNoncyclicCrot => "triangle_noncyclic_crot",
        }
    }

    pub fn entangler(self) -> Entangler {
        match self {
            TopologyVariant::TriangleCyclicCrot | TopologyVariant::TriangleNoncyclicCrot => {
                Entangler::Cry
            }
            _ => Entangler::Cnot,
        }
    }

    pub fn layers(self) -> usize {
        match self.entangler() {
            Entangler::Cnot => 5,
            Entangler::Cry => 3,
        }
    }

    /// Ordered `(control, target)` wire pairs applied once per layer.
    pub fn entangler_pairs(self) -> Vec<(usize, usize)> {
        match self {
            TopologyVariant::Ring => (0..NUM_QUBITS).map(|i| (i, (i + 1) % NUM_QUBITS)).collect(),
            TopologyVariant::AllToAll => (0..NUM_QUBITS)
                .flat_map(|i| (i + 1..NUM_QUBITS).map(move |j| (i, j)))
                .collect(),
            TopologyVariant::Triangle
            | TopologyVariant::TriangleNoncyclicCnot
            | TopologyVariant::TriangleNoncyclicCrot => triangle_pairs(false),
            TopologyVariant::TriangleCyclicCnot | TopologyVariant::TriangleCyclicCrot => {
                triangle_pairs(true)
            }
            TopologyVariant::Opposite => OPPOSITE_PAIRS.to_vec(),
            TopologyVariant::Combined => {
                let mut pairs = triangle_pairs(false);
                pairs.extend_from_slice(&OPPOSITE_PAIRS);
                pairs
            }
        }
    }

    /// Variants whose opposite-edge couplings can be re-derived from data.
    pub fn uses_opposite_pairs(self) -> bool {
        matches!(self, TopologyVariant::Opposite | TopologyVariant::Combined)
    }
}

impl fmt::Display for TopologyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|v| v.name()).collect();
                Error::input(format!("unknown topology '{s}', expected one of {}", names.join(", ")))
            })
    }
}

fn triangle_pairs(cyclic: bool) -> Vec<(usize, usize)> {
    TRIANGLES
        .iter()
        .flat_map(|&[a, b, c]| {
            if cyclic {
                [(a, b), (b, c), (c, a)]
            } else {
                [(a, b), (a, c), (b, c)]
            }
        })
        .collect()
}

/// The three vertex-disjoint wire pairs with the most negative summed
/// Pearson correlation over `samples`. Ties resolve to the first matching in
/// enumeration order. Each pair is returned as `(lower, higher)`.
pub fn anticorrelated_matching(samples: &[EdgeWeights]) -> Result<[(usize, usize); 3]> {
    if samples.len() < 2 {
        return Err(Error::input("need at least two samples to estimate correlations"));
    }
    let n = samples.len() as f64;
    let mean: [f64; NUM_EDGES] =
        std::array::from_fn(|i| samples.iter().map(|s| s[i]).sum::<f64>() / n);
    let mut cov = [[0.0; NUM_EDGES]; NUM_EDGES];
    for s in samples {
        for i in 0..NUM_EDGES {
            for j in 0..NUM_EDGES {
                cov[i][j] += (s[i] - mean[i]) * (s[j] - mean[j]);
            }
        }
    }
    let corr = |i: usize, j: usize| {
        let d = (cov[i][i] * cov[j][j]).sqrt();
        if d > 0.0 {
            cov[i][j] / d
        } else {
            0.0
        }
    };

    let mut best: Option<([(usize, usize); 3], f64)> = None;
    for m in perfect_matchings() {
        let score: f64 = m.iter().map(|&(i, j)| corr(i, j)).sum();
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((m, score));
        }
    }
    Ok(best.expect("six wires have perfect matchings").0)
}

/// The 15 perfect matchings of six wires.
fn perfect_matchings() -> Vec<[(usize, usize); 3]> {
    let mut out = Vec::with_capacity(15);
    for b in 1..6 {
        let rest: Vec<usize> = (1..6).filter(|&x| x != b).collect();
        for k in 1..4 {
            let c = rest[0];
            let d = rest[k];
            let others: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != d).collect();
            out.push([(0, b), (c, d), (others[0], others[1])]);
        }
    }
    out
}

/// A fully wired quantum generator circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    variant: TopologyVariant,
    pairs: Vec<(usize, usize)>,
    template: CircuitTemplate,
}

impl Ansatz {
    pub fn new(variant: TopologyVariant) -> Result<Self> {
        Self::with_pairs(variant, variant.entangler_pairs())
    }

    /// Opposite/Combined circuit whose opposite-edge couplings come from the
    /// training data instead of the geometric pairs.
    pub fn data_driven(variant: TopologyVariant, samples: &[EdgeWeights]) -> Result<Self> {
        if !variant.uses_opposite_pairs() {
            return Err(Error::input(format!(
                "{variant} has no opposite-edge couplings to derive from data"
            )));
        }
        let matching = anticorrelated_matching(samples)?;
        let mut pairs = variant.entangler_pairs();
        let start = pairs.len() - OPPOSITE_PAIRS.len();
        pairs.truncate(start);
        pairs.extend_from_slice(&matching);
        Self::with_pairs(variant, pairs)
    }

    /// Circuit with explicit entangler pairs, e.g. restored from a checkpoint.
    pub fn with_pairs(variant: TopologyVariant, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let entangler = variant.entangler();
        let mut gates = Vec::new();
        for wire in 0..NUM_QUBITS {
            gates.push(GateOp::ry(wire, AngleSource::Latent(wire))?);
        }
        let mut next = 0;
        let mut fresh = || {
            next += 1;
            AngleSource::Param(next - 1)
        };
        for _ in 0..variant.layers() {
            for wire in 0..NUM_QUBITS {
                gates.push(GateOp::rx(wire, fresh())?);
                gates.push(GateOp::ry(wire, fresh())?);
                gates.push(GateOp::rz(wire, fresh())?);
            }
            for &(control, target) in &pairs {
                gates.push(match entangler {
                    Entangler::Cnot => GateOp::cnot(control, target)?,
                    Entangler::Cry => GateOp::cry(control, target, fresh())?,
                });
            }
        }
        let expected = variant.layers()
            * (NUM_QUBITS * ROTATIONS_PER_WIRE
                + if entangler == Entangler::Cry { pairs.len() } else { 0 });
        let template = CircuitTemplate::new(gates, expected)?;
        if template.num_params() != QUANTUM_PARAM_COUNT {
            return Err(Error::structural(format!(
                "{variant} declares {} parameters, expected {QUANTUM_PARAM_COUNT}",
                template.num_params()
            )));
        }
        Ok(Self {
            variant,
            pairs,
            template,
        })
    }

    pub fn variant(&self) -> TopologyVariant {
        self.variant
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn template(&self) -> &CircuitTemplate {
        &self.template
    }

    pub fn num_params(&self) -> usize {
        self.template.num_params()
    }

    /// Whether parameter `p` is an entangling CRY angle rather than a rotation.
    pub fn is_entangler_param(&self, p: usize) -> bool {
        self.template.gates().iter().any(|g| {
            g.kind().is_two_qubit() && g.angle_source() == Some(AngleSource::Param(p))
        })
    }

    /// Initial angles: rotations and CRY angles both drawn from `N(0, std²)`.
    pub fn init_params<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        rotation_std: f64,
        entangler_std: f64,
    ) -> Vec<f64> {
        let rot = Normal::new(0.0, rotation_std).expect("finite std");
        let ent = Normal::new(0.0, entangler_std).expect("finite std");
        (0..self.num_params())
            .map(|p| {
                if self.is_entangler_param(p) {
                    ent.sample(rng)
                } else {
                    rot.sample(rng)
                }
            })
            .collect()
    }

    /// Raw `<σz>` outputs in `[-1, 1]^6`.
    pub fn forward(&self, latent: &[f64], params: &[f64]) -> Result<[f64; NUM_QUBITS]> {
        run_circuit(&self.template, latent, params)
    }

    pub fn jacobian(&self, latent: &[f64], params: &[f64]) -> Result<Jacobian> {
        param_shift_jacobian(&self.template, latent, params)
    }

    pub fn vjp(
        &self,
        latent: &[f64],
        params: &[f64],
        cotangent: &[f64; NUM_QUBITS],
    ) -> Result<([f64; NUM_QUBITS], Vec<f64>)> {
        adjoint_vjp(&self.template, latent, params, cotangent)
    }
}

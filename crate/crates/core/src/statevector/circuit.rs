//! Circuit templates and their derivatives.
//!
//! Two independent gradient routes are provided:
//! [`param_shift_jacobian`] builds the full `6 × P` Jacobian from shifted
//! circuit evaluations, and [`adjoint_vjp`] computes a vector-Jacobian
//! product in a single reverse sweep. Training uses the latter; the former is
//! the reference it is checked against.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use super::{AngleSource, GateKind, GateOp, StateVector, NUM_QUBITS};
use crate::error::{Error, Result};

/// An ordered gate list plus the length of the parameter vector it reads.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTemplate {
    gates: Vec<GateOp>,
    num_params: usize,
}

impl CircuitTemplate {
    pub fn new(gates: Vec<GateOp>, num_params: usize) -> Result<Self> {
        let mut used = vec![false; num_params];
        for g in &gates {
            match g.angle_source() {
                Some(AngleSource::Param(p)) if p >= num_params => {
                    return Err(Error::structural(format!(
                        "gate reads parameter {p} but template declares {num_params}"
                    )))
                }
                Some(AngleSource::Param(p)) => used[p] = true,
                Some(AngleSource::Latent(i)) if i >= NUM_QUBITS => {
                    return Err(Error::structural(format!("latent index {i} out of range")))
                }
                _ => {}
            }
        }
        if let Some(p) = used.iter().position(|u| !u) {
            return Err(Error::structural(format!("parameter {p} is never used")));
        }
        Ok(Self { gates, num_params })
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    fn check_inputs(&self, latent: &[f64], params: &[f64]) -> Result<()> {
        if latent.len() != NUM_QUBITS {
            return Err(Error::structural(format!(
                "latent has {} components, expected {NUM_QUBITS}",
                latent.len()
            )));
        }
        if params.len() != self.num_params {
            return Err(Error::structural(format!(
                "template declares {} parameters, got {}",
                self.num_params,
                params.len()
            )));
        }
        if let Some(x) = latent.iter().chain(params).find(|x| !x.is_finite()) {
            return Err(Error::input(format!("non-finite circuit input {x}")));
        }
        Ok(())
    }

    fn resolve(gate: &GateOp, latent: &[f64], params: &[f64]) -> f64 {
        match gate.angle_source() {
            None => 0.0,
            Some(AngleSource::Param(p)) => params[p],
            Some(AngleSource::Latent(i)) => latent[i],
            Some(AngleSource::Constant(v)) => v,
        }
    }

    /// Final state after all gates, with an optional per-gate override.
    fn evolve(
        &self,
        latent: &[f64],
        params: &[f64],
        patch: Option<(usize, Patch)>,
    ) -> StateVector {
        let mut state = StateVector::zero();
        for (k, gate) in self.gates.iter().enumerate() {
            let angle = Self::resolve(gate, latent, params);
            match patch {
                Some((at, p)) if at == k => p.apply(&mut state, gate, angle),
                _ => state.apply_unchecked(gate, angle),
            }
        }
        state
    }
}

/// Replacement for one gate during a shifted evaluation.
#[derive(Debug, Clone, Copy)]
enum Patch {
    /// Rotation angle offset.
    Shift(f64),
    /// CRY(θ) expanded as RY(θ/2 + first) · CNOT · RY(−θ/2 + second) · CNOT
    /// on the target, in circuit order.
    CryExpanded { first: f64, second: f64 },
}

impl Patch {
    fn apply(self, state: &mut StateVector, gate: &GateOp, angle: f64) {
        match self {
            Patch::Shift(s) => state.apply_unchecked(gate, angle + s),
            Patch::CryExpanded { first, second } => {
                let control = gate.control().expect("CRY has a control");
                let target = gate.target();
                let cnot = GateOp::cnot(control, target).expect("validated wires");
                let ry = GateOp::ry(target, AngleSource::Constant(0.0)).expect("validated wire");
                state.apply_unchecked(&ry, angle / 2.0 + first);
                state.apply_unchecked(&cnot, 0.0);
                state.apply_unchecked(&ry, -angle / 2.0 + second);
                state.apply_unchecked(&cnot, 0.0);
            }
        }
    }
}

/// Runs the template and reads out `<σz_i>` for every wire.
pub fn run_circuit(
    template: &CircuitTemplate,
    latent: &[f64],
    params: &[f64],
) -> Result<[f64; NUM_QUBITS]> {
    template.check_inputs(latent, params)?;
    Ok(template.evolve(latent, params, None).expectation_z_all())
}

/// `6 × P` Jacobian stored column-major: `columns[p][i] = d<σz_i>/dθ_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub columns: Vec<[f64; NUM_QUBITS]>,
}

impl Jacobian {
    pub fn get(&self, output: usize, param: usize) -> f64 {
        self.columns[param][output]
    }

    pub fn num_params(&self) -> usize {
        self.columns.len()
    }

    /// `Σ_i cotangent_i · J[i][p]` for each parameter.
    pub fn vjp(&self, cotangent: &[f64; NUM_QUBITS]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().zip(cotangent).map(|(j, g)| j * g).sum())
            .collect()
    }
}

fn sub_half(plus: [f64; NUM_QUBITS], minus: [f64; NUM_QUBITS]) -> [f64; NUM_QUBITS] {
    let mut out = [0.0; NUM_QUBITS];
    for i in 0..NUM_QUBITS {
        out[i] = (plus[i] - minus[i]) / 2.0;
    }
    out
}

/// Exact Jacobian by the two-term parameter-shift rule.
///
/// Single-qubit rotations take two evaluations at `θ ± π/2`. A CRY gate is
/// expanded into two RY rotations with angles `±θ/2` around a CNOT pair, and
/// each rotation is shifted separately, so its column costs four evaluations.
pub fn param_shift_jacobian(
    template: &CircuitTemplate,
    latent: &[f64],
    params: &[f64],
) -> Result<Jacobian> {
    template.check_inputs(latent, params)?;
    let eval = |k: usize, patch: Patch| {
        template
            .evolve(latent, params, Some((k, patch)))
            .expectation_z_all()
    };

    let contributions: Vec<(usize, [f64; NUM_QUBITS])> = template
        .gates
        .par_iter()
        .enumerate()
        .filter_map(|(k, gate)| match gate.angle_source() {
            Some(AngleSource::Param(p)) => Some((k, p, gate.kind())),
            _ => None,
        })
        .map(|(k, p, kind)| {
            let col = if kind == GateKind::Cry {
                let d_first = sub_half(
                    eval(k, Patch::CryExpanded { first: FRAC_PI_2, second: 0.0 }),
                    eval(k, Patch::CryExpanded { first: -FRAC_PI_2, second: 0.0 }),
                );
                let d_second = sub_half(
                    eval(k, Patch::CryExpanded { first: 0.0, second: FRAC_PI_2 }),
                    eval(k, Patch::CryExpanded { first: 0.0, second: -FRAC_PI_2 }),
                );
                let mut col = [0.0; NUM_QUBITS];
                for i in 0..NUM_QUBITS {
                    col[i] = 0.5 * d_first[i] - 0.5 * d_second[i];
                }
                col
            } else {
                sub_half(eval(k, Patch::Shift(FRAC_PI_2)), eval(k, Patch::Shift(-FRAC_PI_2)))
            };
            (p, col)
        })
        .collect();

    // Gate order is preserved by the indexed collect, so accumulation is
    // deterministic even when a parameter feeds several gates.
    let mut columns = vec![[0.0; NUM_QUBITS]; template.num_params];
    for (p, col) in contributions {
        for i in 0..NUM_QUBITS {
            columns[p][i] += col[i];
        }
    }
    Ok(Jacobian { columns })
}

/// Forward outputs and `cotangentᵀ · J` in one reverse sweep.
///
/// The observable `Σ_i cotangent_i σz_i` is applied to the final state and
/// pulled back through the inverse gates alongside the state itself.
pub fn adjoint_vjp(
    template: &CircuitTemplate,
    latent: &[f64],
    params: &[f64],
    cotangent: &[f64; NUM_QUBITS],
) -> Result<([f64; NUM_QUBITS], Vec<f64>)> {
    template.check_inputs(latent, params)?;
    let mut psi = template.evolve(latent, params, None);
    let outputs = psi.expectation_z_all();

    let mut lambda = psi.clone();
    lambda.apply_weighted_z(cotangent);

    let mut grad = vec![0.0; template.num_params];
    for gate in template.gates.iter().rev() {
        let angle = CircuitTemplate::resolve(gate, latent, params);
        psi.apply_unchecked(gate, -angle);
        if let Some(AngleSource::Param(p)) = gate.angle_source() {
            let mut mu = psi.clone();
            mu.apply_derivative(gate, angle);
            grad[p] += 2.0 * lambda.inner(&mu).re;
        }
        lambda.apply_unchecked(gate, -angle);
    }
    Ok((outputs, grad))
}

//! Dense statevector simulation of the six-qubit generator register.
//!
//! Qubit 0 is the most significant bit of the basis index, so basis state
//! `|q0 q1 ... q5>` has index `q0·32 + q1·16 + ... + q5`. Rotation matrices
//! follow the usual convention `R_P(θ) = exp(-iθP/2)`.

mod circuit;

pub use circuit::{
    adjoint_vjp, param_shift_jacobian, run_circuit, CircuitTemplate, Jacobian,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Register width. One qubit per edge of K4.
pub const NUM_QUBITS: usize = 6;
/// Number of amplitudes, `2^NUM_QUBITS`.
pub const DIM: usize = 1 << NUM_QUBITS;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
    Cry,
}

impl GateKind {
    pub fn is_parametrized(self) -> bool {
        !matches!(self, GateKind::Cnot)
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::Cnot | GateKind::Cry)
    }
}

/// Where a gate's rotation angle comes from when a circuit is run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSource {
    /// Index into the trainable parameter vector.
    Param(usize),
    /// Index into the latent input vector.
    Latent(usize),
    Constant(f64),
}

/// A single gate with validated wiring.
///
/// For two-qubit gates `wires[0]` is the control and `wires[1]` the target.
/// For single-qubit gates only `wires[0]` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOp {
    kind: GateKind,
    wires: [usize; 2],
    angle: Option<AngleSource>,
}

impl GateOp {
    pub fn new(kind: GateKind, wires: &[usize], angle: Option<AngleSource>) -> Result<Self> {
        let arity = if kind.is_two_qubit() { 2 } else { 1 };
        if wires.len() != arity {
            return Err(Error::structural(format!(
                "{kind:?} expects {arity} wire(s), got {}",
                wires.len()
            )));
        }
        if let Some(&w) = wires.iter().find(|&&w| w >= NUM_QUBITS) {
            return Err(Error::structural(format!(
                "wire {w} out of range 0..{NUM_QUBITS}"
            )));
        }
        if arity == 2 && wires[0] == wires[1] {
            return Err(Error::structural(format!(
                "{kind:?} control and target coincide on wire {}",
                wires[0]
            )));
        }
        match (kind.is_parametrized(), angle) {
            (true, None) => {
                return Err(Error::structural(format!("{kind:?} needs an angle source")))
            }
            (false, Some(_)) => {
                return Err(Error::structural("CNOT carries no angle".to_string()))
            }
            _ => {}
        }
        let second = if arity == 2 { wires[1] } else { wires[0] };
        Ok(Self {
            kind,
            wires: [wires[0], second],
            angle,
        })
    }

    pub fn rx(wire: usize, angle: AngleSource) -> Result<Self> {
        Self::new(GateKind::Rx, &[wire], Some(angle))
    }

    pub fn ry(wire: usize, angle: AngleSource) -> Result<Self> {
        Self::new(GateKind::Ry, &[wire], Some(angle))
    }

    pub fn rz(wire: usize, angle: AngleSource) -> Result<Self> {
        Self::new(GateKind::Rz, &[wire], Some(angle))
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::Cnot, &[control, target], None)
    }

    pub fn cry(control: usize, target: usize, angle: AngleSource) -> Result<Self> {
        Self::new(GateKind::Cry, &[control, target], Some(angle))
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn angle_source(&self) -> Option<AngleSource> {
        self.angle
    }

    /// Target wire (the only wire for single-qubit gates).
    pub fn target(&self) -> usize {
        if self.kind.is_two_qubit() {
            self.wires[1]
        } else {
            self.wires[0]
        }
    }

    pub fn control(&self) -> Option<usize> {
        self.kind.is_two_qubit().then_some(self.wires[0])
    }
}

#[inline]
fn bit_mask(wire: usize) -> usize {
    1 << (NUM_QUBITS - 1 - wire)
}

fn rotation_matrix(kind: GateKind, angle: f64) -> Matrix2 {
    let (s, c) = (angle / 2.0).sin_cos();
    match kind {
        GateKind::Rx => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        GateKind::Ry | GateKind::Cry => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        GateKind::Rz => [
            [Complex64::new(c, -s), ZERO],
            [ZERO, Complex64::new(c, s)],
        ],
        GateKind::Cnot => unreachable!("CNOT has no rotation matrix"),
    }
}

/// Elementwise derivative of `rotation_matrix` with respect to the angle.
fn rotation_derivative(kind: GateKind, angle: f64) -> Matrix2 {
    let (s, c) = (angle / 2.0).sin_cos();
    let h = 0.5;
    match kind {
        GateKind::Rx => [
            [Complex64::new(-h * s, 0.0), Complex64::new(0.0, -h * c)],
            [Complex64::new(0.0, -h * c), Complex64::new(-h * s, 0.0)],
        ],
        GateKind::Ry | GateKind::Cry => [
            [Complex64::new(-h * s, 0.0), Complex64::new(-h * c, 0.0)],
            [Complex64::new(h * c, 0.0), Complex64::new(-h * s, 0.0)],
        ],
        GateKind::Rz => [
            [Complex64::new(-h * s, -h * c), ZERO],
            [ZERO, Complex64::new(-h * s, h * c)],
        ],
        GateKind::Cnot => unreachable!("CNOT has no derivative"),
    }
}

/// The 64 complex amplitudes of the register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: [Complex64; DIM],
}

impl Default for StateVector {
    fn default() -> Self {
        Self::zero()
    }
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero() -> Self {
        let mut amps = [ZERO; DIM];
        amps[0] = ONE;
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies `gate` with the resolved rotation `angle` (ignored for CNOT).
    pub fn apply(&mut self, gate: &GateOp, angle: f64) -> Result<()> {
        if gate.kind.is_parametrized() && !angle.is_finite() {
            return Err(Error::input(format!(
                "non-finite angle {angle} for {:?}",
                gate.kind
            )));
        }
        self.apply_unchecked(gate, angle);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &GateOp, angle: f64) {
        let target = bit_mask(gate.target());
        match gate.kind {
            GateKind::Cnot => {
                let control = bit_mask(gate.wires[0]);
                for i in 0..DIM {
                    if i & control != 0 && i & target == 0 {
                        self.amps.swap(i, i | target);
                    }
                }
            }
            GateKind::Cry => {
                let control = bit_mask(gate.wires[0]);
                self.apply_matrix(target, control, &rotation_matrix(gate.kind, angle));
            }
            kind => self.apply_matrix(target, 0, &rotation_matrix(kind, angle)),
        }
    }

    /// Applies `dU/dθ` for a parametrized gate. The result is not normalized.
    /// For CRY the derivative vanishes on the control-0 subspace.
    pub(crate) fn apply_derivative(&mut self, gate: &GateOp, angle: f64) {
        let target = bit_mask(gate.target());
        let m = rotation_derivative(gate.kind, angle);
        match gate.kind {
            GateKind::Cnot => unreachable!("CNOT has no derivative"),
            GateKind::Cry => {
                let control = bit_mask(gate.wires[0]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & control == 0 {
                        *a = ZERO;
                    }
                }
                self.apply_matrix(target, control, &m);
            }
            _ => self.apply_matrix(target, 0, &m),
        }
    }

    /// Applies a 2x2 matrix on the `target` bit, restricted to basis states
    /// where every bit of `control` is set (`control == 0` means no control).
    fn apply_matrix(&mut self, target: usize, control: usize, m: &Matrix2) {
        for i in 0..DIM {
            if i & target != 0 || i & control != control {
                continue;
            }
            let j = i | target;
            let (a0, a1) = (self.amps[i], self.amps[j]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// `<σz_i>` for every qubit, in wire order.
    pub fn expectation_z_all(&self) -> [f64; NUM_QUBITS] {
        let mut out = [0.0; NUM_QUBITS];
        for (b, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, o) in out.iter_mut().enumerate() {
                if b & bit_mask(q) == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out
    }

    /// Multiplies each amplitude by the diagonal observable `Σ_i g_i σz_i`.
    pub(crate) fn apply_weighted_z(&mut self, weights: &[f64; NUM_QUBITS]) {
        for (b, a) in self.amps.iter_mut().enumerate() {
            let diag: f64 = weights
                .iter()
                .enumerate()
                .map(|(q, g)| if b & bit_mask(q) == 0 { *g } else { -*g })
                .sum();
            *a *= diag;
        }
    }
}

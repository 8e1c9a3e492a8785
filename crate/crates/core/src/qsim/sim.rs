//! Circuit interpretation and total measurement.
//!
//! Wire 0 is the top wire and the most significant bit of a basis index.
//! `C0 || C1` puts `C0` on the high wires, and `C0 ; C1` applies `C0` first.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use super::matrix::Matrix;
use super::registry::GateRegistry;
use crate::circuit::{CircuitKind, CircuitValue};

pub const DEFAULT_MAX_WIRES: u64 = 16;
/// Circuits up to this many wires are evaluated through their full matrix.
pub const DENSE_WIRE_LIMIT: u64 = 10;
/// `hilb` refuses to materialize matrices beyond this many wires.
pub const MATRIX_WIRE_LIMIT: u64 = 12;
/// Outcomes whose probability does not exceed this are dropped.
pub const ZERO_PROBABILITY: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("gate `{0}` is not registered")]
    UnknownGate(String),
    #[error("circuit on {wires} wires exceeds the limit of {limit}")]
    WireBudget { wires: u64, limit: u64 },
    #[error("circuit has {found} wires but arity class {k} needs {}", k + 1)]
    WireMismatch { k: u64, found: u64 },
    #[error("initial state {x} does not fit in {wires} wires")]
    StateTooLarge { x: u64, wires: u64 },
    #[error("gate `{name}` is registered on {registered} wires but used on {used}")]
    GateArity { name: String, registered: u64, used: u64 },
}

/// The outcome distribution of a total measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureDistribution {
    wires: u64,
    probs: BTreeMap<u64, f64>,
}

impl MeasureDistribution {
    /// Born-rule probabilities, rescaled to sum to 1 so that rounding in the
    /// amplitudes does not leak into outcome masses.
    pub fn from_amplitudes(wires: u64, amps: &[Complex64]) -> Self {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let probs = amps
            .iter()
            .enumerate()
            .map(|(i, a)| (i as u64, a.norm_sqr() / norm))
            .filter(|&(_, p)| p > ZERO_PROBABILITY)
            .collect();
        MeasureDistribution { wires, probs }
    }

    /// A distribution given directly by its outcome probabilities.
    pub fn from_probabilities(wires: u64, probs: impl IntoIterator<Item = (u64, f64)>) -> Self {
        MeasureDistribution {
            wires,
            probs: probs.into_iter().filter(|&(_, p)| p > 0.0).collect(),
        }
    }

    pub fn wires(&self) -> u64 {
        self.wires
    }

    pub fn get(&self, outcome: u64) -> f64 {
        self.probs.get(&outcome).copied().unwrap_or(0.0)
    }

    /// Outcomes in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&i, &p)| (i, p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }
}

fn check_gates(c: &CircuitValue, reg: &GateRegistry) -> Result<(), SimError> {
    match c.kind() {
        CircuitKind::Gate(g) => {
            let def = reg.get(g).ok_or_else(|| SimError::UnknownGate(g.clone()))?;
            if def.wires() != c.wires() {
                return Err(SimError::GateArity {
                    name: g.clone(),
                    registered: def.wires(),
                    used: c.wires(),
                });
            }
            Ok(())
        }
        CircuitKind::Seq(a, b) | CircuitKind::Par(a, b) => {
            check_gates(a, reg)?;
            check_gates(b, reg)
        }
    }
}

fn check_budget(wires: u64, limit: u64) -> Result<(), SimError> {
    if wires > limit {
        return Err(SimError::WireBudget { wires, limit });
    }
    Ok(())
}

/// The unitary denoted by a circuit.
pub fn hilb(c: &CircuitValue, reg: &GateRegistry, max_wires: u64) -> Result<Matrix, SimError> {
    check_budget(c.wires(), max_wires.min(MATRIX_WIRE_LIMIT))?;
    check_gates(c, reg)?;
    Ok(dense(c, reg))
}

fn dense(c: &CircuitValue, reg: &GateRegistry) -> Matrix {
    match c.kind() {
        CircuitKind::Gate(g) => reg.get(g).expect("gates checked").matrix.clone(),
        CircuitKind::Seq(a, b) => dense(b, reg).mul(&dense(a, reg)),
        CircuitKind::Par(a, b) => dense(a, reg).kron(&dense(b, reg)),
    }
}

/// Applies `c` to a full state vector, gate by gate.
pub fn apply_circuit(
    c: &CircuitValue,
    reg: &GateRegistry,
    state: &mut [Complex64],
    max_wires: u64,
) -> Result<(), SimError> {
    check_budget(c.wires(), max_wires)?;
    check_gates(c, reg)?;
    assert_eq!(state.len() as u64, 1u64 << c.wires(), "state size");
    apply_at(c, reg, state, c.wires(), 0);
    Ok(())
}

fn apply_at(c: &CircuitValue, reg: &GateRegistry, state: &mut [Complex64], total: u64, top: u64) {
    match c.kind() {
        CircuitKind::Gate(g) => {
            let m = &reg.get(g).expect("gates checked").matrix;
            apply_gate(m, state, total, top, c.wires());
        }
        CircuitKind::Seq(a, b) => {
            apply_at(a, reg, state, total, top);
            apply_at(b, reg, state, total, top);
        }
        CircuitKind::Par(a, b) => {
            apply_at(a, reg, state, total, top);
            apply_at(b, reg, state, total, top + a.wires());
        }
    }
}

/// Applies a gate on wires `top .. top + width`.
fn apply_gate(m: &Matrix, state: &mut [Complex64], total: u64, top: u64, width: u64) {
    let shift = total - top - width;
    let block = 1usize << width;
    let low_count = 1usize << shift;
    let high_count = 1usize << top;
    let mut buf = vec![Complex64::new(0.0, 0.0); block];
    for high in 0..high_count {
        for low in 0..low_count {
            let base = (high << (width + shift)) | low;
            for (l, slot) in buf.iter_mut().enumerate() {
                *slot = state[base | (l << shift)];
            }
            let out = m.apply(&buf);
            for (l, v) in out.into_iter().enumerate() {
                state[base | (l << shift)] = v;
            }
        }
    }
}

/// Runs circuit `c` of arity class `k` on basis state `x` and measures every
/// wire. No state survives the call.
pub fn circuit_eval(
    k: u64,
    x: u64,
    c: &CircuitValue,
    reg: &GateRegistry,
    max_wires: u64,
) -> Result<MeasureDistribution, SimError> {
    let wires = c.wires();
    if wires != k + 1 {
        return Err(SimError::WireMismatch { k, found: wires });
    }
    check_budget(wires, max_wires)?;
    check_gates(c, reg)?;
    if wires < 64 && x >> wires != 0 {
        return Err(SimError::StateTooLarge { x, wires });
    }
    let amps = if wires <= DENSE_WIRE_LIMIT {
        dense(c, reg).column(x as usize)
    } else {
        let mut state = vec![Complex64::new(0.0, 0.0); 1usize << wires];
        state[x as usize] = Complex64::new(1.0, 0.0);
        apply_at(c, reg, &mut state, wires, 0);
        state
    };
    Ok(MeasureDistribution::from_amplitudes(wires, &amps))
}

/// Draws one outcome, returning it with its probability.
pub fn sample_measure<R: Rng + ?Sized>(d: &MeasureDistribution, rng: &mut R) -> (u64, f64) {
    assert!(!d.is_empty(), "empty measurement distribution");
    let r = rng.gen::<f64>() * d.total();
    let mut acc = 0.0;
    let mut last = (0, 0.0);
    for (i, p) in d.iter() {
        acc += p;
        last = (i, p);
        if r < acc {
            return (i, p);
        }
    }
    last
}

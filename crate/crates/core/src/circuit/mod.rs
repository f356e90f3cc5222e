//! Gate-level circuits, their structural statistics and the line-oriented
//! circuit text format.

mod gate;
mod text;

pub use gate::{CMatrix, Gate, GateKind};
pub use text::parse_circuit;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("qubit {qubit} out of range for a {width}-qubit circuit")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("classical bit {clbit} out of range for {width} classical bit(s)")]
    ClbitOutOfRange { clbit: usize, width: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Ordered gate list over `num_qubits` qubits and `num_clbits` classical bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
    label: String,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit { num_qubits, num_clbits, gates: Vec::new(), label: String::new() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking its operands against the circuit width.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        if let Some(&q) = gate.qubits().iter().find(|&&q| q >= self.num_qubits) {
            return Err(CircuitError::QubitOutOfRange { qubit: q, width: self.num_qubits });
        }
        if let Some(c) = gate.clbit() {
            if c >= self.num_clbits {
                return Err(CircuitError::ClbitOutOfRange { clbit: c, width: self.num_clbits });
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends gates that are valid by construction; panics otherwise.
    pub(crate) fn add(&mut self, gate: Gate) {
        self.push(gate).expect("builder produced an out-of-range gate");
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<(), CircuitError> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Appends every gate of `other`, which must not be wider than `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        self.extend(other.gates.iter().cloned())
    }

    /// Measures qubit `i` into classical bit `i` for every `i < num_clbits`.
    pub fn measure_first(&mut self, count: usize) -> Result<(), CircuitError> {
        for q in 0..count {
            self.push(Gate::measure(q, q))?;
        }
        Ok(())
    }

    /// Copy of the circuit without measurements.
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            gates: self.gates.iter().filter(|g| g.kind() != GateKind::Measure).cloned().collect(),
            ..self.clone()
        }
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| g.kind() == GateKind::Measure)
    }

    /// Sorted list of qubits touched by any gate.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_qubits];
        for g in &self.gates {
            for &q in g.qubits() {
                seen[q] = true;
            }
        }
        (0..self.num_qubits).filter(|&q| seen[q]).collect()
    }

    /// Relabels active qubits onto `0..k` in ascending order. Returns the
    /// compacted circuit and, for each new index, the original qubit.
    pub fn compact(&self) -> (Circuit, Vec<usize>) {
        let active = self.active_qubits();
        let mut index = vec![usize::MAX; self.num_qubits];
        for (new, &old) in active.iter().enumerate() {
            index[old] = new;
        }
        let gates = self.gates.iter().map(|g| g.remapped(|q| index[q])).collect();
        let compacted = Circuit {
            num_qubits: active.len(),
            num_clbits: self.num_clbits,
            gates,
            label: self.label.clone(),
        };
        (compacted, active)
    }

    /// Renders the circuit in the text grammar accepted by [`parse_circuit`].
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\nclbits {}\n", self.num_qubits, self.num_clbits);
        for g in &self.gates {
            if g.kind() == GateKind::Unitary {
                out.push_str(&format!("# opaque unitary on {:?} omitted\n", g.qubits()));
                continue;
            }
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

/// Structural statistics of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub gate_count: usize,
    pub workspace: usize,
    pub depth: usize,
}

/// Gate count (measurements included), number of qubits touched, and depth.
///
/// Depth is the longest dependency chain: each gate sits one layer above the
/// deepest of its operands. Measurements count as ordinary nodes.
pub fn circuit_stats(c: &Circuit) -> CircuitStats {
    let mut frontier = vec![0usize; c.num_qubits()];
    let mut depth = 0;
    for g in c.gates() {
        let layer = 1 + g.qubits().iter().map(|&q| frontier[q]).max().unwrap_or(0);
        for &q in g.qubits() {
            frontier[q] = layer;
        }
        depth = depth.max(layer);
    }
    CircuitStats { gate_count: c.len(), workspace: c.active_qubits().len(), depth }
}

use num_complex::Complex64;

use super::kernel::{apply_gate, marginalize};
use super::SimError;
use crate::circuit::{CMatrix, Circuit, GateKind};
use crate::distribution::OutcomeDistribution;

/// Default width cap for statevector simulation.
pub const DEFAULT_STATEVECTOR_CAP: usize = 20;

/// Width cap for [`circuit_unitary`].
pub const UNITARY_CAP: usize = 10;

/// Pure state over `num_qubits` qubits; amplitude index bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes, num_qubits }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }
}

fn check_unitary_only(c: &Circuit) -> Result<(), SimError> {
    match c.gates().iter().find(|g| !g.kind().is_unitary()) {
        Some(g) => Err(SimError::UnsupportedGate(format!(
            "{} in a statevector run (use measure_distribution for measurements)",
            g.kind()
        ))),
        None => Ok(()),
    }
}

/// Applies every gate of `c` to `|0…0⟩` with the default width cap.
pub fn run_ideal(c: &Circuit) -> Result<StateVector, SimError> {
    run_ideal_capped(c, DEFAULT_STATEVECTOR_CAP)
}

pub fn run_ideal_capped(c: &Circuit, cap: usize) -> Result<StateVector, SimError> {
    if c.num_qubits() > cap {
        return Err(SimError::WidthCap { width: c.num_qubits(), cap });
    }
    check_unitary_only(c)?;
    let mut sv = StateVector::zero(c.num_qubits());
    for g in c.gates() {
        apply_gate(sv.amplitudes_mut(), g);
    }
    Ok(sv)
}

/// Dense unitary of a measurement-free circuit; column `j` is the image of
/// basis state `j`.
pub fn circuit_unitary(c: &Circuit) -> Result<CMatrix, SimError> {
    let n = c.num_qubits();
    if n > UNITARY_CAP {
        return Err(SimError::WidthCap { width: n, cap: UNITARY_CAP });
    }
    check_unitary_only(c)?;
    let dim = 1usize << n;
    let mut u = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[col] = Complex64::new(1.0, 0.0);
        for g in c.gates() {
            apply_gate(&mut amps, g);
        }
        u.set_column(col, &nalgebra::DVector::from_vec(amps));
    }
    Ok(u)
}

/// Splits a circuit into its unitary prefix and terminal `(qubit, clbit)`
/// measurements. Rejects gates after a measurement and repeated measurements.
pub(crate) fn split_measurements(c: &Circuit) -> Result<(Circuit, Vec<(usize, usize)>), SimError> {
    let mut measured: Vec<(usize, usize)> = Vec::new();
    for g in c.gates() {
        if g.kind() == GateKind::Measure {
            let (q, cl) = (g.qubits()[0], g.clbit().expect("measure has a clbit"));
            if measured.iter().any(|&(mq, _)| mq == q) {
                return Err(SimError::MidCircuitMeasurement(format!("qubit {q} measured twice")));
            }
            if measured.iter().any(|&(_, mc)| mc == cl) {
                return Err(SimError::MidCircuitMeasurement(format!("classical bit {cl} written twice")));
            }
            measured.push((q, cl));
        } else if !measured.is_empty() {
            return Err(SimError::MidCircuitMeasurement(format!("{} after a measurement", g.kind())));
        }
    }
    if measured.is_empty() {
        return Err(SimError::NoMeasurements);
    }
    Ok((c.without_measurements(), measured))
}

/// Exact distribution of the terminal measurements.
///
/// Idle qubits are dropped before simulating, so the width cap applies to the
/// qubits the circuit actually touches.
pub fn measure_distribution(c: &Circuit) -> Result<OutcomeDistribution, SimError> {
    measure_distribution_capped(c, DEFAULT_STATEVECTOR_CAP)
}

pub fn measure_distribution_capped(c: &Circuit, cap: usize) -> Result<OutcomeDistribution, SimError> {
    let (compact, _) = c.compact();
    let (unitary, measured) = split_measurements(&compact)?;
    let sv = run_ideal_capped(&unitary, cap)?;
    let dense = marginalize(sv.amplitudes.len(), |i| sv.probability(i), &measured, c.num_clbits());
    Ok(OutcomeDistribution::from_dense(c.num_clbits(), &dense)?)
}

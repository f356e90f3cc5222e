//! Density-matrix simulation under the device noise model.
//!
//! Each run starts in `|0…0⟩` with a preparation bit-flip (`p_m`) per qubit.
//! Every gate is applied ideally, then followed by a depolarizing channel
//! with the calibrated gate error, then thermal relaxation on each operand
//! for the gate's duration. Measured qubits relax for the measurement
//! duration and the final distribution goes through a symmetric readout
//! confusion (`p_s`) per classical bit.
//!
//! The state is kept as a statevector until the first non-trivial channel,
//! so a noiseless device reproduces the ideal simulator bit for bit.

use num_complex::Complex64;

use super::channels::{bit_flip, reset_channel, thermal_relaxation, KrausChannel};
use super::ideal::{split_measurements, StateVector};
use super::kernel::{apply_gate, apply_matrix, marginalize};
use super::SimError;
use crate::arch::{ArchitectureSpec, Edge};
use crate::circuit::{CMatrix, Circuit, Gate, GateKind};
use crate::distribution::OutcomeDistribution;
use crate::routing::transpile;

/// Default width cap for density-matrix simulation.
pub const DEFAULT_DENSITY_CAP: usize = 12;

/// Mixed state; entry `(r, c)` lives at index `(r << n) | c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Vec<Complex64>,
    num_qubits: usize,
}

impl DensityMatrix {
    pub fn zero(num_qubits: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); 1usize << (2 * num_qubits)];
        entries[0] = Complex64::new(1.0, 0.0);
        DensityMatrix { entries, num_qubits }
    }

    pub fn from_pure(sv: &StateVector) -> Self {
        let n = sv.num_qubits();
        let amps = sv.amplitudes();
        let mut entries = Vec::with_capacity(amps.len() * amps.len());
        for r in amps {
            for c in amps {
                entries.push(r * c.conj());
            }
        }
        DensityMatrix { entries, num_qubits: n }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[(r << self.num_qubits) | c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |r, c| self.get(r, c))
    }

    /// `U ρ U†` for a unitary gate.
    pub fn apply_gate(&mut self, gate: &Gate) {
        let n = self.num_qubits;
        let rows = gate.remapped(|q| q + n);
        apply_gate(&mut self.entries, &rows);
        let m = gate.matrix().expect("unitary gate");
        apply_matrix(&mut self.entries, gate.qubits(), &m.map(|z| z.conj()));
    }

    /// `Σ K ρ K†` with the channel acting on `qubits` (operand j = local bit j).
    pub fn apply_channel(&mut self, channel: &KrausChannel, qubits: &[usize]) {
        assert_eq!(channel.arity(), qubits.len(), "channel arity mismatch");
        if channel.is_identity() {
            return;
        }
        let n = self.num_qubits;
        let rows: Vec<usize> = qubits.iter().map(|q| q + n).collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); self.entries.len()];
        for k in channel.operators() {
            let mut term = self.entries.clone();
            apply_matrix(&mut term, &rows, k);
            apply_matrix(&mut term, qubits, &k.map(|z| z.conj()));
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
        }
        self.entries = acc;
    }

    /// Depolarizing channel on one or two qubits, evaluated as
    /// `(1 − f)ρ + f·Tr_S(ρ) ⊗ I/2^k` with `f = p·4^k/(4^k − 1)`, which equals
    /// the uniform non-identity Pauli mixture.
    pub fn apply_depolarizing(&mut self, p: f64, qubits: &[usize]) {
        if p == 0.0 {
            return;
        }
        let n = self.num_qubits;
        let k = qubits.len();
        let local = 1usize << k;
        let f = p * (local * local) as f64 / (local * local - 1) as f64;
        let row_off: Vec<usize> = (0..local)
            .map(|s| qubits.iter().enumerate().filter(|(b, _)| s >> b & 1 == 1).map(|(_, &q)| 1usize << (q + n)).sum())
            .collect();
        let col_off: Vec<usize> = (0..local)
            .map(|s| qubits.iter().enumerate().filter(|(b, _)| s >> b & 1 == 1).map(|(_, &q)| 1usize << q).sum())
            .collect();
        let mask: usize = row_off[local - 1] | col_off[local - 1];
        for base in 0..self.entries.len() {
            if base & mask != 0 {
                continue;
            }
            let traced: Complex64 = (0..local).map(|s| self.entries[base | row_off[s] | col_off[s]]).sum();
            let mixed = traced * (f / local as f64);
            for (s, ro) in row_off.iter().enumerate() {
                for (t, co) in col_off.iter().enumerate() {
                    let e = &mut self.entries[base | ro | co];
                    *e *= 1.0 - f;
                    if s == t {
                        *e += mixed;
                    }
                }
            }
        }
    }
}

/// Settings for [`run_noisy_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyConfig {
    /// Largest number of active qubits simulated as a density matrix.
    pub width_cap: usize,
    /// Multiplier on the two-qubit error charged once per opaque unitary.
    pub unitary_charge: f64,
}

impl Default for NoisyConfig {
    fn default() -> Self {
        NoisyConfig { width_cap: DEFAULT_DENSITY_CAP, unitary_charge: 1.0 }
    }
}

enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    fn mixed(&mut self) -> &mut DensityMatrix {
        if let State::Pure(sv) = self {
            *self = State::Mixed(DensityMatrix::from_pure(sv));
        }
        match self {
            State::Mixed(rho) => rho,
            State::Pure(_) => unreachable!(),
        }
    }

    fn apply_gate(&mut self, g: &Gate) {
        match self {
            State::Pure(sv) => apply_gate(sv.amplitudes_mut(), g),
            State::Mixed(rho) => rho.apply_gate(g),
        }
    }

    fn apply_channel(&mut self, ch: &KrausChannel, qubits: &[usize]) {
        if !ch.is_identity() {
            self.mixed().apply_channel(ch, qubits);
        }
    }
}

/// Noisy distribution with [`NoisyConfig::default`].
pub fn run_noisy(
    c: &Circuit,
    arch: &ArchitectureSpec,
    layout: Option<&[usize]>,
) -> Result<OutcomeDistribution, SimError> {
    run_noisy_with(c, arch, layout, &NoisyConfig::default())
}

/// Transpiles `c` onto `arch` (identity layout unless given) and evolves the
/// density matrix of the active qubits under the device noise model.
pub fn run_noisy_with(
    c: &Circuit,
    arch: &ArchitectureSpec,
    layout: Option<&[usize]>,
    config: &NoisyConfig,
) -> Result<OutcomeDistribution, SimError> {
    let routed = transpile(c, arch, layout)?;
    let (compact, phys) = routed.circuit.compact();
    let (body, measured) = split_measurements(&compact)?;
    if compact.num_qubits() > config.width_cap {
        return Err(SimError::WidthCap { width: compact.num_qubits(), cap: config.width_cap });
    }
    let noise = &arch.noise;
    let relax = |state: &mut State, q: usize, duration_ns: f64| -> Result<(), SimError> {
        if duration_ns > 0.0 {
            if let Some((t1, t2)) = noise.coherence(phys[q]) {
                let ch = thermal_relaxation(t1, t2, duration_ns / 1000.0)?;
                state.apply_channel(&ch, &[q]);
            }
        }
        Ok(())
    };

    let mut state = State::Pure(StateVector::zero(compact.num_qubits()));
    for q in 0..compact.num_qubits() {
        state.apply_channel(&bit_flip(noise.prep(phys[q])?)?, &[q]);
    }

    for g in body.gates() {
        let ops = g.qubits();
        if g.kind() == GateKind::Reset {
            state.apply_channel(&reset_channel(), ops);
        } else {
            state.apply_gate(g);
            let p = match ops {
                [q] => noise.gate_error_1q(g.kind(), &[], phys[*q])?,
                [a, b] => {
                    let edge = Edge::new(phys[*a], phys[*b]);
                    if g.kind() == GateKind::Unitary {
                        (noise.gate_error_2q(g.kind(), &["cx"], edge)? * config.unitary_charge).min(1.0)
                    } else {
                        noise.gate_error_2q(g.kind(), &[], edge)?
                    }
                }
                _ => return Err(SimError::UnsupportedGate(format!("{}-qubit {} in noisy run", ops.len(), g.kind()))),
            };
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidChannel(format!("gate error {p} for {}", g.kind())));
            }
            if p > 0.0 {
                state.mixed().apply_depolarizing(p, ops);
            }
        }
        let duration = arch.duration_ns(g.kind(), ops.len());
        for &q in ops {
            relax(&mut state, q, duration)?;
        }
    }

    let measure_ns = arch.duration_ns(GateKind::Measure, 1);
    for &(q, _) in &measured {
        relax(&mut state, q, measure_ns)?;
    }

    let num_clbits = compact.num_clbits();
    let mut dense = match &state {
        State::Pure(sv) => marginalize(sv.amplitudes().len(), |i| sv.probability(i), &measured, num_clbits),
        State::Mixed(rho) => {
            let diag = rho.diagonal();
            marginalize(diag.len(), |i| diag[i], &measured, num_clbits)
        }
    };
    for &(q, cl) in &measured {
        apply_readout_flip(&mut dense, cl, noise.meas(phys[q])?);
    }
    Ok(OutcomeDistribution::from_dense(num_clbits, &dense)?)
}

/// Symmetric classical confusion on one bit of a dense outcome table.
pub fn apply_readout_flip(dense: &mut [f64], clbit: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    let bit = 1usize << clbit;
    for i in 0..dense.len() {
        if i & bit == 0 {
            let (a, b) = (dense[i], dense[i | bit]);
            dense[i] = (1.0 - p) * a + p * b;
            dense[i | bit] = p * a + (1.0 - p) * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::NoiseParameters;
    use crate::sim::channels::depolarizing;
    use crate::sim::measure_distribution;

    fn one_qubit_device(p1: f64, meas: f64) -> ArchitectureSpec {
        let noise = NoiseParameters::uniform(1, &[], p1, 0.0, 0.0, meas, None);
        ArchitectureSpec::new("single", 1, [], noise).unwrap()
    }

    fn x_measure() -> Circuit {
        let mut c = Circuit::new(1, 1);
        c.add(Gate::x(0));
        c.add(Gate::measure(0, 0));
        c
    }

    #[test]
    fn readout_only() {
        let d = run_noisy(&x_measure(), &one_qubit_device(0.0, 0.1), None).unwrap();
        assert!((d.prob(1) - 0.9).abs() < 1e-12);
        assert!((d.prob(0) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn gate_depolarizing_only() {
        // X then depolarizing(0.03): Z and Y flip back to |0⟩ with 2p/3
        let d = run_noisy(&x_measure(), &one_qubit_device(0.03, 0.0), None).unwrap();
        assert!((d.prob(1) - 0.98).abs() < 1e-12);
        assert!((d.prob(0) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn noiseless_device_is_bit_exact() {
        let mut c = Circuit::new(3, 3);
        c.add(Gate::h(0));
        c.add(Gate::ry(0.3, 2));
        c.add(Gate::ccx(0, 2, 1));
        c.add(Gate::cphase(0.4, 1, 0));
        c.measure_first(3).unwrap();
        let arch = ArchitectureSpec::linear(3);
        let routed = transpile(&c, &arch, None).unwrap();
        let ideal = measure_distribution(&routed.circuit).unwrap();
        let noisy = run_noisy(&c, &arch, None).unwrap();
        assert_eq!(ideal, noisy);
    }

    #[test]
    fn fast_depolarizing_matches_kraus_sum() {
        let mut sv = StateVector::zero(3);
        for g in [Gate::h(0), Gate::ry(0.8, 1), Gate::cx(0, 2), Gate::rx(1.3, 2), Gate::cphase(0.6, 1, 2)] {
            apply_gate(sv.amplitudes_mut(), &g);
        }
        let base = DensityMatrix::from_pure(&sv);
        for (p, qubits) in [(0.2, vec![1]), (0.07, vec![2, 0]), (1.0, vec![0, 1])] {
            let mut fast = base.clone();
            fast.apply_depolarizing(p, &qubits);
            let mut slow = base.clone();
            slow.apply_channel(&depolarizing(p, qubits.len()).unwrap(), &qubits);
            assert!((fast.to_matrix() - slow.to_matrix()).norm() < 1e-13);
        }
    }

    #[test]
    fn missing_parameter_is_an_error() {
        let mut noise = NoiseParameters::uniform(2, &[Edge::new(0, 1)], 0.01, 0.02, 0.0, 0.0, None);
        noise.gate_error_2q.clear();
        let arch = ArchitectureSpec::new("holes", 2, [(0, 1)], noise).unwrap();
        let mut c = Circuit::new(2, 2);
        c.add(Gate::cx(0, 1));
        c.measure_first(2).unwrap();
        assert!(matches!(run_noisy(&c, &arch, None), Err(SimError::Arch(_))));
    }

    #[test]
    fn width_cap_applies_to_active_qubits() {
        let arch = ArchitectureSpec::linear(4);
        let mut c = Circuit::new(4, 4);
        for q in 0..4 {
            c.add(Gate::h(q));
        }
        c.measure_first(4).unwrap();
        let config = NoisyConfig { width_cap: 3, ..NoisyConfig::default() };
        assert!(matches!(run_noisy_with(&c, &arch, None, &config), Err(SimError::WidthCap { .. })));
    }

    #[test]
    fn trace_is_preserved() {
        let arch = crate::arch::builtin_machine("bogota").unwrap();
        let mut c = Circuit::new(3, 3);
        c.add(Gate::h(0));
        c.add(Gate::cx(0, 2));
        c.add(Gate::t(1));
        c.measure_first(3).unwrap();
        let d = run_noisy(&c, &arch, None).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-9);
    }
}

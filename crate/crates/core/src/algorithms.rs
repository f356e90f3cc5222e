//! Benchmark circuit builders and their closed-form success probabilities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate};
use crate::hamiltonian::{
    cycle_walk_hamiltonian, exact_evolution, pauli_decompose, trotter_circuit, trotter_reps, HamiltonianError,
};

/// Error budget used for the product-formula repetition count when neither
/// `trotter_r` nor `eps` is given.
pub const DEFAULT_TROTTER_EPS: f64 = 0.01;

/// Widest position register accepted by the walk builders.
pub const MAX_POSITION_QUBITS: usize = 10;

#[derive(Debug, Error)]
pub enum AlgorithmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// One benchmark workload. In experiment files the variant is chosen by
/// `"kind"`, e.g. `{"kind": "QPE", "counting_qubits": 3, "phase": 0.3333333333333333}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum AlgorithmConfig {
    /// Coined walk on the `2^position_qubits` cycle, starting at node 0.
    #[serde(rename = "DTQW")]
    Dtqw { position_qubits: usize, steps: usize },
    /// Continuous-time walk as one opaque unitary.
    #[serde(rename = "CTQW")]
    Ctqw { position_qubits: usize, time: f64 },
    /// Continuous-time walk through the Pauli decomposition and a product formula.
    #[serde(rename = "PD")]
    Pd {
        position_qubits: usize,
        time: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trotter_r: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    /// Phase estimation of `diag(1, e^{2πi·phase})`; `phase` is a fraction of a turn.
    #[serde(rename = "QPE")]
    Qpe { counting_qubits: usize, phase: f64 },
    /// Grover search with an ancilla-assisted multi-controlled Z.
    #[serde(rename = "QSa")]
    QsAncilla { qubits: usize, marked: u64, iterations: usize },
    /// Grover search with a direct multi-controlled Z.
    #[serde(rename = "QSn")]
    QsNoAncilla { qubits: usize, marked: u64, iterations: usize },
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Dtqw { .. } => "DTQW",
            AlgorithmConfig::Ctqw { .. } => "CTQW",
            AlgorithmConfig::Pd { .. } => "PD",
            AlgorithmConfig::Qpe { .. } => "QPE",
            AlgorithmConfig::QsAncilla { .. } => "QSa",
            AlgorithmConfig::QsNoAncilla { .. } => "QSn",
        }
    }

    /// The six reference workloads.
    pub fn table3() -> Vec<AlgorithmConfig> {
        vec![
            AlgorithmConfig::Dtqw { position_qubits: 2, steps: 1 },
            AlgorithmConfig::Ctqw { position_qubits: 2, time: 3.0 },
            AlgorithmConfig::Pd { position_qubits: 2, time: 3.0, trotter_r: None, eps: None },
            AlgorithmConfig::Qpe { counting_qubits: 3, phase: 1.0 / 3.0 },
            AlgorithmConfig::QsAncilla { qubits: 4, marked: 10, iterations: 3 },
            AlgorithmConfig::QsNoAncilla { qubits: 4, marked: 10, iterations: 3 },
        ]
    }

    pub fn validate(&self) -> Result<(), AlgorithmError> {
        let bad = |msg: String| Err(AlgorithmError::InvalidConfig(msg));
        match *self {
            AlgorithmConfig::Dtqw { position_qubits: k, steps } => {
                check_position(k)?;
                if steps == 0 {
                    return bad("DTQW needs at least one step".into());
                }
            }
            AlgorithmConfig::Ctqw { position_qubits: k, time } => {
                check_position(k)?;
                check_time(time)?;
            }
            AlgorithmConfig::Pd { position_qubits: k, time, trotter_r, eps } => {
                check_position(k)?;
                check_time(time)?;
                if trotter_r == Some(0) {
                    return bad("trotter_r must be at least 1".into());
                }
                if let Some(e) = eps {
                    if !(e > 0.0) {
                        return bad(format!("eps must be positive, got {e}"));
                    }
                }
            }
            AlgorithmConfig::Qpe { counting_qubits, phase } => {
                if counting_qubits == 0 || counting_qubits > 16 {
                    return bad(format!("counting_qubits {counting_qubits} outside 1..=16"));
                }
                if !(0.0..1.0).contains(&phase) {
                    return bad(format!("phase fraction {phase} outside [0, 1)"));
                }
            }
            AlgorithmConfig::QsAncilla { qubits, marked, .. } | AlgorithmConfig::QsNoAncilla { qubits, marked, .. } => {
                if qubits == 0 || qubits > 16 {
                    return bad(format!("search register of {qubits} qubits outside 1..=16"));
                }
                if marked >> qubits != 0 {
                    return bad(format!("marked item {marked} does not fit in {qubits} qubits"));
                }
            }
        }
        Ok(())
    }

    /// Product-formula repetitions used by `PD` (1 for other kinds).
    pub fn trotter_reps(&self) -> Result<usize, AlgorithmError> {
        match *self {
            AlgorithmConfig::Pd { trotter_r: Some(r), .. } => Ok(r),
            AlgorithmConfig::Pd { position_qubits, time, eps, .. } => {
                if time == 0.0 {
                    return Ok(1);
                }
                let terms = pauli_decompose(&cycle_walk_hamiltonian(1 << position_qubits)?);
                Ok(trotter_reps(&terms, time, eps.unwrap_or(DEFAULT_TROTTER_EPS))?)
            }
            _ => Ok(1),
        }
    }

    pub fn build(&self) -> Result<Circuit, AlgorithmError> {
        self.validate()?;
        let c = match *self {
            AlgorithmConfig::Dtqw { position_qubits, steps } => build_dtqw(position_qubits, steps)?,
            AlgorithmConfig::Ctqw { position_qubits, time } => build_ctqw_exact(position_qubits, time)?,
            AlgorithmConfig::Pd { position_qubits, time, .. } => build_pd(position_qubits, time, self.trotter_reps()?)?,
            AlgorithmConfig::Qpe { counting_qubits, phase } => build_qpe(counting_qubits, phase)?,
            AlgorithmConfig::QsAncilla { qubits, marked, iterations } => build_grover(qubits, marked, iterations, true)?,
            AlgorithmConfig::QsNoAncilla { qubits, marked, iterations } => {
                build_grover(qubits, marked, iterations, false)?
            }
        };
        Ok(c)
    }

    /// Number of qubits the built circuit touches.
    pub fn expected_workspace(&self) -> usize {
        match *self {
            AlgorithmConfig::Dtqw { position_qubits, .. } => position_qubits + 1,
            AlgorithmConfig::Ctqw { position_qubits, .. } | AlgorithmConfig::Pd { position_qubits, .. } => {
                position_qubits
            }
            AlgorithmConfig::Qpe { counting_qubits, .. } => counting_qubits + 1,
            AlgorithmConfig::QsAncilla { qubits, .. } => qubits + grover_ancillas(qubits),
            AlgorithmConfig::QsNoAncilla { qubits, .. } => qubits,
        }
    }

    /// Expected outcome(s) and their ideal probability.
    pub fn theoretical_success(&self) -> Result<Vec<(u64, f64)>, AlgorithmError> {
        self.validate()?;
        Ok(theoretical_success(self))
    }
}

fn check_position(k: usize) -> Result<(), AlgorithmError> {
    if k == 0 || k > MAX_POSITION_QUBITS {
        return Err(AlgorithmError::InvalidConfig(format!(
            "position_qubits {k} outside 1..={MAX_POSITION_QUBITS}"
        )));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<(), AlgorithmError> {
    if !t.is_finite() || t < 0.0 {
        return Err(AlgorithmError::InvalidConfig(format!("time {t} must be finite and non-negative")));
    }
    Ok(())
}

/// Adds `+1 mod 2^k` on `register` (little-endian), controlled on `control`,
/// as a cascade of multi-controlled X gates from the top bit down.
fn controlled_increment(control: usize, register: &[usize]) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(register.len());
    for i in (1..register.len()).rev() {
        let mut controls = vec![control];
        controls.extend_from_slice(&register[..i]);
        gates.push(Gate::mcx(&controls, register[i]).expect("distinct operands"));
    }
    gates.push(Gate::cx(control, register[0]));
    gates
}

/// Coined walk on the `2^k` cycle. Qubits `0..k` hold the position, qubit `k`
/// is the coin; coin `|1⟩` steps to `+1`, coin `|0⟩` to `−1`. Only the position
/// register is measured.
pub fn build_dtqw(position_qubits: usize, steps: usize) -> Result<Circuit, AlgorithmError> {
    AlgorithmConfig::Dtqw { position_qubits, steps }.validate()?;
    let k = position_qubits;
    let coin = k;
    let register: Vec<usize> = (0..k).collect();
    let inc = controlled_increment(coin, &register);
    let mut c = Circuit::new(k + 1, k).with_label(format!("DTQW k={k} steps={steps}"));
    for _ in 0..steps {
        c.add(Gate::h(coin));
        c.extend(inc.iter().cloned())?;
        c.add(Gate::x(coin));
        c.extend(inc.iter().rev().cloned())?;
        c.add(Gate::x(coin));
    }
    c.measure_first(k)?;
    Ok(c)
}

/// Continuous-time walk: `exp(−iHt)` of the cycle Hamiltonian as a single
/// opaque gate on the position register, then measurement.
pub fn build_ctqw_exact(position_qubits: usize, time: f64) -> Result<Circuit, AlgorithmError> {
    AlgorithmConfig::Ctqw { position_qubits, time }.validate()?;
    let k = position_qubits;
    let u = exact_evolution(&cycle_walk_hamiltonian(1 << k)?, time);
    let mut c = Circuit::new(k, k).with_label(format!("CTQW k={k} t={time}"));
    c.push(Gate::unitary(u, (0..k).collect())?)?;
    c.measure_first(k)?;
    Ok(c)
}

/// Continuous-time walk through the first-order product formula with `r`
/// repetitions.
pub fn build_pd(position_qubits: usize, time: f64, r: usize) -> Result<Circuit, AlgorithmError> {
    AlgorithmConfig::Pd { position_qubits, time, trotter_r: Some(r), eps: None }.validate()?;
    let k = position_qubits;
    let terms = pauli_decompose(&cycle_walk_hamiltonian(1 << k)?);
    let evolution = trotter_circuit(&terms, time, r)?;
    let mut c = Circuit::new(k, k).with_label(format!("PD k={k} t={time} r={r}"));
    c.append(&evolution)?;
    c.measure_first(k)?;
    Ok(c)
}

/// Inverse QFT on `qubits` (qubit `qubits[0]` least significant), with the
/// bit-reversal swaps first.
pub fn inverse_qft(qubits: &[usize]) -> Vec<Gate> {
    let m = qubits.len();
    let mut gates = Vec::new();
    for j in 0..m / 2 {
        gates.push(Gate::swap(qubits[j], qubits[m - 1 - j]));
    }
    for j in 0..m {
        for k in 0..j {
            gates.push(Gate::cphase(-PI / (1u64 << (j - k)) as f64, qubits[k], qubits[j]));
        }
        gates.push(Gate::h(qubits[j]));
    }
    gates
}

/// Phase estimation of `P(2π·phase)` with `counting_qubits` counting qubits
/// (`0..m`) and the eigenstate `|1⟩` on qubit `m`.
pub fn build_qpe(counting_qubits: usize, phase: f64) -> Result<Circuit, AlgorithmError> {
    AlgorithmConfig::Qpe { counting_qubits, phase }.validate()?;
    let m = counting_qubits;
    let eigen = m;
    let mut c = Circuit::new(m + 1, m).with_label(format!("QPE m={m} phase={phase}"));
    c.add(Gate::x(eigen));
    for j in 0..m {
        c.add(Gate::h(j));
    }
    for j in 0..m {
        let angle = (2.0 * PI * phase * (1u64 << j) as f64).rem_euclid(2.0 * PI);
        c.add(Gate::cphase(angle, j, eigen));
    }
    let counting: Vec<usize> = (0..m).collect();
    c.extend(inverse_qft(&counting))?;
    c.measure_first(m)?;
    Ok(c)
}

/// Ancillas used by the V-chain multi-controlled Z on `n` qubits.
pub fn grover_ancillas(n: usize) -> usize {
    n.saturating_sub(2)
}

/// Z with all of `qubits` as controls (symmetric in its operands).
fn multi_controlled_z(qubits: &[usize], ancillas: Option<&[usize]>) -> Vec<Gate> {
    let n = qubits.len();
    match (n, ancillas) {
        (1, _) => vec![Gate::z(qubits[0])],
        (2, _) => vec![Gate::cz(qubits[0], qubits[1])],
        (_, None) => {
            let t = qubits[n - 1];
            vec![Gate::h(t), Gate::mcx(&qubits[..n - 1], t).expect("distinct operands"), Gate::h(t)]
        }
        (_, Some(anc)) => {
            let mut compute = vec![Gate::ccx(qubits[0], qubits[1], anc[0])];
            for i in 2..n - 1 {
                compute.push(Gate::ccx(qubits[i], anc[i - 2], anc[i - 1]));
            }
            let mut gates = compute.clone();
            gates.push(Gate::cz(anc[n - 3], qubits[n - 1]));
            gates.extend(compute.into_iter().rev());
            gates
        }
    }
}

/// Grover search for `marked` on `n` qubits. With `use_ancilla`, the
/// multi-controlled Z runs through a chain of `n − 2` Toffoli ancillas
/// (qubits `n..2n−2`), otherwise it is a single multi-controlled gate.
pub fn build_grover(n: usize, marked: u64, iterations: usize, use_ancilla: bool) -> Result<Circuit, AlgorithmError> {
    AlgorithmConfig::QsNoAncilla { qubits: n, marked, iterations }.validate()?;
    let ancilla_count = if use_ancilla { grover_ancillas(n) } else { 0 };
    let register: Vec<usize> = (0..n).collect();
    let anc: Vec<usize> = (n..n + ancilla_count).collect();
    let mcz = multi_controlled_z(&register, use_ancilla.then_some(anc.as_slice()));
    let zeros: Vec<usize> = register.iter().copied().filter(|&q| marked >> q & 1 == 0).collect();

    let tag = if use_ancilla { "QSa" } else { "QSn" };
    let mut c = Circuit::new(n + ancilla_count, n).with_label(format!("{tag} n={n} marked={marked} k={iterations}"));
    c.extend(register.iter().map(|&q| Gate::h(q)))?;
    for _ in 0..iterations {
        c.extend(zeros.iter().map(|&q| Gate::x(q)))?;
        c.extend(mcz.iter().cloned())?;
        c.extend(zeros.iter().map(|&q| Gate::x(q)))?;

        c.extend(register.iter().map(|&q| Gate::h(q)))?;
        c.extend(register.iter().map(|&q| Gate::x(q)))?;
        c.extend(mcz.iter().cloned())?;
        c.extend(register.iter().map(|&q| Gate::x(q)))?;
        c.extend(register.iter().map(|&q| Gate::h(q)))?;
    }
    c.measure_first(n)?;
    Ok(c)
}

/// Ideal probabilities of the coined walk, by direct amplitude recursion.
pub fn dtqw_distribution(position_qubits: usize, steps: usize) -> Vec<f64> {
    let n = 1usize << position_qubits;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // amp[pos][coin]
    let mut amp = vec![[Complex64::new(0.0, 0.0); 2]; n];
    amp[0][0] = Complex64::new(1.0, 0.0);
    for _ in 0..steps {
        let mut next = vec![[Complex64::new(0.0, 0.0); 2]; n];
        for (pos, [a0, a1]) in amp.iter().enumerate() {
            let (c0, c1) = ((a0 + a1) * h, (a0 - a1) * h);
            next[(pos + n - 1) % n][0] += c0;
            next[(pos + 1) % n][1] += c1;
        }
        amp = next;
    }
    amp.iter().map(|[a0, a1]| a0.norm_sqr() + a1.norm_sqr()).collect()
}

/// Node occupation of the continuous-time walk from node 0, from the Fourier
/// diagonalisation of the cycle.
pub fn ctqw_distribution(position_qubits: usize, time: f64) -> Vec<f64> {
    let n = 1usize << position_qubits;
    // the 2-node cycle has a single edge, so its eigenvalues are ±1/2
    let scale = if n == 2 { 0.5 } else { 1.0 };
    (0..n)
        .map(|j| {
            let amp: Complex64 = (0..n)
                .map(|k| {
                    let theta = 2.0 * PI * k as f64 / n as f64;
                    Complex64::from_polar(1.0, -time * scale * theta.cos() + theta * j as f64)
                })
                .sum::<Complex64>()
                / n as f64;
            amp.norm_sqr()
        })
        .collect()
}

/// Probability that phase estimation returns the closest `m`-bit estimate.
pub fn qpe_success(counting_qubits: usize, phase: f64) -> (u64, f64) {
    let size = (1u64 << counting_qubits) as f64;
    let best = (phase * size).round();
    let delta = phase - best / size;
    let p = if delta.abs() < 1e-15 {
        1.0
    } else {
        (size * PI * delta).sin().powi(2) / (size * size * (PI * delta).sin().powi(2))
    };
    ((best as u64) % (1u64 << counting_qubits), p)
}

/// `sin²((2k + 1)·arcsin(2^{−n/2}))`.
pub fn grover_success(n: usize, iterations: usize) -> f64 {
    let theta = (2f64).powf(-(n as f64) / 2.0).asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

fn argmax_entries(probs: &[f64]) -> Vec<(u64, f64)> {
    let top = probs.iter().copied().fold(0.0, f64::max);
    probs.iter().enumerate().filter(|&(_, &p)| p >= top - 1e-12).map(|(i, &p)| (i as u64, p)).collect()
}

/// Closed-form most likely outcome(s) and their probability.
pub fn theoretical_success(config: &AlgorithmConfig) -> Vec<(u64, f64)> {
    match *config {
        AlgorithmConfig::Dtqw { position_qubits, steps } => argmax_entries(&dtqw_distribution(position_qubits, steps)),
        AlgorithmConfig::Ctqw { position_qubits, time } | AlgorithmConfig::Pd { position_qubits, time, .. } => {
            argmax_entries(&ctqw_distribution(position_qubits, time))
        }
        AlgorithmConfig::Qpe { counting_qubits, phase } => vec![qpe_success(counting_qubits, phase)],
        AlgorithmConfig::QsAncilla { qubits, marked, iterations }
        | AlgorithmConfig::QsNoAncilla { qubits, marked, iterations } => {
            vec![(marked, grover_success(qubits, iterations))]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::circuit_stats;
    use crate::sim::measure_distribution;
    use proptest::prelude::*;

    fn dist(c: &Circuit) -> crate::distribution::OutcomeDistribution {
        measure_distribution(c).unwrap()
    }

    #[test]
    fn dtqw_one_step() {
        let d = dist(&build_dtqw(2, 1).unwrap());
        assert!((d.prob(1) - 0.5).abs() < 1e-12);
        assert!((d.prob(3) - 0.5).abs() < 1e-12);
        assert_eq!(circuit_stats(&build_dtqw(2, 1).unwrap()).workspace, 3);
    }

    #[test]
    fn dtqw_matches_recursion() {
        for (k, steps) in [(2, 2), (2, 5), (3, 4), (3, 7), (1, 3)] {
            let d = dist(&build_dtqw(k, steps).unwrap());
            let expect = dtqw_distribution(k, steps);
            for (i, p) in expect.iter().enumerate() {
                assert!((d.prob(i as u64) - p).abs() < 1e-12, "k={k} steps={steps} pos={i}");
            }
        }
    }

    #[test]
    fn ctqw_values() {
        let d = dist(&build_ctqw_exact(2, 3.0).unwrap());
        let s = 3f64.sin().powi(2) / 4.0;
        assert!((d.prob(2) - ((3f64.cos() - 1.0) / 2.0).powi(2)).abs() < 1e-12);
        assert!((d.prob(1) - s).abs() < 1e-12);
        assert!((d.prob(3) - s).abs() < 1e-12);
        assert!((d.prob(0) - 2.5e-5).abs() < 1e-6);
        assert!((d.prob(2) - 0.990017).abs() < 1e-6);
        assert!((dist(&build_ctqw_exact(2, 0.0).unwrap()).prob(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ctqw_fourier_formula_matches_circuit() {
        for k in 1..=3 {
            for t in [0.4, 1.7, 3.0, 5.5] {
                let d = dist(&build_ctqw_exact(k, t).unwrap());
                for (j, p) in ctqw_distribution(k, t).iter().enumerate() {
                    assert!((d.prob(j as u64) - p).abs() < 1e-12, "k={k} t={t} j={j}");
                }
                if k == 2 {
                    assert!((d.prob(1) - d.prob(3)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pd_single_rep_equals_ctqw() {
        let exact = dist(&build_ctqw_exact(2, 3.0).unwrap());
        let pd = dist(&build_pd(2, 3.0, 1).unwrap());
        assert!(exact.max_abs_diff(&pd) < 1e-9);
        assert!((dist(&build_pd(2, 0.0, 1).unwrap()).prob(0) - 1.0).abs() < 1e-12);
        let preset = AlgorithmConfig::Pd { position_qubits: 2, time: 3.0, trotter_r: None, eps: None };
        assert_eq!(preset.trotter_reps().unwrap(), 1);
    }

    #[test]
    fn pd_gate_count_is_linear() {
        let one = build_pd(2, 3.0, 1).unwrap().len() - 2;
        for r in [2, 3, 7] {
            assert_eq!(build_pd(2, 3.0, r).unwrap().len() - 2, r * one);
        }
    }

    #[test]
    fn qpe_values() {
        assert!((dist(&build_qpe(3, 0.125).unwrap()).prob(1) - 1.0).abs() < 1e-12);
        assert!((dist(&build_qpe(3, 0.0).unwrap()).prob(0) - 1.0).abs() < 1e-12);
        let d = dist(&build_qpe(3, 1.0 / 3.0).unwrap());
        let (label, p) = qpe_success(3, 1.0 / 3.0);
        assert_eq!(label, 3);
        assert!((d.prob(3) - p).abs() < 1e-12);
        assert!((p - 0.68784).abs() < 1e-5);
    }

    #[test]
    fn qpe_every_exact_phase() {
        for m in 1..=4 {
            for j in 0..1u64 << m {
                let d = dist(&build_qpe(m, j as f64 / (1u64 << m) as f64).unwrap());
                assert!((d.prob(j) - 1.0).abs() < 1e-12, "m={m} j={j}");
            }
        }
    }

    #[test]
    fn grover_values() {
        let d = dist(&build_grover(4, 10, 3, false).unwrap());
        assert!((d.prob(10) - grover_success(4, 3)).abs() < 1e-12);
        assert!((d.prob(10) - 0.9613).abs() < 1e-4);
        let a = dist(&build_grover(4, 10, 3, true).unwrap());
        assert!(a.max_abs_diff(&d) < 1e-9);

        let u = dist(&build_grover(4, 7, 0, false).unwrap());
        for l in 0..16 {
            assert!((u.prob(l) - 1.0 / 16.0).abs() < 1e-12);
        }
        for marked in 0..4 {
            for anc in [false, true] {
                assert!((dist(&build_grover(2, marked, 1, anc).unwrap()).prob(marked) - 1.0).abs() < 1e-12);
            }
        }
        assert!(build_grover(4, 16, 1, false).is_err());
    }

    #[test]
    fn grover_ancilla_widths() {
        for n in 3..=6 {
            let marked = (1u64 << n) - 2;
            let a = build_grover(n, marked, 2, true).unwrap();
            let b = build_grover(n, marked, 2, false).unwrap();
            assert_eq!(circuit_stats(&a).workspace, 2 * n - 2);
            assert_eq!(circuit_stats(&b).workspace, n);
            assert!(dist(&a).max_abs_diff(&dist(&b)) < 1e-9, "n={n}");
        }
    }

    #[test]
    fn table3_workspaces_and_oracles() {
        let expected = [3, 2, 2, 4, 6, 4];
        for (cfg, w) in AlgorithmConfig::table3().iter().zip(expected) {
            let c = cfg.build().unwrap();
            assert_eq!(circuit_stats(&c).workspace, w, "{}", cfg.name());
            assert_eq!(cfg.expected_workspace(), w);
            let d = dist(&c);
            for (label, p) in cfg.theoretical_success().unwrap() {
                assert!((d.prob(label) - p).abs() < 1e-9, "{} {label}", cfg.name());
            }
        }
    }

    #[test]
    fn theoretical_rows() {
        let t = AlgorithmConfig::table3();
        let dtqw = t[0].theoretical_success().unwrap();
        assert_eq!(dtqw.iter().map(|e| e.0).collect::<Vec<_>>(), [1, 3]);
        assert!(dtqw.iter().all(|e| (e.1 - 0.5).abs() < 1e-12));
        let ctqw = t[1].theoretical_success().unwrap();
        assert_eq!(ctqw.len(), 1);
        assert_eq!(ctqw[0].0, 2);
        assert!((ctqw[0].1 - 0.99).abs() < 1e-3);
        let qpe = t[3].theoretical_success().unwrap();
        assert_eq!(qpe[0].0, 3);
        assert!((qpe[0].1 - 0.688).abs() < 1e-3);
        let qs = t[4].theoretical_success().unwrap();
        assert_eq!(qs[0].0, 10);
        assert!((qs[0].1 - 0.96).abs() < 5e-3);
    }

    #[test]
    fn config_json() {
        let cfg: AlgorithmConfig =
            serde_json::from_str(r#"{"kind": "QSa", "qubits": 4, "marked": 10, "iterations": 3}"#).unwrap();
        assert_eq!(cfg, AlgorithmConfig::QsAncilla { qubits: 4, marked: 10, iterations: 3 });
        for c in AlgorithmConfig::table3() {
            let back: AlgorithmConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
            assert_eq!(back, c);
        }
        assert!(serde_json::from_str::<AlgorithmConfig>(r#"{"kind": "QPE", "counting_qubits": 3}"#).is_err());
        assert!(serde_json::from_str::<AlgorithmConfig>(r#"{"kind": "QPE", "counting_qubits": 3, "phase": 0.1, "steps": 2}"#).is_err());
        assert!(AlgorithmConfig::Qpe { counting_qubits: 3, phase: 1.2 }.build().is_err());
        assert!(AlgorithmConfig::Dtqw { position_qubits: 2, steps: 0 }.build().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn dtqw_parity(k in 1usize..=3, steps in 1usize..=8) {
            let d = dist(&build_dtqw(k, steps).unwrap());
            for (label, p) in d.iter() {
                prop_assert!(label % 2 == (steps % 2) as u64 || p < 1e-12, "pos {} p {}", label, p);
            }
        }

        #[test]
        fn qpe_matches_closed_form(m in 1usize..=5, phase in 0.0..1.0f64) {
            let d = dist(&build_qpe(m, phase).unwrap());
            let (label, p) = qpe_success(m, phase);
            prop_assert!((d.prob(label) - p).abs() < 1e-9);
        }

        #[test]
        fn grover_matches_closed_form(n in 2usize..=5, iterations in 0usize..=4, seed: u64) {
            let marked = seed % (1u64 << n);
            let d = dist(&build_grover(n, marked, iterations, false).unwrap());
            prop_assert!((d.prob(marked) - grover_success(n, iterations)).abs() < 1e-9);
        }
    }
}

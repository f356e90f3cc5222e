//! In-place gate application over amplitude vectors.
//!
//! Qubit `q` is bit `q` of the amplitude index. The same routines act on a
//! vectorised density matrix (row qubit `q` at bit `n + q`, column qubit at
//! bit `q`), which is how the noisy simulator reuses them.

use num_complex::Complex64;

use crate::circuit::{CMatrix, Gate, GateKind};

/// Applies a `2^k × 2^k` matrix to the listed qubits (operand j = local bit j).
pub fn apply_matrix(amps: &mut [Complex64], qubits: &[usize], m: &CMatrix) {
    match qubits.len() {
        1 => apply_1q(amps, qubits[0], [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]),
        _ => apply_kq(amps, qubits, m),
    }
}

fn apply_1q(amps: &mut [Complex64], q: usize, [a, b, c, d]: [Complex64; 4]) {
    let stride = 1usize << q;
    for block in (0..amps.len()).step_by(stride << 1) {
        for i in block..block + stride {
            let (x, y) = (amps[i], amps[i + stride]);
            amps[i] = a * x + b * y;
            amps[i + stride] = c * x + d * y;
        }
    }
}

fn apply_kq(amps: &mut [Complex64], qubits: &[usize], m: &CMatrix) {
    let dim = 1usize << qubits.len();
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|j| qubits.iter().enumerate().filter(|(b, _)| j >> b & 1 == 1).map(|(_, &q)| 1usize << q).sum())
        .collect();
    let mut local = vec![Complex64::new(0.0, 0.0); dim];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (j, off) in offsets.iter().enumerate() {
            local[j] = amps[base + off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (cidx, v) in local.iter().enumerate() {
                acc += m[(r, cidx)] * v;
            }
            amps[base + off] = acc;
        }
    }
}

/// Multi-controlled X as a permutation; exact for any number of controls.
fn apply_mcx(amps: &mut [Complex64], controls: &[usize], target: usize) {
    let cmask: usize = controls.iter().map(|&q| 1usize << q).sum();
    let tbit = 1usize << target;
    for i in 0..amps.len() {
        if i & cmask == cmask && i & tbit == 0 {
            amps.swap(i, i | tbit);
        }
    }
}

/// Applies a unitary gate. `Measure`/`Reset` must be handled by the caller.
pub fn apply_gate(amps: &mut [Complex64], gate: &Gate) {
    let q = gate.qubits();
    match gate.kind() {
        GateKind::Mcx => apply_mcx(amps, &q[..q.len() - 1], q[q.len() - 1]),
        GateKind::Measure | GateKind::Reset => unreachable!("non-unitary gate in kernel"),
        _ => {
            let m = gate.matrix().expect("unitary gate has a matrix");
            apply_matrix(amps, q, &m);
        }
    }
}

/// Sums `weight(i)` into the outcome index formed by reading `qubit → clbit`
/// pairs from `i`. Returns a dense table of length `2^num_clbits`.
pub fn marginalize(
    len: usize,
    weight: impl Fn(usize) -> f64,
    measured: &[(usize, usize)],
    num_clbits: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; 1usize << num_clbits];
    for i in 0..len {
        let w = weight(i);
        if w == 0.0 {
            continue;
        }
        let mut label = 0usize;
        for &(q, c) in measured {
            label |= (i >> q & 1) << c;
        }
        out[label] += w;
    }
    out
}

//! Kraus channels for gate infidelity and decoherence.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SimError;
use crate::circuit::CMatrix;

const COMPLETENESS_TOL: f64 = 1e-10;

/// Completely positive, trace-preserving map given by its Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    label: String,
}

impl KrausChannel {
    /// Checks equal square dimensions and `Σ Kᵢ†Kᵢ = I` within 1e-10.
    pub fn new(operators: Vec<CMatrix>, label: impl Into<String>) -> Result<Self, SimError> {
        let label = label.into();
        let dim = operators.first().map(|k| k.nrows()).ok_or_else(|| {
            SimError::InvalidChannel(format!("{label}: no Kraus operators"))
        })?;
        if !dim.is_power_of_two() || operators.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(SimError::InvalidChannel(format!("{label}: operators must be 2^k square, same size")));
        }
        let channel = KrausChannel { operators, label };
        let defect = channel.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(SimError::InvalidChannel(format!(
                "{}: Σ K†K deviates from identity by {defect:.3e}",
                channel.label
            )));
        }
        Ok(channel)
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn arity(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// Frobenius norm of `Σ Kᵢ†Kᵢ − I`.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        (sum - CMatrix::identity(dim, dim)).norm()
    }

    /// True for the single-identity-operator channel.
    pub fn is_identity(&self) -> bool {
        self.operators.len() == 1 && self.operators[0] == CMatrix::identity(self.dim(), self.dim())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli(index: usize) -> CMatrix {
    let (o, l, i) = (c(0.0), c(1.0), Complex64::new(0.0, 1.0));
    let entries = match index {
        0 => [l, o, o, l],
        1 => [o, l, l, o],
        2 => [o, -i, i, o],
        _ => [l, o, o, -l],
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

fn check_probability(p: f64, what: &str) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SimError::InvalidChannel(format!("{what} probability {p} outside [0, 1]")))
    }
}

/// Depolarizing channel: with probability `p` one of the `4^k − 1`
/// non-identity Paulis on `arity` qubits is applied, uniformly.
pub fn depolarizing(p: f64, arity: usize) -> Result<KrausChannel, SimError> {
    check_probability(p, "depolarizing")?;
    if !(1..=2).contains(&arity) {
        return Err(SimError::InvalidChannel(format!("depolarizing arity {arity} (expected 1 or 2)")));
    }
    let label = format!("depolarizing(p={p}, {arity}q)");
    let dim = 1usize << arity;
    if p == 0.0 {
        return KrausChannel::new(vec![CMatrix::identity(dim, dim)], label);
    }
    let others = (dim * dim - 1) as f64;
    let mut ops = Vec::with_capacity(dim * dim);
    for idx in 0..dim * dim {
        // operand 1 is the high bit, so it is the left Kronecker factor
        let m = if arity == 1 { pauli(idx) } else { pauli(idx / 4).kronecker(&pauli(idx % 4)) };
        let w = if idx == 0 { 1.0 - p } else { p / others };
        if w > 0.0 {
            ops.push(m * c(w.sqrt()));
        }
    }
    KrausChannel::new(ops, label)
}

/// Amplitude damping with `γ = 1 − exp(−duration/T1)` followed by pure
/// dephasing with `λ = 1 − exp(−duration/Tφ)`, `1/Tφ = 1/T2 − 1/(2·T1)`.
///
/// Dephasing is `ρ → (1 − λ/2)ρ + (λ/2)ZρZ`, which scales coherences by
/// `1 − λ`; together the off-diagonal decays as `exp(−duration/T2)`.
/// All three times share a unit. Zero-weight operators are dropped, so a zero
/// duration gives the identity channel.
pub fn thermal_relaxation(t1: f64, t2: f64, duration: f64) -> Result<KrausChannel, SimError> {
    if !(t1 > 0.0) || !(t2 > 0.0) {
        return Err(SimError::InvalidChannel(format!("T1 = {t1}, T2 = {t2} must be positive")));
    }
    if t2 > 2.0 * t1 * (1.0 + 1e-12) {
        return Err(SimError::InvalidChannel(format!("T2 = {t2} exceeds 2·T1 = {}", 2.0 * t1)));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(SimError::InvalidChannel(format!("duration {duration} must be finite and non-negative")));
    }
    let gamma = 1.0 - (-duration / t1).exp();
    let inv_tphi = (1.0 / t2 - 0.5 / t1).max(0.0);
    let lambda = 1.0 - (-duration * inv_tphi).exp();

    let zero = c(0.0);
    let damp = [
        DMatrix::from_row_slice(2, 2, &[c(1.0), zero, zero, c((1.0 - gamma).sqrt())]),
        DMatrix::from_row_slice(2, 2, &[zero, c(gamma.sqrt()), zero, zero]),
    ];
    let dephase = [
        DMatrix::identity(2, 2) * c((1.0 - lambda / 2.0).sqrt()),
        pauli(3) * c((lambda / 2.0).sqrt()),
    ];
    let ops: Vec<CMatrix> = dephase
        .iter()
        .flat_map(|d| damp.iter().map(move |a| d * a))
        .filter(|k| k.norm() > 0.0)
        .collect();
    KrausChannel::new(ops, format!("relaxation(T1={t1}, T2={t2}, t={duration})"))
}

/// Bit flip with probability `p`.
pub fn bit_flip(p: f64) -> Result<KrausChannel, SimError> {
    check_probability(p, "bit-flip")?;
    let ops = [(1.0 - p, pauli(0)), (p, pauli(1))]
        .into_iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, m)| m * c(w.sqrt()))
        .collect();
    KrausChannel::new(ops, format!("bit_flip(p={p})"))
}

/// Reset to `|0⟩`.
pub fn reset_channel() -> KrausChannel {
    let (o, l) = (c(0.0), c(1.0));
    KrausChannel::new(
        vec![DMatrix::from_row_slice(2, 2, &[l, o, o, o]), DMatrix::from_row_slice(2, 2, &[o, l, o, o])],
        "reset",
    )
    .expect("reset is complete")
}

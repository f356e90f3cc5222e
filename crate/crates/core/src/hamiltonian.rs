//! Cycle-walk Hamiltonians, Pauli decomposition and product-formula circuits.
//!
//! Pauli strings are written with the leftmost character acting on the
//! highest qubit, matching the Kronecker product order: `"IX"` is `I ⊗ X`,
//! i.e. X on qubit 0.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CMatrix, Circuit, Gate};

/// Entrywise tolerance for the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Decomposition coefficients below this magnitude are dropped.
pub const COEFFICIENT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("matrix is {rows}x{cols}, expected square with power-of-two size")]
    BadShape { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |H - H†| = {0:.3e})")]
    NotHermitian(f64),
    #[error("number of nodes {0} is not a power of two ≥ 2")]
    NotPowerOfTwo(usize),
    #[error("invalid Pauli string `{0}`")]
    BadPauli(String),
    #[error("Pauli strings have mixed lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("duplicate Pauli string {0}")]
    Duplicate(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("malformed decomposition file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Dense Hermitian matrix on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    num_qubits: usize,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self, HamiltonianError> {
        let (rows, cols) = matrix.shape();
        if rows != cols || !rows.is_power_of_two() || rows < 2 {
            return Err(HamiltonianError::BadShape { rows, cols });
        }
        let defect = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > HERMITIAN_TOL {
            return Err(HamiltonianError::NotHermitian(defect));
        }
        Ok(HermitianOperator { num_qubits: rows.trailing_zeros() as usize, matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real eigenvalues and orthonormal eigenvectors (as columns).
    pub fn eigen(&self) -> (DVector<f64>, CMatrix) {
        let e = SymmetricEigen::new(self.matrix.clone());
        (e.eigenvalues, e.eigenvectors)
    }

    /// Reads `{"matrix": [[entry, ...], ...]}` where each entry is a real
    /// number or a `[re, im]` pair.
    pub fn from_json(src: &str) -> Result<Self, HamiltonianError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Real(f64),
            Complex([f64; 2]),
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct File {
            matrix: Vec<Vec<Entry>>,
        }
        let file: File = serde_json::from_str(src)?;
        let rows = file.matrix.len();
        let cols = file.matrix.first().map_or(0, Vec::len);
        if file.matrix.iter().any(|r| r.len() != cols) {
            return Err(HamiltonianError::BadShape { rows, cols });
        }
        let m = CMatrix::from_fn(rows, cols, |i, j| match file.matrix[i][j] {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        });
        Self::new(m)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigen().0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `H = A/2` for the `num_nodes`-cycle, whose nodes have degree 2.
///
/// For two nodes the single edge is counted once, giving `H = X/2`.
pub fn cycle_walk_hamiltonian(num_nodes: usize) -> Result<HermitianOperator, HamiltonianError> {
    if num_nodes < 2 || !num_nodes.is_power_of_two() {
        return Err(HamiltonianError::NotPowerOfTwo(num_nodes));
    }
    let mut m = CMatrix::zeros(num_nodes, num_nodes);
    for i in 0..num_nodes {
        let j = (i + 1) % num_nodes;
        m[(i, j)] = Complex64::new(0.5, 0.0);
        m[(j, i)] = Complex64::new(0.5, 0.0);
    }
    HermitianOperator::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Entry `⟨row|σ|row ⊕ flips⟩`.
    fn entry(self, row_bit: bool) -> Complex64 {
        match (self, row_bit) {
            (Pauli::I | Pauli::X, _) => Complex64::new(1.0, 0.0),
            (Pauli::Y, false) => Complex64::new(0.0, -1.0),
            (Pauli::Y, true) => Complex64::new(0.0, 1.0),
            (Pauli::Z, false) => Complex64::new(1.0, 0.0),
            (Pauli::Z, true) => Complex64::new(-1.0, 0.0),
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

/// Tensor product of Paulis; character 0 acts on qubit `n − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(paulis: Vec<Pauli>) -> Result<Self, HamiltonianError> {
        if paulis.is_empty() {
            return Err(HamiltonianError::BadPauli(String::new()));
        }
        Ok(PauliString(paulis))
    }

    pub fn identity(num_qubits: usize) -> Self {
        PauliString(vec![Pauli::I; num_qubits])
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    /// Operator on qubit `q`.
    pub fn on(&self, q: usize) -> Pauli {
        self.0[self.0.len() - 1 - q]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Mask of qubits acted on by X or Y.
    fn flip_mask(&self) -> usize {
        (0..self.num_qubits()).filter(|&q| self.on(q).flips()).map(|q| 1 << q).sum()
    }

    /// `⟨row|σ|row ⊕ flip_mask⟩`; every other entry of the row is zero.
    fn row_entry(&self, row: usize) -> Complex64 {
        (0..self.num_qubits()).map(|q| self.on(q).entry(row >> q & 1 == 1)).product()
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.num_qubits();
        let mask = self.flip_mask();
        let mut m = CMatrix::zeros(dim, dim);
        for row in 0..dim {
            m[(row, row ^ mask)] = self.row_entry(row);
        }
        m
    }

    /// Two strings commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let clashes = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|&(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        clashes % 2 == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl FromStr for PauliString {
    type Err = HamiltonianError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let paulis: Option<Vec<Pauli>> = s.trim().chars().map(Pauli::from_symbol).collect();
        paulis.filter(|p| !p.is_empty()).map(PauliString).ok_or_else(|| HamiltonianError::BadPauli(s.into()))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub string: PauliString,
    pub coefficient: f64,
}

impl PauliTerm {
    pub fn new(string: &str, coefficient: f64) -> Result<Self, HamiltonianError> {
        Ok(PauliTerm { string: string.parse()?, coefficient })
    }
}

/// `H = Σ αₛ σₛ` with distinct strings of a common length.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
}

#[derive(Serialize, Deserialize)]
struct RawDecomposition {
    num_qubits: usize,
    terms: Vec<(PauliString, f64)>,
}

impl PauliDecomposition {
    pub fn new(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self, HamiltonianError> {
        let mut seen = std::collections::BTreeSet::new();
        for t in &terms {
            if t.string.num_qubits() != num_qubits {
                return Err(HamiltonianError::LengthMismatch(t.string.num_qubits(), num_qubits));
            }
            if !t.coefficient.is_finite() {
                return Err(HamiltonianError::InvalidArgument(format!("coefficient of {} is not finite", t.string)));
            }
            if !seen.insert(t.string.clone()) {
                return Err(HamiltonianError::Duplicate(t.string.to_string()));
            }
        }
        Ok(PauliDecomposition { num_qubits, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn coefficient(&self, string: &str) -> f64 {
        let Ok(s) = string.parse::<PauliString>() else { return 0.0 };
        self.terms.iter().find(|t| t.string == s).map_or(0.0, |t| t.coefficient)
    }

    /// `Σ αₛ σₛ` as a dense matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.num_qubits;
        self.terms
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, t| acc + t.string.matrix() * Complex64::new(t.coefficient, 0.0))
    }

    pub fn to_operator(&self) -> HermitianOperator {
        HermitianOperator::new(self.to_matrix()).expect("real combination of Paulis is Hermitian")
    }

    /// True when every pair of terms commutes.
    pub fn all_commute(&self) -> bool {
        self.terms
            .iter()
            .enumerate()
            .all(|(i, a)| self.terms[i + 1..].iter().all(|b| a.string.commutes_with(&b.string)))
    }

    /// Terms sorted lexicographically by string.
    pub fn sorted_terms(&self) -> Vec<PauliTerm> {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|a| a.string.to_string());
        terms
    }

    pub fn to_json(&self) -> String {
        let raw = RawDecomposition {
            num_qubits: self.num_qubits,
            terms: self.terms.iter().map(|t| (t.string.clone(), t.coefficient)).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("decomposition serializes")
    }

    pub fn from_json(src: &str) -> Result<Self, HamiltonianError> {
        let raw: RawDecomposition = serde_json::from_str(src)?;
        let terms = raw.terms.into_iter().map(|(string, coefficient)| PauliTerm { string, coefficient }).collect();
        Self::new(raw.num_qubits, terms)
    }
}

impl Serialize for PauliDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawDecomposition {
            num_qubits: self.num_qubits,
            terms: self.terms.iter().map(|t| (t.string.clone(), t.coefficient)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawDecomposition::deserialize(d)?;
        let terms = raw.terms.into_iter().map(|(string, coefficient)| PauliTerm { string, coefficient }).collect();
        Self::new(raw.num_qubits, terms).map_err(serde::de::Error::custom)
    }
}

fn all_strings(n: usize) -> impl Iterator<Item = PauliString> {
    (0..1usize << (2 * n)).map(move |code| {
        PauliString((0..n).rev().map(|k| Pauli::ALL[code >> (2 * k) & 3]).collect())
    })
}

/// `αₛ = tr(σₛ H) / 2^n` over all `4^n` strings, in lexicographic order,
/// dropping `|αₛ| < 1e-12`.
pub fn pauli_decompose(h: &HermitianOperator) -> PauliDecomposition {
    let dim = h.dim();
    let m = h.matrix();
    let terms = all_strings(h.num_qubits())
        .filter_map(|s| {
            let mask = s.flip_mask();
            let trace: Complex64 = (0..dim).map(|r| s.row_entry(r) * m[(r ^ mask, r)]).sum();
            let alpha = trace.re / dim as f64;
            (alpha.abs() >= COEFFICIENT_TOL).then_some(PauliTerm { string: s, coefficient: alpha })
        })
        .collect();
    PauliDecomposition { num_qubits: h.num_qubits(), terms }
}

/// Product-formula repetition count: 1 if all terms commute, otherwise
/// `ceil((‖H‖·t)² / eps)`.
///
/// The ceiling ignores a relative excess of 1e-9 so that round-off in the
/// quotient does not add a repetition.
pub fn trotter_reps(terms: &PauliDecomposition, t: f64, eps: f64) -> Result<usize, HamiltonianError> {
    if !(t > 0.0) || !(eps > 0.0) || !t.is_finite() || !eps.is_finite() {
        return Err(HamiltonianError::InvalidArgument(format!("need t > 0 and eps > 0, got t = {t}, eps = {eps}")));
    }
    if terms.all_commute() {
        return Ok(1);
    }
    let norm = terms.to_operator().spectral_norm();
    let x = (norm * t).powi(2) / eps;
    Ok(((x - 1e-9 * x.max(1.0)).ceil() as usize).max(1))
}

/// Exact circuit for `exp(−i·theta·σ)` on `σ.num_qubits()` qubits, ignoring
/// the term's coefficient. Identity strings give an empty circuit.
pub fn exp_pauli_circuit(string: &PauliString, theta: f64) -> Circuit {
    let n = string.num_qubits();
    let mut c = Circuit::new(n, 0);
    let support: Vec<usize> = (0..n).filter(|&q| string.on(q) != Pauli::I).collect();
    let Some((&last, rest)) = support.split_last() else { return c };

    let mut basis = Vec::new();
    for &q in &support {
        match string.on(q) {
            Pauli::X => basis.push(Gate::h(q)),
            Pauli::Y => {
                basis.push(Gate::sdg(q));
                basis.push(Gate::h(q));
            }
            _ => {}
        }
    }
    let ladder: Vec<Gate> = rest.iter().map(|&q| Gate::cx(q, last)).collect();

    for g in basis.iter().chain(&ladder) {
        c.add(g.clone());
    }
    c.add(Gate::rz(2.0 * theta, last));
    for g in ladder.iter().rev().chain(basis.iter().rev()) {
        c.add(g.inverse().expect("unitary"));
    }
    c
}

/// First-order product formula: the lexicographically ordered sequence of
/// `exp(−i·αₛ·t/r·σₛ)`, repeated `r` times.
pub fn trotter_circuit(terms: &PauliDecomposition, t: f64, r: usize) -> Result<Circuit, HamiltonianError> {
    if r == 0 {
        return Err(HamiltonianError::InvalidArgument("r must be at least 1".into()));
    }
    let mut step = Circuit::new(terms.num_qubits(), 0);
    for term in terms.sorted_terms() {
        step.append(&exp_pauli_circuit(&term.string, term.coefficient * t / r as f64)).expect("same width");
    }
    let mut c = Circuit::new(terms.num_qubits(), 0);
    for _ in 0..r {
        c.append(&step).expect("same width");
    }
    Ok(c)
}

/// `exp(−iHt)` through the eigendecomposition of `H`.
pub fn exact_evolution(h: &HermitianOperator, t: f64) -> CMatrix {
    let (values, vectors) = h.eigen();
    let phases = DVector::from_iterator(values.len(), values.iter().map(|&e| Complex64::from_polar(1.0, -e * t)));
    &vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint()
}

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CircuitError;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Gate kinds understood by the simulators and the router.
///
/// `Unitary` is an opaque matrix gate (used by the exact continuous-time walk)
/// and carries its matrix alongside the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    #[serde(rename = "p")]
    Phase,
    Cx,
    Cz,
    #[serde(rename = "cp")]
    CPhase,
    Swap,
    Ccx,
    Mcx,
    Unitary,
    Measure,
    Reset,
}

impl GateKind {
    pub const ALL: [GateKind; 21] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Phase,
        GateKind::Cx,
        GateKind::Cz,
        GateKind::CPhase,
        GateKind::Swap,
        GateKind::Ccx,
        GateKind::Mcx,
        GateKind::Unitary,
        GateKind::Measure,
        GateKind::Reset,
    ];

    /// Lower-case mnemonic, shared by the circuit text format and the noise tables.
    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Phase => "p",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::CPhase => "cp",
            GateKind::Swap => "swap",
            GateKind::Ccx => "ccx",
            GateKind::Mcx => "mcx",
            GateKind::Unitary => "unitary",
            GateKind::Measure => "measure",
            GateKind::Reset => "reset",
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Phase | GateKind::CPhase
        )
    }

    /// Fixed operand count, `None` for variable-width kinds (`Mcx`, `Unitary`).
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::CPhase | GateKind::Swap => Some(2),
            GateKind::Ccx => Some(3),
            GateKind::Mcx | GateKind::Unitary => None,
            _ => Some(1),
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Reset)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let alias = match lower.as_str() {
            "cnot" => "cx",
            "phase" | "u1" => "p",
            "cphase" | "cu1" => "cp",
            "toffoli" => "ccx",
            other => other,
        };
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == alias)
            .ok_or_else(|| CircuitError::UnknownGate(s.to_string()))
    }
}

/// A single circuit instruction.
///
/// Multi-qubit matrices use local little-endian ordering: operand `j` is bit
/// `j` of the local basis index. For `Cx`/`CPhase`/`Ccx`/`Mcx` the controls come
/// first and the target is the last operand.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: Vec<usize>,
    angle: Option<f64>,
    clbit: Option<usize>,
    matrix: Option<Arc<CMatrix>>,
}

impl Gate {
    /// Builds a gate and checks its shape (operand count, distinct operands,
    /// angle presence). Width checks happen when the gate joins a circuit.
    pub fn new(kind: GateKind, qubits: Vec<usize>, angle: Option<f64>) -> Result<Self, CircuitError> {
        if kind == GateKind::Unitary {
            return Err(CircuitError::InvalidGate(
                "opaque unitaries must be built with Gate::unitary".into(),
            ));
        }
        if kind == GateKind::Measure {
            return Err(CircuitError::InvalidGate(
                "measurements must be built with Gate::measure".into(),
            ));
        }
        let gate = Gate { kind, qubits, angle, clbit: None, matrix: None };
        gate.check_shape()?;
        Ok(gate)
    }

    fn check_shape(&self) -> Result<(), CircuitError> {
        match self.kind.arity() {
            Some(n) if self.qubits.len() != n => {
                return Err(CircuitError::InvalidGate(format!(
                    "{} takes {} operand(s), got {}",
                    self.kind,
                    n,
                    self.qubits.len()
                )))
            }
            None if self.kind == GateKind::Mcx && self.qubits.len() < 2 => {
                return Err(CircuitError::InvalidGate("mcx needs at least one control".into()))
            }
            None if self.qubits.is_empty() => {
                return Err(CircuitError::InvalidGate(format!("{} needs operands", self.kind)))
            }
            _ => {}
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(q) {
                return Err(CircuitError::InvalidGate(format!(
                    "{} has repeated operand {}",
                    self.kind, q
                )));
            }
        }
        match (self.kind.is_parameterized(), self.angle) {
            (true, None) => Err(CircuitError::InvalidGate(format!("{} needs an angle", self.kind))),
            (false, Some(_)) => {
                Err(CircuitError::InvalidGate(format!("{} takes no angle", self.kind)))
            }
            (true, Some(a)) if !a.is_finite() => {
                Err(CircuitError::InvalidGate(format!("{} angle is not finite", self.kind)))
            }
            _ => Ok(()),
        }
    }

    fn fixed(kind: GateKind, qubits: Vec<usize>) -> Self {
        Gate::new(kind, qubits, None).expect("fixed gate shape")
    }

    fn rotation(kind: GateKind, angle: f64, qubits: Vec<usize>) -> Self {
        Gate::new(kind, qubits, Some(angle)).expect("rotation gate shape")
    }

    pub fn x(q: usize) -> Self {
        Self::fixed(GateKind::X, vec![q])
    }
    pub fn y(q: usize) -> Self {
        Self::fixed(GateKind::Y, vec![q])
    }
    pub fn z(q: usize) -> Self {
        Self::fixed(GateKind::Z, vec![q])
    }
    pub fn h(q: usize) -> Self {
        Self::fixed(GateKind::H, vec![q])
    }
    pub fn s(q: usize) -> Self {
        Self::fixed(GateKind::S, vec![q])
    }
    pub fn sdg(q: usize) -> Self {
        Self::fixed(GateKind::Sdg, vec![q])
    }
    pub fn t(q: usize) -> Self {
        Self::fixed(GateKind::T, vec![q])
    }
    pub fn tdg(q: usize) -> Self {
        Self::fixed(GateKind::Tdg, vec![q])
    }
    pub fn rx(theta: f64, q: usize) -> Self {
        Self::rotation(GateKind::Rx, theta, vec![q])
    }
    pub fn ry(theta: f64, q: usize) -> Self {
        Self::rotation(GateKind::Ry, theta, vec![q])
    }
    pub fn rz(theta: f64, q: usize) -> Self {
        Self::rotation(GateKind::Rz, theta, vec![q])
    }
    pub fn phase(lambda: f64, q: usize) -> Self {
        Self::rotation(GateKind::Phase, lambda, vec![q])
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Self::fixed(GateKind::Cx, vec![control, target])
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Self::fixed(GateKind::Cz, vec![a, b])
    }
    pub fn cphase(lambda: f64, control: usize, target: usize) -> Self {
        Self::rotation(GateKind::CPhase, lambda, vec![control, target])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Self::fixed(GateKind::Swap, vec![a, b])
    }
    pub fn ccx(c0: usize, c1: usize, target: usize) -> Self {
        Self::fixed(GateKind::Ccx, vec![c0, c1, target])
    }
    pub fn reset(q: usize) -> Self {
        Self::fixed(GateKind::Reset, vec![q])
    }

    /// Multi-controlled X. One control collapses to `Cx`, two to `Ccx`.
    pub fn mcx(controls: &[usize], target: usize) -> Result<Self, CircuitError> {
        let mut qubits = controls.to_vec();
        qubits.push(target);
        let kind = match controls.len() {
            1 => GateKind::Cx,
            2 => GateKind::Ccx,
            _ => GateKind::Mcx,
        };
        Gate::new(kind, qubits, None)
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Gate {
            kind: GateKind::Measure,
            qubits: vec![qubit],
            angle: None,
            clbit: Some(clbit),
            matrix: None,
        }
    }

    /// Opaque unitary acting on `qubits` (operand 0 is the least significant
    /// bit of the matrix index).
    pub fn unitary(matrix: CMatrix, qubits: Vec<usize>) -> Result<Self, CircuitError> {
        let dim = 1usize << qubits.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(CircuitError::InvalidGate(format!(
                "unitary on {} qubit(s) needs a {dim}x{dim} matrix, got {}x{}",
                qubits.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = (&matrix * matrix.adjoint() - CMatrix::identity(dim, dim)).norm();
        if defect > 1e-8 {
            return Err(CircuitError::InvalidGate(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        let gate = Gate {
            kind: GateKind::Unitary,
            qubits,
            angle: None,
            clbit: None,
            matrix: Some(Arc::new(matrix)),
        };
        gate.check_shape()?;
        Ok(gate)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    pub fn clbit(&self) -> Option<usize> {
        self.clbit
    }

    /// Same gate with operands relabelled through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate { qubits: self.qubits.iter().map(|&q| map(q)).collect(), ..self.clone() }
    }

    /// Local unitary matrix, `None` for measurement and reset.
    pub fn matrix(&self) -> Option<CMatrix> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m2 = |a, b, cc, d| CMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
        let angle = self.angle.unwrap_or(0.0);
        let m = match self.kind {
            GateKind::X => m2(ZERO, ONE, ONE, ZERO),
            GateKind::Y => m2(ZERO, -I, I, ZERO),
            GateKind::Z => m2(ONE, ZERO, ZERO, -ONE),
            GateKind::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                m2(h, h, h, -h)
            }
            GateKind::S => m2(ONE, ZERO, ZERO, I),
            GateKind::Sdg => m2(ONE, ZERO, ZERO, -I),
            GateKind::T => m2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            GateKind::Tdg => {
                m2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4))
            }
            GateKind::Rx => {
                let (s, co) = (angle / 2.0).sin_cos();
                m2(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
            }
            GateKind::Ry => {
                let (s, co) = (angle / 2.0).sin_cos();
                m2(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
            }
            GateKind::Rz => m2(
                Complex64::from_polar(1.0, -angle / 2.0),
                ZERO,
                ZERO,
                Complex64::from_polar(1.0, angle / 2.0),
            ),
            GateKind::Phase => m2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, angle)),
            GateKind::Cz => diagonal(&[ONE, ONE, ONE, -ONE]),
            GateKind::CPhase => diagonal(&[ONE, ONE, ONE, Complex64::from_polar(1.0, angle)]),
            GateKind::Cx | GateKind::Ccx | GateKind::Mcx => {
                // Flip the top bit when every lower (control) bit is set.
                let k = self.qubits.len();
                let dim = 1usize << k;
                let controls = (1usize << (k - 1)) - 1;
                permutation(dim, |i| if i & controls == controls { i ^ (1 << (k - 1)) } else { i })
            }
            GateKind::Swap => permutation(4, |i| match i {
                1 => 2,
                2 => 1,
                other => other,
            }),
            GateKind::Unitary => return self.matrix.as_deref().cloned(),
            GateKind::Measure | GateKind::Reset => return None,
        };
        Some(m)
    }

    /// Inverse gate, `None` for non-unitary kinds.
    pub fn inverse(&self) -> Option<Gate> {
        let mut g = self.clone();
        g.kind = match self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Unitary => {
                g.matrix = self.matrix.as_ref().map(|m| Arc::new(m.adjoint()));
                GateKind::Unitary
            }
            GateKind::Measure | GateKind::Reset => return None,
            k => k,
        };
        g.angle = self.angle.map(|a| -a);
        Some(g)
    }
}

fn diagonal(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries))
}

fn permutation(dim: usize, image: impl Fn(usize) -> usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        m[(image(col), col)] = ONE;
    }
    m
}

impl fmt::Display for Gate {
    /// Renders in the circuit text grammar, e.g. `rz 0.5 2` or `measure 0 -> 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(a) = self.angle {
            write!(f, " {a:?}")?;
        }
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        if let Some(c) = self.clbit {
            write!(f, " -> {c}")?;
        }
        Ok(())
    }
}

//! Lowering of logical circuits onto a device coupling graph.
//!
//! [`expand_to_basis`] macro-expands `Ccx`/`Mcx` into one- and two-qubit gates,
//! [`route`] inserts `Swap` chains so every two-qubit gate acts on a coupled
//! pair, and [`transpile`] does both and finally lowers `Swap` into three `Cx`.

use thiserror::Error;

use crate::arch::ArchitectureSpec;
use crate::circuit::{Circuit, Gate, GateKind};

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("no path between physical qubits {0} and {1}")]
    Disconnected(usize, usize),
    #[error("cannot route {0}-qubit opaque unitary")]
    Unroutable(usize),
}

/// A routed circuit on physical qubits, with the logical→physical mapping
/// before and after execution.
#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    pub circuit: Circuit,
    pub initial_layout: Vec<usize>,
    pub final_layout: Vec<usize>,
}

/// Standard six-CX Toffoli over {H, T, Tdg, CX}.
pub fn toffoli_gates(a: usize, b: usize, t: usize) -> Vec<Gate> {
    vec![
        Gate::h(t),
        Gate::cx(b, t),
        Gate::tdg(t),
        Gate::cx(a, t),
        Gate::t(t),
        Gate::cx(b, t),
        Gate::tdg(t),
        Gate::cx(a, t),
        Gate::t(b),
        Gate::t(t),
        Gate::h(t),
        Gate::cx(a, b),
        Gate::t(a),
        Gate::tdg(b),
        Gate::cx(a, b),
    ]
}

/// Multi-controlled phase `diag(1, …, 1, e^{iλ})` over `qubits`, built from
/// parity phases: the product of m bits equals
/// `2^{1-m} Σ_{S≠∅} (-1)^{|S|-1} parity_S`, and each parity phase is a CX
/// ladder onto the highest qubit of S, a `Phase`, and the ladder undone.
pub fn multi_controlled_phase_gates(lambda: f64, qubits: &[usize]) -> Vec<Gate> {
    let m = qubits.len();
    let scale = lambda / f64::powi(2.0, m as i32 - 1);
    let mut gates = Vec::new();
    for subset in 1usize..(1 << m) {
        let members: Vec<usize> = (0..m).filter(|i| subset >> i & 1 == 1).map(|i| qubits[i]).collect();
        let sign = if members.len() % 2 == 1 { 1.0 } else { -1.0 };
        let (&last, rest) = members.split_last().expect("non-empty subset");
        gates.extend(rest.iter().map(|&q| Gate::cx(q, last)));
        gates.push(Gate::phase(sign * scale, last));
        gates.extend(rest.iter().rev().map(|&q| Gate::cx(q, last)));
    }
    gates
}

fn expand_gate(g: &Gate, out: &mut Vec<Gate>) {
    let q = g.qubits();
    match g.kind() {
        GateKind::Ccx => out.extend(toffoli_gates(q[0], q[1], q[2])),
        GateKind::Mcx => {
            let target = *q.last().expect("mcx has a target");
            out.push(Gate::h(target));
            out.extend(multi_controlled_phase_gates(std::f64::consts::PI, q));
            out.push(Gate::h(target));
        }
        _ => out.push(g.clone()),
    }
}

/// Replaces every `Ccx` and `Mcx` with one- and two-qubit gates.
pub fn expand_to_basis(c: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(c.len());
    for g in c.gates() {
        expand_gate(g, &mut gates);
    }
    let mut out = Circuit::new(c.num_qubits(), c.num_clbits()).with_label(c.label());
    out.extend(gates).expect("expansion keeps operands in range");
    out
}

fn check_layout(c: &Circuit, arch: &ArchitectureSpec, layout: &[usize]) -> Result<(), RouteError> {
    if layout.len() < c.num_qubits() {
        return Err(RouteError::Layout(format!(
            "layout maps {} logical qubits, circuit has {}",
            layout.len(),
            c.num_qubits()
        )));
    }
    let mut used = vec![false; arch.num_qubits];
    for (logical, &p) in layout.iter().enumerate() {
        if p >= arch.num_qubits {
            return Err(RouteError::Layout(format!(
                "logical {logical} -> physical {p}, device has {} qubits",
                arch.num_qubits
            )));
        }
        if std::mem::replace(&mut used[p], true) {
            return Err(RouteError::Layout(format!("physical qubit {p} assigned twice")));
        }
    }
    Ok(())
}

pub fn identity_layout(c: &Circuit) -> Vec<usize> {
    (0..c.num_qubits()).collect()
}

/// Maps `c` onto `arch` starting from `layout` (logical i → physical
/// `layout[i]`). Non-adjacent two-qubit gates move their first operand along
/// a shortest path with `Swap`s; the mapping is tracked, never swapped back.
pub fn route(c: &Circuit, arch: &ArchitectureSpec, layout: &[usize]) -> Result<Routed, RouteError> {
    check_layout(c, arch, layout)?;
    let c = expand_to_basis(c);
    let mut phys_of: Vec<usize> = layout[..c.num_qubits()].to_vec();
    let mut log_of: Vec<Option<usize>> = vec![None; arch.num_qubits];
    for (l, &p) in phys_of.iter().enumerate() {
        log_of[p] = Some(l);
    }

    let mut out = Circuit::new(arch.num_qubits, c.num_clbits()).with_label(c.label());
    for g in c.gates() {
        match g.qubits().len() {
            1 => {}
            2 => {
                let (pa, pb) = (phys_of[g.qubits()[0]], phys_of[g.qubits()[1]]);
                if !arch.are_adjacent(pa, pb) {
                    let path = arch.shortest_path(pa, pb).ok_or(RouteError::Disconnected(pa, pb))?;
                    for w in path[..path.len() - 1].windows(2) {
                        let (from, to) = (w[0], w[1]);
                        out.add(Gate::swap(from, to));
                        log_of.swap(from, to);
                        for p in [from, to] {
                            if let Some(l) = log_of[p] {
                                phys_of[l] = p;
                            }
                        }
                    }
                }
            }
            n => return Err(RouteError::Unroutable(n)),
        }
        out.add(g.remapped(|l| phys_of[l]));
    }
    Ok(Routed { circuit: out, initial_layout: layout[..c.num_qubits()].to_vec(), final_layout: phys_of })
}

/// Basis expansion, routing, and `Swap` → three `Cx`. The result only holds
/// one-qubit gates, `Cx`/`Cz`/`CPhase`, opaque unitaries of width ≤ 2,
/// measurements and resets, all on coupled pairs.
pub fn transpile(c: &Circuit, arch: &ArchitectureSpec, layout: Option<&[usize]>) -> Result<Routed, RouteError> {
    if layout.is_none() && c.num_qubits() > arch.num_qubits {
        return Err(RouteError::Layout(format!(
            "circuit needs {} qubits, {} has {}",
            c.num_qubits(),
            arch.name,
            arch.num_qubits
        )));
    }
    let default = identity_layout(c);
    let mut routed = route(c, arch, layout.unwrap_or(&default))?;
    let mut lowered = Circuit::new(routed.circuit.num_qubits(), routed.circuit.num_clbits())
        .with_label(routed.circuit.label());
    for g in routed.circuit.gates() {
        if g.kind() == GateKind::Swap {
            let (a, b) = (g.qubits()[0], g.qubits()[1]);
            lowered.add(Gate::cx(a, b));
            lowered.add(Gate::cx(b, a));
            lowered.add(Gate::cx(a, b));
        } else {
            lowered.add(g.clone());
        }
    }
    routed.circuit = lowered;
    Ok(routed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::measure_distribution;
    use crate::circuit::CMatrix;

    fn unitary_of(c: &Circuit) -> CMatrix {
        crate::sim::circuit_unitary(c).unwrap()
    }

    fn assert_same_unitary(a: &Circuit, b: &Circuit) {
        let err = (unitary_of(a) - unitary_of(b)).norm();
        assert!(err < 1e-10, "unitaries differ by {err}");
    }

    #[test]
    fn toffoli_expansion_is_exact() {
        let mut direct = Circuit::new(3, 0);
        direct.add(Gate::ccx(0, 1, 2));
        let expanded = expand_to_basis(&direct);
        assert!(expanded.gates().iter().all(|g| g.qubits().len() <= 2));
        assert_eq!(expanded.gates().iter().filter(|g| g.kind() == GateKind::Cx).count(), 6);
        assert_same_unitary(&direct, &expanded);
    }

    #[test]
    fn mcx_expansion_is_exact() {
        for controls in [vec![0, 1, 2], vec![3, 1, 0, 2]] {
            let width = controls.len() + 1;
            let target = (0..width).find(|q| !controls.contains(q)).unwrap();
            let mut direct = Circuit::new(width, 0);
            direct.add(Gate::mcx(&controls, target).unwrap());
            let expanded = expand_to_basis(&direct);
            assert!(expanded.gates().iter().all(|g| g.qubits().len() <= 2));
            assert_same_unitary(&direct, &expanded);
        }
    }

    #[test]
    fn adjacent_gate_is_unchanged() {
        let lin = ArchitectureSpec::linear(5);
        let mut c = Circuit::new(2, 0);
        c.add(Gate::cx(0, 1));
        let r = route(&c, &lin, &[0, 1]).unwrap();
        assert_eq!(r.circuit.gates(), c.gates());
        assert_eq!(r.final_layout, vec![0, 1]);
    }

    #[test]
    fn distant_gate_gets_one_swap() {
        let lin = ArchitectureSpec::linear(3);
        let mut c = Circuit::new(3, 3);
        c.add(Gate::h(0));
        c.add(Gate::cx(0, 2));
        let r = route(&c, &lin, &[0, 1, 2]).unwrap();
        assert_eq!(r.circuit.gates(), &[Gate::h(0), Gate::swap(0, 1), Gate::cx(1, 2)]);
        assert_eq!(r.final_layout, vec![1, 0, 2]);

        // semantics: measure every logical qubit in both versions
        let mut measured = c.clone();
        measured.measure_first(3).unwrap();
        let routed = route(&measured, &lin, &[0, 1, 2]).unwrap();
        let a = measure_distribution(&measured).unwrap();
        let b = measure_distribution(&routed.circuit).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn complete_graph_needs_no_routing() {
        let full = ArchitectureSpec::complete(4);
        let mut c = Circuit::new(4, 0);
        for (a, b) in [(0, 3), (2, 1), (3, 1), (0, 2)] {
            c.add(Gate::cx(a, b));
            c.add(Gate::rz(0.3, b));
        }
        let r = route(&c, &full, &[0, 1, 2, 3]).unwrap();
        assert_eq!(r.circuit.gates(), c.gates());
    }

    #[test]
    fn layout_errors() {
        let lin = ArchitectureSpec::linear(3);
        let c = Circuit::new(2, 0);
        assert!(matches!(route(&c, &lin, &[0]), Err(RouteError::Layout(_))));
        assert!(matches!(route(&c, &lin, &[0, 3]), Err(RouteError::Layout(_))));
        assert!(matches!(route(&c, &lin, &[1, 1]), Err(RouteError::Layout(_))));
        let wide = Circuit::new(4, 0);
        assert!(transpile(&wide, &lin, None).is_err());
    }

    #[test]
    fn transpile_lowers_swaps() {
        let lin = ArchitectureSpec::linear(4);
        let mut c = Circuit::new(4, 2);
        c.add(Gate::h(0));
        c.add(Gate::ry(0.4, 3));
        c.add(Gate::ccx(0, 3, 1));
        c.add(Gate::measure(1, 0));
        c.add(Gate::measure(3, 1));
        let t = transpile(&c, &lin, None).unwrap();
        for g in t.circuit.gates() {
            assert_ne!(g.kind(), GateKind::Swap);
            if g.qubits().len() == 2 {
                assert!(lin.are_adjacent(g.qubits()[0], g.qubits()[1]));
            }
        }
        let a = measure_distribution(&c).unwrap();
        let b = measure_distribution(&t.circuit).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }
}

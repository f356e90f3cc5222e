use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qbench_core::arch::NoiseParameters;
use qbench_core::metrics::{compute_benchmarks, hellinger, ReportMeta};
use qbench_core::runner::execute;
use qbench_core::sim::channels::{depolarizing, thermal_relaxation};
use qbench_core::sim::DensityMatrix;
use qbench_core::{
    builtin_machine, circuit_stats, measure_distribution, run_ideal, run_noisy, sample, transpile, AlgorithmConfig,
    ArchitectureSpec, Circuit, ExperimentSpec, Gate, GateKind,
};

fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
    let triple = Just(()).prop_perturb(move |_, mut rng| {
        let mut ops: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            ops.swap(i, rng.random_range(0..=i));
        }
        ops.truncate(3);
        ops
    });
    let angle = -PI..PI;
    prop_oneof![
        (q.clone(), 0..8u8).prop_map(|(q, k)| match k {
            0 => Gate::x(q),
            1 => Gate::y(q),
            2 => Gate::z(q),
            3 => Gate::h(q),
            4 => Gate::s(q),
            5 => Gate::sdg(q),
            6 => Gate::t(q),
            _ => Gate::tdg(q),
        }),
        (q, angle.clone(), 0..4u8).prop_map(|(q, th, k)| match k {
            0 => Gate::rx(th, q),
            1 => Gate::ry(th, q),
            2 => Gate::rz(th, q),
            _ => Gate::phase(th, q),
        }),
        (pair, angle, 0..4u8).prop_map(|((a, b), th, k)| match k {
            0 => Gate::cx(a, b),
            1 => Gate::cz(a, b),
            2 => Gate::cphase(th, a, b),
            _ => Gate::swap(a, b),
        }),
        triple.prop_map(|ops| Gate::ccx(ops[0], ops[1], ops[2])),
    ]
}

fn arb_circuit(n: usize) -> impl Strategy<Value = Circuit> {
    proptest::collection::vec(arb_gate(n), 0..20).prop_map(move |gates| {
        let mut c = Circuit::new(n, n);
        for g in gates {
            c.push(g).unwrap();
        }
        for q in 0..n {
            c.push(Gate::measure(q, q)).unwrap();
        }
        c
    })
}

fn connected_architectures() -> Vec<ArchitectureSpec> {
    vec![
        ArchitectureSpec::linear(4),
        ArchitectureSpec::new("ring", 4, [(0, 1), (1, 2), (2, 3), (3, 0)], NoiseParameters::default()).unwrap(),
        ArchitectureSpec::new("star", 5, [(2, 0), (2, 1), (2, 3), (2, 4)], NoiseParameters::default()).unwrap(),
        builtin_machine("bogota").unwrap(),
        builtin_machine("casablanca").unwrap(),
    ]
}

fn rescaled(c: &Circuit, factor: f64) -> Circuit {
    let mut out = Circuit::new(c.num_qubits(), c.num_clbits());
    for g in c.gates() {
        let g = match g.angle() {
            Some(th) => Gate::new(g.kind(), g.qubits().to_vec(), Some(th * factor + 0.1)).unwrap(),
            None => g.clone(),
        };
        out.push(g).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn routing_preserves_distribution(circuit in (3usize..=4).prop_flat_map(arb_circuit), arch_idx in 0usize..5) {
        let arch = &connected_architectures()[arch_idx];
        let routed = transpile(&circuit, arch, None).unwrap();
        for g in routed.circuit.gates() {
            if g.qubits().len() == 2 {
                prop_assert!(arch.are_adjacent(g.qubits()[0], g.qubits()[1]), "{g:?} not on an edge");
            }
        }
        let want = measure_distribution(&circuit).unwrap();
        let got = measure_distribution(&routed.circuit).unwrap();
        prop_assert!(want.max_abs_diff(&got) <= 1e-9);
    }

    #[test]
    fn stats_ignore_angles(circuit in arb_circuit(4), factor in -3.0..3.0f64) {
        prop_assert_eq!(circuit_stats(&circuit), circuit_stats(&circuit));
        prop_assert_eq!(circuit_stats(&circuit), circuit_stats(&rescaled(&circuit, factor)));
    }

    #[test]
    fn statevector_norm_after_every_gate(circuit in arb_circuit(3)) {
        let unitary = circuit.without_measurements();
        let mut prefix = Circuit::new(3, 0);
        for g in unitary.gates() {
            prefix.push(g.clone()).unwrap();
            let sv = run_ideal(&prefix).unwrap();
            prop_assert!((sv.norm_sqr() - 1.0).abs() <= 1e-12);
        }
        let total = measure_distribution(&circuit).unwrap().total();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn gate_matrices_are_unitary(g in arb_gate(3)) {
        let m = g.matrix().unwrap();
        let defect = (&m * m.adjoint() - DMatrix::<Complex64>::identity(m.nrows(), m.nrows()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        prop_assert!(defect <= 1e-12, "{:?}: {defect}", g.kind());
    }

    #[test]
    fn trace_preserved_after_every_channel(
        circuit in arb_circuit(3),
        p in 0.0..0.3f64,
        t1 in 5.0..100.0f64,
        ratio in 0.1..2.0f64,
        duration in 0.0..5.0f64,
    ) {
        let relax = thermal_relaxation(t1, t1 * ratio, duration).unwrap();
        let dep1 = depolarizing(p, 1).unwrap();
        let mut rho = DensityMatrix::zero(3);
        for g in circuit.without_measurements().gates() {
            rho.apply_gate(g);
            prop_assert!((rho.trace().re - 1.0).abs() <= 1e-9);
            if g.qubits().len() <= 2 {
                rho.apply_depolarizing(p, g.qubits());
            } else {
                rho.apply_channel(&dep1, &g.qubits()[..1]);
            }
            prop_assert!((rho.trace().re - 1.0).abs() <= 1e-9);
            for &q in g.qubits() {
                rho.apply_channel(&relax, &[q]);
                prop_assert!((rho.trace().re - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn pipeline_reports_satisfy_triangle(
        circuit in arb_circuit(3),
        p1 in 0.0..0.05f64,
        p2 in 0.0..0.2f64,
        spam in 0.0..0.1f64,
        drift in 0.0..0.2f64,
        shots in 100u64..5000,
        seed: u64,
    ) {
        let base = ArchitectureSpec::linear(3);
        let noise = NoiseParameters::uniform(3, &base.edge_list(), p1, p2, spam, spam, Some((50.0, 70.0)));
        let arch = base.with_noise(noise);
        let drifted = NoiseParameters::uniform(3, &arch.edge_list(), p1 * (1.0 + drift), p2 * (1.0 + drift), spam, spam, Some((40.0, 60.0)));
        let device_arch = arch.clone().with_noise(drifted);
        let routed = transpile(&circuit, &arch, None).unwrap();
        let ideal = measure_distribution(&routed.circuit).unwrap();
        let noisy = run_noisy(&circuit, &arch, None).unwrap();
        let device = sample(&run_noisy(&circuit, &device_arch, None).unwrap(), shots, seed).unwrap().to_distribution();
        let meta = ReportMeta { machine: "line".into(), algorithm: "random".into(), shots, device_source: "test".into() };
        let report = compute_benchmarks(&device, &noisy, &ideal, meta).unwrap();
        prop_assert!(report.satisfies_triangle(1e-9));
        for v in [report.alpha, report.beta, report.gamma] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert_eq!(report.gamma, hellinger(&noisy, &ideal).unwrap());
    }
}

#[test]
fn routed_circuits_only_use_basis_gates() {
    let arch = builtin_machine("santiago").unwrap();
    let circuit = AlgorithmConfig::QsNoAncilla { qubits: 4, marked: 10, iterations: 3 }.build().unwrap();
    let routed = transpile(&circuit, &arch, None).unwrap();
    assert!(routed.circuit.gates().iter().all(|g| !matches!(g.kind(), GateKind::Ccx | GateKind::Mcx | GateKind::Swap)));
}

#[test]
fn stand_in_converges_as_drift_vanishes() {
    let mut betas = Vec::new();
    for sigma in [0.4, 0.1, 0.01, 0.0] {
        let mut spec = ExperimentSpec::new(AlgorithmConfig::Qpe { counting_qubits: 3, phase: 1.0 / 3.0 }, "santiago");
        spec.drift_sigma = sigma;
        spec.exact_device = true;
        spec.seed = 5;
        betas.push(execute(&spec).unwrap().report.beta);
    }
    assert!(betas.windows(2).all(|w| w[1] <= w[0]), "{betas:?}");
    assert_eq!(betas[3], 0.0);
}

#[test]
fn identical_specs_give_identical_records() {
    let mut spec = ExperimentSpec::new(AlgorithmConfig::Dtqw { position_qubits: 2, steps: 2 }, "casablanca");
    spec.shots = 3000;
    spec.seed = 99;
    let (a, b) = (execute(&spec).unwrap(), execute(&spec).unwrap());
    assert_eq!(a.distributions, b.distributions);
    assert_eq!(a.report, b.report);
}

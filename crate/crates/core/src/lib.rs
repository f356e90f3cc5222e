//! Benchmarking quantum devices against ideal and noise-model simulations.

pub mod algorithms;
pub mod arch;
pub mod circuit;
pub mod distribution;
pub mod hamiltonian;
pub mod metrics;
pub mod routing;
pub mod runner;
pub mod sim;

pub use arch::{builtin_machine, ArchError, ArchitectureSpec, Edge, NoiseParameters, BUILTIN_MACHINES};
pub use circuit::{circuit_stats, parse_circuit, CMatrix, Circuit, CircuitError, CircuitStats, Gate, GateKind};
pub use distribution::{sample, Counts, DistributionError, OutcomeDistribution};
pub use routing::{transpile, RouteError, Routed};
pub use sim::{measure_distribution, run_ideal, run_noisy, DensityMatrix, NoisyConfig, SimError, StateVector};
pub use hamiltonian::{
    cycle_walk_hamiltonian, exact_evolution, exp_pauli_circuit, pauli_decompose, trotter_circuit, trotter_reps,
    HamiltonianError, HermitianOperator, PauliDecomposition, PauliString, PauliTerm,
};
pub use algorithms::{theoretical_success, AlgorithmConfig, AlgorithmError};
pub use metrics::{
    compute_benchmarks, counts_to_distribution, hellinger, BenchmarkReport, Confidence, Estimation, MetricsError,
    ReportMeta,
};
pub use runner::{
    builtin_preset, execute, ingest_counts, run_experiment, run_suite, ExperimentSpec, RunError, RunRecord,
    SuiteOptions, SuitePreset, SuiteResult,
};

//! Ideal statevector and noisy density-matrix simulators.

pub mod channels;
mod ideal;
mod kernel;
mod noisy;

pub use channels::{depolarizing, thermal_relaxation, KrausChannel};
pub use ideal::{
    circuit_unitary, UNITARY_CAP,
    measure_distribution, measure_distribution_capped, run_ideal, run_ideal_capped, StateVector,
    DEFAULT_STATEVECTOR_CAP,
};
pub use noisy::{apply_readout_flip, run_noisy, run_noisy_with, DensityMatrix, NoisyConfig, DEFAULT_DENSITY_CAP};

use thiserror::Error;

use crate::arch::ArchError;
use crate::distribution::DistributionError;
use crate::routing::RouteError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("circuit width {width} exceeds simulator cap {cap}")]
    WidthCap { width: usize, cap: usize },
    #[error("mid-circuit measurement: {0}")]
    MidCircuitMeasurement(String),
    #[error("circuit has no measurements")]
    NoMeasurements,
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

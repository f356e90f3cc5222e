//! Shared fixtures for the criterion benches.

use qbench_core::{builtin_preset, AlgorithmConfig, OutcomeDistribution};

/// The six preset workloads, in preset order.
pub fn workloads() -> Vec<AlgorithmConfig> {
    builtin_preset("table3").expect("shipped preset").algorithms
}

/// A dense pseudo-random distribution over `2^width` outcomes.
pub fn spread_distribution(width: usize, salt: u64) -> OutcomeDistribution {
    let weights: Vec<f64> = (0..1u64 << width)
        .map(|i| {
            let x = (i ^ salt).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
            1.0 + x as f64
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let dense: Vec<f64> = weights.iter().map(|w| w / total).collect();
    OutcomeDistribution::from_dense(width, &dense).expect("normalized")
}

//! Hellinger distance and the device/noisy/ideal benchmark triple.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{Counts, OutcomeDistribution};

/// Inputs whose total deviates from 1 by more than this are rejected.
pub const HELLINGER_NORMALIZATION_TOL: f64 = 1e-6;
/// `|α − γ|` below this is reported as [`Estimation::Exact`].
pub const ESTIMATION_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("{which} distribution sums to {total}, expected 1")]
    NotNormalized { which: &'static str, total: f64 },
    #[error("classical widths differ: device {device}, noisy {noisy}, ideal {ideal}")]
    WidthMismatch { device: usize, noisy: usize, ideal: usize },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

fn check_normalized(d: &OutcomeDistribution, which: &'static str) -> Result<(), MetricsError> {
    let total = d.total();
    if (total - 1.0).abs() > HELLINGER_NORMALIZATION_TOL {
        return Err(MetricsError::NotNormalized { which, total });
    }
    Ok(())
}

/// `h(P, Q) = (1/√2)·√(Σ (√pᵢ − √qᵢ)²)` over the union of both supports.
pub fn hellinger(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<f64, MetricsError> {
    check_normalized(p, "first")?;
    check_normalized(q, "second")?;
    Ok(hellinger_unchecked(p, q))
}

fn hellinger_unchecked(p: &OutcomeDistribution, q: &OutcomeDistribution) -> f64 {
    let mut a = p.iter().peekable();
    let mut b = q.iter().peekable();
    let mut sum = 0.0;
    loop {
        let (pi, qi) = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(&(la, pa)), Some(&(lb, pb))) if la == lb => {
                a.next();
                b.next();
                (pa, pb)
            }
            (Some(&(la, pa)), Some(&(lb, _))) if la < lb => {
                a.next();
                (pa, 0.0)
            }
            (Some(&(_, pa)), None) => {
                a.next();
                (pa, 0.0)
            }
            (_, Some(&(_, pb))) => {
                b.next();
                (0.0, pb)
            }
        };
        let d = pi.sqrt() - qi.sqrt();
        sum += d * d;
    }
    (sum / 2.0).sqrt().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimation {
    /// `α < γ`: the calibrated model is noisier than the device.
    Overestimate,
    /// `α > γ`: the device is noisier than the calibrated model.
    Underestimate,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    High,
    Low,
}

impl fmt::Display for Estimation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimation::Overestimate => "overestimate",
            Estimation::Underestimate => "underestimate",
            Estimation::Exact => "exact",
        })
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::High => "high",
            Confidence::Low => "low",
        })
    }
}

/// Labels attached to a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub machine: String,
    pub algorithm: String,
    pub shots: u64,
    /// Where the device distribution came from, e.g. an ingested file or
    /// `"synthetic stand-in"`.
    pub device_source: String,
}

/// α (device vs ideal), β (device vs noisy model), γ (noisy model vs ideal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub machine: String,
    pub algorithm: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub abs_gap: f64,
    pub estimation: Estimation,
    pub confidence: Confidence,
    pub shots: u64,
    pub device_source: String,
}

impl BenchmarkReport {
    /// Derives the gap, estimation direction and confidence from given
    /// distances.
    pub fn from_distances(alpha: f64, beta: f64, gamma: f64, meta: ReportMeta) -> Self {
        let abs_gap = (alpha - gamma).abs();
        let estimation = if abs_gap < ESTIMATION_TIE_TOL {
            Estimation::Exact
        } else if alpha > gamma {
            Estimation::Underestimate
        } else {
            Estimation::Overestimate
        };
        let confidence = if beta >= abs_gap { Confidence::High } else { Confidence::Low };
        BenchmarkReport {
            machine: meta.machine,
            algorithm: meta.algorithm,
            alpha,
            beta,
            gamma,
            abs_gap,
            estimation,
            confidence,
            shots: meta.shots,
            device_source: meta.device_source,
        }
    }

    /// `α ≤ β + γ + tol`.
    pub fn satisfies_triangle(&self, tol: f64) -> bool {
        self.alpha <= self.beta + self.gamma + tol
    }

    pub const CSV_HEADER: [&'static str; 10] = [
        "machine",
        "alpha",
        "beta",
        "gamma",
        "abs_gap",
        "estimation",
        "confidence",
        "algorithm",
        "shots",
        "device_source",
    ];

    pub fn csv_record(&self) -> [String; 10] {
        [
            self.machine.clone(),
            format!("{:.6}", self.alpha),
            format!("{:.6}", self.beta),
            format!("{:.6}", self.gamma),
            format!("{:.6}", self.abs_gap),
            self.estimation.to_string(),
            self.confidence.to_string(),
            self.algorithm.clone(),
            self.shots.to_string(),
            self.device_source.clone(),
        ]
    }
}

/// Writes a header and one row per report.
pub fn write_reports_csv<'a>(
    out: impl Write,
    reports: impl IntoIterator<Item = &'a BenchmarkReport>,
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BenchmarkReport::CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Computes α, β, γ from the three distributions of one experiment.
pub fn compute_benchmarks(
    device: &OutcomeDistribution,
    noisy: &OutcomeDistribution,
    ideal: &OutcomeDistribution,
    meta: ReportMeta,
) -> Result<BenchmarkReport, MetricsError> {
    let widths = (device.num_clbits(), noisy.num_clbits(), ideal.num_clbits());
    if widths.0 != widths.1 || widths.0 != widths.2 {
        return Err(MetricsError::WidthMismatch { device: widths.0, noisy: widths.1, ideal: widths.2 });
    }
    check_normalized(device, "device")?;
    check_normalized(noisy, "noisy")?;
    check_normalized(ideal, "ideal")?;
    let alpha = hellinger_unchecked(device, ideal);
    let beta = hellinger_unchecked(device, noisy);
    let gamma = hellinger_unchecked(noisy, ideal);
    Ok(BenchmarkReport::from_distances(alpha, beta, gamma, meta))
}

/// Relative frequencies `count / shots`.
pub fn counts_to_distribution(c: &Counts) -> OutcomeDistribution {
    c.to_distribution()
}

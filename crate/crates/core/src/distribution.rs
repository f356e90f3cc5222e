//! Measured-outcome distributions and shot counts.
//!
//! Outcome labels are integers whose bit `k` is classical bit `k`. In text
//! they are written most-significant first, so classical bit 0 is the
//! rightmost character: with two bits, `"01"` is outcome 1.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the total probability of a distribution.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DistributionError {
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("negative probability {value} for outcome {label}")]
    Negative { label: String, value: f64 },
    #[error("malformed outcome label `{0}`")]
    MalformedLabel(String),
    #[error("label `{label}` has width {found}, expected {expected}")]
    LabelWidth { label: String, found: usize, expected: usize },
    #[error("negative count {count} for outcome {label}")]
    NegativeCount { label: String, count: i64 },
    #[error("shots mismatch: header says {shots}, counts sum to {sum}")]
    ShotsMismatch { shots: u64, sum: u64 },
    #[error("zero shots")]
    ZeroShots,
    #[error("too many classical bits ({0})")]
    TooWide(usize),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed counts file: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn format_label(label: u64, width: usize) -> String {
    (0..width).rev().map(|b| if label >> b & 1 == 1 { '1' } else { '0' }).collect()
}

/// Parses a bit string, returning the outcome and its width.
pub fn parse_label(s: &str) -> Result<(u64, usize), DistributionError> {
    if s.is_empty() || s.len() > 63 || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(DistributionError::MalformedLabel(s.to_string()));
    }
    let value = u64::from_str_radix(s, 2).map_err(|_| DistributionError::MalformedLabel(s.to_string()))?;
    Ok((value, s.len()))
}

/// Normalised map from outcome to probability. Zero-probability outcomes are
/// not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    num_clbits: usize,
    probs: BTreeMap<u64, f64>,
}

impl OutcomeDistribution {
    pub fn new(num_clbits: usize, probs: BTreeMap<u64, f64>) -> Result<Self, DistributionError> {
        if num_clbits > 63 {
            return Err(DistributionError::TooWide(num_clbits));
        }
        let mut total = 0.0;
        for (&label, &p) in &probs {
            if label >> num_clbits != 0 {
                return Err(DistributionError::LabelWidth {
                    label: label.to_string(),
                    found: 64 - label.leading_zeros() as usize,
                    expected: num_clbits,
                });
            }
            if p < 0.0 || !p.is_finite() {
                return Err(DistributionError::Negative { label: format_label(label, num_clbits), value: p });
            }
            total += p;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DistributionError::NotNormalized(total));
        }
        let probs = probs.into_iter().filter(|&(_, p)| p > 0.0).collect();
        Ok(OutcomeDistribution { num_clbits, probs })
    }

    /// From a dense table indexed by outcome. Round-off negatives down to
    /// -1e-12 are clamped to zero.
    pub fn from_dense(num_clbits: usize, dense: &[f64]) -> Result<Self, DistributionError> {
        let probs = dense
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as u64, if p < 0.0 && p > -1e-12 { 0.0 } else { p }))
            .collect();
        Self::new(num_clbits, probs)
    }

    /// All mass on one outcome.
    pub fn point(num_clbits: usize, label: u64) -> Self {
        OutcomeDistribution { num_clbits, probs: BTreeMap::from([(label, 1.0)]) }
    }

    /// Parses `{"01": 0.5, "11": 0.5}`-style string keys.
    pub fn from_labels<'a>(entries: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self, DistributionError> {
        let mut width = None;
        let mut probs = BTreeMap::new();
        for (s, p) in entries {
            let (label, w) = parse_label(s)?;
            match width {
                None => width = Some(w),
                Some(expected) if expected != w => {
                    return Err(DistributionError::LabelWidth { label: s.into(), found: w, expected })
                }
                _ => {}
            }
            *probs.entry(label).or_insert(0.0) += p;
        }
        Self::new(width.unwrap_or(0), probs)
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn prob(&self, label: u64) -> f64 {
        self.probs.get(&label).copied().unwrap_or(0.0)
    }

    /// Outcomes with nonzero probability, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&l, &p)| (l, p))
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn label(&self, outcome: u64) -> String {
        format_label(outcome, self.num_clbits)
    }

    /// Largest pointwise probability difference over the union of supports.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|&l| (self.prob(l) - other.prob(l)).abs())
            .fold(0.0, f64::max)
    }

    /// Maps every outcome through `f` (summing collisions), e.g. to apply a
    /// final qubit permutation to bit labels.
    pub fn relabel(&self, num_clbits: usize, f: impl Fn(u64) -> u64) -> Result<Self, DistributionError> {
        let mut probs = BTreeMap::new();
        for (l, p) in self.iter() {
            *probs.entry(f(l)).or_insert(0.0) += p;
        }
        Self::new(num_clbits, probs)
    }
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    num_clbits: usize,
    probs: BTreeMap<String, f64>,
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawDistribution {
            num_clbits: self.num_clbits,
            probs: self.iter().map(|(l, p)| (self.label(l), p)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OutcomeDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawDistribution::deserialize(d)?;
        let mut probs = BTreeMap::new();
        for (s, p) in raw.probs {
            let (l, w) = parse_label(&s).map_err(D::Error::custom)?;
            if w != raw.num_clbits {
                return Err(D::Error::custom(format!("label `{s}` does not have width {}", raw.num_clbits)));
            }
            probs.insert(l, p);
        }
        OutcomeDistribution::new(raw.num_clbits, probs).map_err(D::Error::custom)
    }
}

/// Integer shot counts plus optional provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts {
    num_clbits: usize,
    counts: BTreeMap<u64, u64>,
    shots: u64,
    pub machine: Option<String>,
    pub timestamp: Option<String>,
}

/// On-disk counts format, shared by simulated and hardware runs:
///
/// ```json
/// { "shots": 4, "counts": { "00": 1, "11": 3 }, "machine": "bogota", "timestamp": "2021-03-02T10:00:00Z" }
/// ```
#[derive(Serialize, Deserialize)]
struct CountsFile {
    shots: u64,
    counts: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    machine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
}

impl Counts {
    pub fn new(num_clbits: usize, counts: BTreeMap<u64, u64>, shots: u64) -> Result<Self, DistributionError> {
        if shots == 0 {
            return Err(DistributionError::ZeroShots);
        }
        let sum: u64 = counts.values().sum();
        if sum != shots {
            return Err(DistributionError::ShotsMismatch { shots, sum });
        }
        if let Some((&l, _)) = counts.iter().find(|(&l, _)| l >> num_clbits != 0) {
            return Err(DistributionError::LabelWidth {
                label: l.to_string(),
                found: 64 - l.leading_zeros() as usize,
                expected: num_clbits,
            });
        }
        let counts = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        Ok(Counts { num_clbits, counts, shots, machine: None, timestamp: None })
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, label: u64) -> u64 {
        self.counts.get(&label).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&l, &c)| (l, c))
    }

    /// Empirical frequencies.
    pub fn to_distribution(&self) -> OutcomeDistribution {
        let shots = self.shots as f64;
        let probs: BTreeMap<u64, f64> = self.iter().map(|(l, c)| (l, c as f64 / shots)).collect();
        OutcomeDistribution::new(self.num_clbits, probs).expect("counts normalise")
    }

    pub fn from_json(src: &str) -> Result<Self, DistributionError> {
        let file: CountsFile = serde_json::from_str(src)?;
        let mut width = None;
        let mut counts = BTreeMap::new();
        for (s, c) in &file.counts {
            let (label, w) = parse_label(s)?;
            match width {
                None => width = Some(w),
                Some(expected) if expected != w => {
                    return Err(DistributionError::LabelWidth { label: s.clone(), found: w, expected })
                }
                _ => {}
            }
            if *c < 0 {
                return Err(DistributionError::NegativeCount { label: s.clone(), count: *c });
            }
            *counts.entry(label).or_insert(0) += *c as u64;
        }
        let mut out = Counts::new(width.unwrap_or(0), counts, file.shots)?;
        out.machine = file.machine;
        out.timestamp = file.timestamp;
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DistributionError> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)
            .map_err(|source| DistributionError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&src)
    }

    pub fn to_json(&self) -> String {
        let file = CountsFile {
            shots: self.shots,
            counts: self.iter().map(|(l, c)| (format_label(l, self.num_clbits), c as i64)).collect(),
            machine: self.machine.clone(),
            timestamp: self.timestamp.clone(),
        };
        serde_json::to_string_pretty(&file).expect("counts serialize")
    }
}

/// Multinomial draw of `shots` outcomes from `dist`.
///
/// Uses ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64(seed)`) and draws
/// outcomes by sequential conditional binomials in ascending label order, so
/// a given `(dist, shots, seed)` always yields the same counts. Other
/// implementations should only expect agreement in distribution.
pub fn sample(dist: &OutcomeDistribution, shots: u64, seed: u64) -> Result<Counts, DistributionError> {
    if shots == 0 {
        return Err(DistributionError::ZeroShots);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut remaining = shots;
    let mut mass = dist.total();
    let mut counts = BTreeMap::new();
    let entries: Vec<(u64, f64)> = dist.iter().collect();
    for (i, &(label, p)) in entries.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let k = if i + 1 == entries.len() {
            remaining
        } else {
            let ratio = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
            Binomial::new(remaining, ratio).expect("valid binomial").sample(&mut rng)
        };
        if k > 0 {
            counts.insert(label, k);
        }
        remaining -= k;
        mass -= p;
    }
    Counts::new(dist.num_clbits(), counts, shots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_put_bit_zero_on_the_right() {
        assert_eq!(format_label(1, 2), "01");
        assert_eq!(format_label(10, 4), "1010");
        assert_eq!(parse_label("01").unwrap(), (1, 2));
        assert!(parse_label("0x1").is_err());
        assert!(parse_label("").is_err());
    }

    #[test]
    fn rejects_unnormalised() {
        let r = OutcomeDistribution::from_labels([("0", 0.5), ("1", 0.4)]);
        assert!(matches!(r, Err(DistributionError::NotNormalized(_))));
        let r = OutcomeDistribution::from_labels([("0", 1.5), ("1", -0.5)]);
        assert!(matches!(r, Err(DistributionError::Negative { .. })));
        let r = OutcomeDistribution::from_labels([("0", 0.5), ("11", 0.5)]);
        assert!(matches!(r, Err(DistributionError::LabelWidth { .. })));
    }

    #[test]
    fn point_distribution_samples_exactly() {
        let d = OutcomeDistribution::from_labels([("01", 1.0)]).unwrap();
        let c = sample(&d, 100, 3).unwrap();
        assert_eq!(c.get(1), 100);
        assert_eq!(c.shots(), 100);
    }

    #[test]
    fn fair_coin_concentrates() {
        let d = OutcomeDistribution::from_labels([("0", 0.5), ("1", 0.5)]).unwrap();
        let sigma = (100_000.0f64 * 0.25).sqrt();
        for seed in [0, 1, 42, 1234, u64::MAX] {
            let c = sample(&d, 100_000, seed).unwrap();
            assert!((c.get(0) as f64 - 50_000.0).abs() < 5.0 * sigma, "seed {seed}: {}", c.get(0));
            assert_eq!(c.get(0) + c.get(1), 100_000);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = OutcomeDistribution::from_labels([("00", 0.1), ("01", 0.2), ("10", 0.3), ("11", 0.4)]).unwrap();
        assert_eq!(sample(&d, 5000, 9).unwrap(), sample(&d, 5000, 9).unwrap());
        assert_ne!(sample(&d, 5000, 9).unwrap(), sample(&d, 5000, 10).unwrap());
        assert!(sample(&d, 0, 9).is_err());
    }

    #[test]
    fn counts_file_validation() {
        let c = Counts::from_json(r#"{"shots": 4, "counts": {"00": 1, "11": 3}}"#).unwrap();
        assert_eq!(c.shots(), 4);
        assert_eq!(c.get(3), 3);
        let d = c.to_distribution();
        assert_eq!(d.prob(0), 0.25);
        assert_eq!(d.prob(3), 0.75);

        let e = Counts::from_json(r#"{"shots": 5, "counts": {"00": 1, "11": 3}}"#).unwrap_err();
        assert!(e.to_string().contains("shots mismatch"), "{e}");
        let e = Counts::from_json(r#"{"shots": 2, "counts": {"00": 3, "11": -1}}"#).unwrap_err();
        assert!(matches!(e, DistributionError::NegativeCount { .. }));
        let e = Counts::from_json(r#"{"shots": 2, "counts": {"0a": 2}}"#).unwrap_err();
        assert!(matches!(e, DistributionError::MalformedLabel(_)));
        let e = Counts::from_json(r#"{"shots": 2, "counts": {"0": 1, "11": 1}}"#).unwrap_err();
        assert!(matches!(e, DistributionError::LabelWidth { .. }));
    }

    #[test]
    fn distribution_serde_round_trip() {
        let d = OutcomeDistribution::from_labels([("010", 0.25), ("111", 0.75)]).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<OutcomeDistribution>(&json).unwrap(), d);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn counts_file_round_trips(raw in proptest::collection::btree_map(0u64..16, 1u64..1_000_000, 1..16)) {
                let shots = raw.values().sum();
                let mut c = Counts::new(4, raw, shots).unwrap();
                c.machine = Some("dev".into());
                prop_assert_eq!(Counts::from_json(&c.to_json()).unwrap(), c);
            }

            #[test]
            fn samples_sum_to_shots(weights in proptest::collection::vec(0.0..1.0f64, 1..12), shots in 1u64..50_000, seed: u64) {
                let total: f64 = weights.iter().sum();
                prop_assume!(total > 0.0);
                let dense: Vec<f64> = weights.iter().map(|w| w / total).collect();
                let mut padded = dense.clone();
                padded.resize(16, 0.0);
                let d = OutcomeDistribution::from_dense(4, &padded).unwrap();
                let c = sample(&d, shots, seed).unwrap();
                prop_assert_eq!(c.iter().map(|(_, k)| k).sum::<u64>(), shots);
                for (l, _) in c.iter() {
                    prop_assert!(d.prob(l) > 0.0);
                }
            }
        }
    }
}

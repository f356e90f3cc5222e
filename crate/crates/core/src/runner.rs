//! End-to-end experiments: build, simulate, compare, and write artifacts.
//!
//! One experiment runs six stages:
//! 1. build the logical circuit from its [`AlgorithmConfig`];
//! 2. load the architecture (a shipped machine name or a JSON file) and an
//!    optional calibration snapshot;
//! 3. obtain the device distribution, either from an ingested counts file or
//!    from the synthetic stand-in device described below;
//! 4. simulate the calibrated noise model exactly;
//! 5. compute the ideal distribution on the same transpiled circuit;
//! 6. compute α, β, γ.
//!
//! The stand-in device multiplies every calibrated parameter by an independent
//! log-normal factor `exp(σ·z)` (default `σ = 0.2`) to mimic drift between the
//! published calibration and the live machine, simulates that perturbed model
//! exactly and draws `shots` samples from it. Its outputs are labelled
//! [`SYNTHETIC_SOURCE`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{AlgorithmConfig, AlgorithmError};
use crate::arch::{builtin_machine, ArchError, ArchitectureSpec, BUILTIN_MACHINES};
use crate::circuit::{circuit_stats, CircuitStats};
use crate::distribution::{format_label, sample, Counts, DistributionError, OutcomeDistribution};
use crate::metrics::{compute_benchmarks, write_reports_csv, BenchmarkReport, MetricsError, ReportMeta};
use crate::routing::{transpile, RouteError};
use crate::sim::{measure_distribution, run_noisy_with, NoisyConfig, SimError};

pub const DEFAULT_SHOTS: u64 = 100_000;
pub const DEFAULT_DRIFT_SIGMA: f64 = 0.2;
/// Device-source label for the simulated stand-in device.
pub const SYNTHETIC_SOURCE: &str = "synthetic stand-in";
/// Widest register for which plot tables list every basis state.
pub const DENSE_PLOT_WIDTH: usize = 12;

const TABLE3: &str = include_str!("../data/presets/table3.json");

/// Names accepted by [`builtin_preset`].
pub const BUILTIN_PRESETS: [&str; 1] = ["table3"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Invalid(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed {what} {path}: {source}")]
    Json { what: &'static str, path: String, source: serde_json::Error },
    #[error("unknown preset `{0}` (available: table3)")]
    UnknownPreset(String),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl RunError {
    /// True when a simulator width cap was hit.
    pub fn is_capacity(&self) -> bool {
        matches!(self, RunError::Sim(SimError::WidthCap { .. }))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), RunError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

fn default_sigma() -> f64 {
    DEFAULT_DRIFT_SIGMA
}

fn default_charge() -> f64 {
    1.0
}

/// Experiment file contents. Relative paths are resolved against the file's
/// directory by [`ExperimentSpec::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub algorithm: AlgorithmConfig,
    /// Shipped machine name (`bogota`, `santiago`, `casablanca`, `noiseless`)
    /// or path to an architecture JSON file.
    #[serde(alias = "machine_file")]
    pub machine: String,
    /// Optional calibration snapshot CSV applied on top of the machine file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<PathBuf>,
    /// Measured counts to use as the device distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_counts: Option<PathBuf>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    /// Physical qubit for each logical qubit; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Log-normal σ of the stand-in device's parameter drift.
    #[serde(default = "default_sigma")]
    pub drift_sigma: f64,
    /// Use the stand-in device's exact distribution instead of sampling.
    #[serde(default)]
    pub exact_device: bool,
    /// Multiplier on the depolarizing charge of opaque unitaries.
    #[serde(default = "default_charge")]
    pub unitary_charge: f64,
}

impl ExperimentSpec {
    pub fn new(algorithm: AlgorithmConfig, machine: impl Into<String>) -> Self {
        ExperimentSpec {
            name: None,
            algorithm,
            machine: machine.into(),
            calibration: None,
            device_counts: None,
            shots: DEFAULT_SHOTS,
            seed: 0,
            layout: None,
            output_dir: None,
            drift_sigma: DEFAULT_DRIFT_SIGMA,
            exact_device: false,
            unitary_charge: 1.0,
        }
    }

    pub fn from_json(src: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(src)
    }

    /// Reads an experiment file and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RunError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(io_err(path))?;
        let mut spec = Self::from_json(&src).map_err(|source| RunError::Json {
            what: "experiment file",
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if !is_builtin(&spec.machine) {
            spec.machine = base.join(&spec.machine).display().to_string();
        }
        spec.calibration.iter_mut().for_each(resolve);
        spec.device_counts.iter_mut().for_each(resolve);
        spec.output_dir.iter_mut().for_each(resolve);
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.shots == 0 {
            return Err(RunError::Invalid("shots must be positive".into()));
        }
        if !(self.drift_sigma >= 0.0) || !self.drift_sigma.is_finite() {
            return Err(RunError::Invalid(format!("drift_sigma {} must be finite and ≥ 0", self.drift_sigma)));
        }
        if !(self.unitary_charge >= 0.0) || !self.unitary_charge.is_finite() {
            return Err(RunError::Invalid(format!("unitary_charge {} must be finite and ≥ 0", self.unitary_charge)));
        }
        self.algorithm.validate()?;
        Ok(())
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.algorithm.name().to_string())
    }

    /// Machine file (or shipped machine) with the calibration snapshot applied.
    pub fn load_architecture(&self) -> Result<ArchitectureSpec, RunError> {
        let arch = if is_builtin(&self.machine) && !Path::new(&self.machine).exists() {
            builtin_machine(&self.machine)?
        } else {
            ArchitectureSpec::load(&self.machine)?
        };
        match &self.calibration {
            Some(path) => {
                let file = fs::File::open(path).map_err(io_err(path))?;
                Ok(arch.apply_calibration(file)?)
            }
            None => Ok(arch),
        }
    }
}

fn is_builtin(machine: &str) -> bool {
    BUILTIN_MACHINES.iter().any(|m| m.eq_ignore_ascii_case(machine))
}

/// Counts from a device export; see [`Counts`] for the file format.
pub fn ingest_counts(path: impl AsRef<Path>) -> Result<Counts, RunError> {
    Ok(Counts::load(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distributions {
    pub device: OutcomeDistribution,
    pub noisy: OutcomeDistribution,
    pub ideal: OutcomeDistribution,
}

/// Provenance of the device distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceInfo {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: ExperimentSpec,
    pub machine: String,
    pub logical_stats: CircuitStats,
    pub transpiled_stats: CircuitStats,
    pub final_layout: Vec<usize>,
    pub device: DeviceInfo,
    pub distributions: Distributions,
    pub report: BenchmarkReport,
    /// Seconds per stage; informational.
    pub wall_times: BTreeMap<String, f64>,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RunError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&src).map_err(|source| RunError::Json {
            what: "run record",
            path: path.display().to_string(),
            source,
        })
    }
}

/// Seed for the sampling stream, kept apart from the drift stream.
fn sampling_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909)
}

/// Calibration perturbed by independent `exp(σ·z)` factors, `z ~ N(0, 1)`.
pub fn drifted_architecture(arch: &ArchitectureSpec, sigma: f64, seed: u64) -> Result<ArchitectureSpec, RunError> {
    let dist = LogNormal::new(0.0, sigma).map_err(|e| RunError::Invalid(format!("drift sigma {sigma}: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let noise = arch.noise.scaled(|| dist.sample(&mut rng));
    let mut out = arch.clone().with_noise(noise);
    out.name = format!("{} (drifted)", arch.name);
    Ok(out)
}

/// Runs all six stages without touching the filesystem except to read inputs.
pub fn execute(spec: &ExperimentSpec) -> Result<RunRecord, RunError> {
    spec.validate()?;
    let mut times = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, times: &mut BTreeMap<String, f64>| {
        times.insert(name.to_string(), clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };

    let circuit = spec.algorithm.build()?;
    lap("build", &mut times);

    let arch = spec.load_architecture()?;
    let layout = spec.layout.as_deref();
    let routed = transpile(&circuit, &arch, layout)?;
    lap("transpile", &mut times);

    let config = NoisyConfig { unitary_charge: spec.unitary_charge, ..NoisyConfig::default() };
    let (device_dist, device) = match &spec.device_counts {
        Some(path) => {
            let counts = ingest_counts(path)?;
            if counts.num_clbits() != circuit.num_clbits() {
                return Err(RunError::Invalid(format!(
                    "device counts have {} classical bits, circuit measures {}",
                    counts.num_clbits(),
                    circuit.num_clbits()
                )));
            }
            let info = DeviceInfo {
                source: format!("ingested {}", path.display()),
                machine: counts.machine.clone(),
                timestamp: counts.timestamp.clone(),
                shots: counts.shots(),
            };
            (counts.to_distribution(), info)
        }
        None => {
            let drifted = drifted_architecture(&arch, spec.drift_sigma, spec.seed)?;
            let exact = run_noisy_with(&circuit, &drifted, layout, &config)?;
            let source = if spec.exact_device { format!("{SYNTHETIC_SOURCE} (exact)") } else { SYNTHETIC_SOURCE.into() };
            let info = DeviceInfo { source, machine: Some(drifted.name.clone()), timestamp: None, shots: spec.shots };
            if spec.exact_device {
                (exact, info)
            } else {
                (sample(&exact, spec.shots, sampling_seed(spec.seed))?.to_distribution(), info)
            }
        }
    };
    lap("device", &mut times);

    let noisy = run_noisy_with(&circuit, &arch, layout, &config)?;
    lap("noisy", &mut times);

    let ideal = measure_distribution(&routed.circuit)?;
    lap("ideal", &mut times);

    let meta = ReportMeta {
        machine: arch.name.clone(),
        algorithm: spec.label(),
        shots: device.shots,
        device_source: device.source.clone(),
    };
    let report = compute_benchmarks(&device_dist, &noisy, &ideal, meta)?;
    lap("metrics", &mut times);

    Ok(RunRecord {
        spec: spec.clone(),
        machine: arch.name.clone(),
        logical_stats: circuit_stats(&circuit),
        transpiled_stats: circuit_stats(&routed.circuit),
        final_layout: routed.final_layout,
        device,
        distributions: Distributions { device: device_dist, noisy, ideal },
        report,
        wall_times: times,
    })
}

/// [`execute`], then [`write_artifacts`] when the spec names an output
/// directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunRecord, RunError> {
    let record = execute(spec)?;
    if let Some(dir) = &spec.output_dir {
        write_artifacts(&record, dir)?;
    }
    Ok(record)
}

/// Writes `record.json`, `report.json` and the plot tables into `dir`.
pub fn write_artifacts(record: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let record_path = dir.join("record.json");
    write_file(&record_path, record.to_json())?;
    written.push(record_path);
    let report_path = dir.join("report.json");
    write_file(&report_path, serde_json::to_string_pretty(&record.report).expect("report serializes"))?;
    written.push(report_path);
    written.extend(emit_plot_data(record, dir)?);
    Ok(written)
}

/// States listed in plot tables: every basis state for narrow registers,
/// otherwise the union of supports.
fn plot_states(d: &Distributions) -> Vec<u64> {
    let width = d.ideal.num_clbits();
    if width <= DENSE_PLOT_WIDTH {
        (0..1u64 << width).collect()
    } else {
        let mut s: Vec<u64> = d.device.iter().chain(d.noisy.iter()).chain(d.ideal.iter()).map(|(l, _)| l).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Writes the comparison tables:
/// `device_vs_ideal.csv`, `device_vs_noisy.csv`, `noisy_vs_ideal.csv`
/// (columns `state,bits,p_<a>,p_<b>`), `distributions.csv`
/// (`state,bits,p_device,p_noisy,p_ideal`) and `benchmarks.csv`.
pub fn emit_plot_data(record: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let d = &record.distributions;
    let width = d.ideal.num_clbits();
    let states = plot_states(d);
    let columns: [(&str, &OutcomeDistribution); 3] = [("device", &d.device), ("noisy", &d.noisy), ("ideal", &d.ideal)];

    let table = |name: &str, picks: &[usize]| -> Result<PathBuf, RunError> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| RunError::Invalid(format!("{}: {e}", path.display())))?;
        let mut header = vec!["state".to_string(), "bits".to_string()];
        header.extend(picks.iter().map(|&i| format!("p_{}", columns[i].0)));
        let row_err = |e: csv::Error| RunError::Invalid(format!("{}: {e}", path.display()));
        w.write_record(&header).map_err(row_err)?;
        for &s in &states {
            let mut row = vec![s.to_string(), format_label(s, width)];
            row.extend(picks.iter().map(|&i| columns[i].1.prob(s).to_string()));
            w.write_record(&row).map_err(row_err)?;
        }
        w.flush().map_err(io_err(&path))?;
        Ok(path)
    };

    let mut written = vec![
        table("device_vs_ideal.csv", &[0, 2])?,
        table("device_vs_noisy.csv", &[0, 1])?,
        table("noisy_vs_ideal.csv", &[1, 2])?,
        table("distributions.csv", &[0, 1, 2])?,
    ];
    let summary = dir.join("benchmarks.csv");
    let file = fs::File::create(&summary).map_err(io_err(&summary))?;
    write_reports_csv(file, [&record.report])?;
    written.push(summary);
    Ok(written)
}

/// Reloads `record.json` from a run directory and rewrites its tables.
pub fn rerender(run_dir: &Path) -> Result<RunRecord, RunError> {
    let record = RunRecord::load(run_dir.join("record.json"))?;
    emit_plot_data(&record, run_dir)?;
    Ok(record)
}

/// Fixed-width text table of reports.
pub fn render_table(reports: &[BenchmarkReport]) -> String {
    let mut out = format!(
        "{:<22} {:<6} {:>7} {:>7} {:>7} {:>7}  {:<13} {:<10}\n",
        "machine", "alg", "alpha", "beta", "gamma", "|a-g|", "estimation", "confidence"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<22} {:<6} {:>7.4} {:>7.4} {:>7.4} {:>7.4}  {:<13} {:<10}\n",
            r.machine, r.algorithm, r.alpha, r.beta, r.gamma, r.abs_gap, r.estimation, r.confidence
        ));
    }
    out
}

/// A named batch of experiments: every algorithm on every machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitePreset {
    pub name: String,
    pub machines: Vec<String>,
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sigma")]
    pub drift_sigma: f64,
}

pub fn builtin_preset(name: &str) -> Result<SuitePreset, RunError> {
    let src = match name {
        "table3" => TABLE3,
        _ => return Err(RunError::UnknownPreset(name.to_string())),
    };
    serde_json::from_str(src).map_err(|source| RunError::Json { what: "preset", path: name.into(), source })
}

/// Overrides applied to every experiment of a suite.
#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub machines: Option<Vec<String>>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub drift_sigma: Option<f64>,
    pub exact_device: bool,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub machine: String,
    pub algorithm: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub preset: String,
    pub records: Vec<RunRecord>,
    pub skipped: Vec<Skipped>,
}

impl SuiteResult {
    pub fn reports(&self) -> Vec<BenchmarkReport> {
        self.records.iter().map(|r| r.report.clone()).collect()
    }
}

/// Runs every (machine, algorithm) pair of a preset in parallel. Pairs whose
/// circuit needs more qubits than the machine has are skipped. Experiment
/// `i` uses seed `seed + i`.
pub fn run_suite(preset: &SuitePreset, options: &SuiteOptions) -> Result<SuiteResult, RunError> {
    let machines = options.machines.clone().unwrap_or_else(|| preset.machines.clone());
    let seed = options.seed.unwrap_or(preset.seed);
    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    for machine in &machines {
        let probe = ExperimentSpec::new(preset.algorithms[0].clone(), machine.clone()).load_architecture()?;
        for alg in &preset.algorithms {
            let need = alg.expected_workspace();
            if need > probe.num_qubits {
                skipped.push(Skipped {
                    machine: probe.name.clone(),
                    algorithm: alg.name().to_string(),
                    reason: format!("needs {need} qubits, machine has {}", probe.num_qubits),
                });
                continue;
            }
            let mut spec = ExperimentSpec::new(alg.clone(), machine.clone());
            spec.shots = options.shots.unwrap_or(preset.shots);
            spec.seed = seed.wrapping_add(jobs.len() as u64);
            spec.drift_sigma = options.drift_sigma.unwrap_or(preset.drift_sigma);
            spec.exact_device = options.exact_device;
            spec.output_dir = options.output_dir.as_ref().map(|d| d.join(dir_name(&probe.name)).join(alg.name()));
            jobs.push(spec);
        }
    }
    let records = jobs.par_iter().map(run_experiment).collect::<Result<Vec<_>, _>>()?;
    let result = SuiteResult { preset: preset.name.clone(), records, skipped };
    if let Some(dir) = &options.output_dir {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let summary = dir.join("benchmarks.csv");
        let file = fs::File::create(&summary).map_err(io_err(&summary))?;
        write_reports_csv(file, result.records.iter().map(|r| &r.report))?;
        let skipped_path = dir.join("skipped.json");
        write_file(&skipped_path, serde_json::to_string_pretty(&result.skipped).expect("serializes"))?;
    }
    Ok(result)
}

fn dir_name(machine: &str) -> String {
    machine.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

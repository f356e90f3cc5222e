use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qbench_core::metrics::write_reports_csv;
use qbench_core::runner::{render_table, rerender, RunRecord};
use qbench_core::{
    builtin_preset, circuit_stats, cycle_walk_hamiltonian, parse_circuit, pauli_decompose, run_experiment, run_suite,
    transpile, trotter_circuit, trotter_reps, ArchitectureSpec, ExperimentSpec, HermitianOperator,
    PauliDecomposition, RunError, SimError, SuiteOptions, SuitePreset,
};
use serde_json::json;

/// Benchmark quantum machines against noisy and ideal simulations.
#[derive(Parser)]
#[command(name = "qbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment file and write its artifacts.
    Run(RunArgs),
    /// Run every algorithm of a preset on every machine.
    Suite(SuiteArgs),
    /// Pauli-decompose a Hamiltonian and build its product-formula circuit.
    Decompose(DecomposeArgs),
    /// Gate count, workspace and depth of a circuit file.
    Stats(StatsArgs),
    /// Re-render tables and plot data from a run or suite directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment JSON file.
    experiment: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    /// Shipped machine name or architecture file, replacing the experiment's.
    #[arg(long)]
    machine: Option<String>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Measured device counts (JSON) to use instead of the stand-in device.
    #[arg(long)]
    counts: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Shipped preset name (`table3`) or preset JSON file.
    preset: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    /// Restrict to these machines (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    machine: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log-normal σ of the stand-in device's parameter drift.
    #[arg(long)]
    drift_sigma: Option<f64>,
    /// Use exact stand-in distributions instead of sampling.
    #[arg(long)]
    exact_device: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Hamiltonian JSON: `{"matrix": [[...]]}` or a Pauli decomposition.
    #[arg(conflicts_with = "cycle", required_unless_present = "cycle")]
    file: Option<PathBuf>,
    /// Use the walk Hamiltonian of the N-node cycle.
    #[arg(long, value_name = "N")]
    cycle: Option<usize>,
    #[arg(long)]
    time: f64,
    /// Error budget for choosing the repetition count (default 0.01).
    #[arg(long, conflicts_with = "reps")]
    eps: Option<f64>,
    /// Explicit repetition count.
    #[arg(long)]
    reps: Option<usize>,
    /// Write the circuit in text form to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    circuit: PathBuf,
    /// Also report statistics after routing onto this machine.
    #[arg(long)]
    machine: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    run_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_capacity(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn is_capacity(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<RunError>().is_some_and(RunError::is_capacity)
            || matches!(e.downcast_ref::<SimError>(), Some(SimError::WidthCap { .. }))
    })
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut spec = ExperimentSpec::load(&a.experiment)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(shots) = a.shots {
        spec.shots = shots;
    }
    if let Some(machine) = a.machine {
        spec.machine = machine;
    }
    if let Some(out) = a.out {
        spec.output_dir = Some(out);
    }
    if let Some(counts) = a.counts {
        spec.device_counts = Some(counts);
    }
    let record = run_experiment(&spec)?;
    print!("{}", render_table(std::slice::from_ref(&record.report)));
    println!(
        "workspace {} -> {} qubits, {} -> {} gates, device: {}",
        record.logical_stats.workspace,
        record.transpiled_stats.workspace,
        record.logical_stats.gate_count,
        record.transpiled_stats.gate_count,
        record.device.source
    );
    if let Some(dir) = &spec.output_dir {
        println!("artifacts written to {}", dir.display());
    }
    Ok(())
}

fn load_preset(name: &str) -> Result<SuitePreset> {
    let path = Path::new(name);
    if path.is_file() {
        let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return serde_json::from_str(&src).with_context(|| format!("malformed preset {}", path.display()));
    }
    Ok(builtin_preset(name)?)
}

fn cmd_suite(a: SuiteArgs) -> Result<()> {
    let preset = load_preset(&a.preset)?;
    let options = SuiteOptions {
        machines: (!a.machine.is_empty()).then_some(a.machine),
        shots: a.shots,
        seed: a.seed,
        drift_sigma: a.drift_sigma,
        exact_device: a.exact_device,
        output_dir: a.out.clone(),
    };
    let result = run_suite(&preset, &options)?;
    print!("{}", render_table(&result.reports()));
    for s in &result.skipped {
        println!("skipped {} on {}: {}", s.algorithm, s.machine, s.reason);
    }
    if let Some(dir) = &a.out {
        println!("artifacts written to {}", dir.display());
    }
    Ok(())
}

fn load_hamiltonian(path: &Path) -> Result<PauliDecomposition> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&src).with_context(|| format!("malformed JSON in {}", path.display()))?;
    if value.get("terms").is_some() {
        Ok(PauliDecomposition::from_json(&src)?)
    } else {
        Ok(pauli_decompose(&HermitianOperator::from_json(&src)?))
    }
}

fn cmd_decompose(a: DecomposeArgs) -> Result<()> {
    let terms = match (&a.file, a.cycle) {
        (Some(path), _) => load_hamiltonian(path)?,
        (None, Some(n)) => pauli_decompose(&cycle_walk_hamiltonian(n)?),
        (None, None) => bail!("give a Hamiltonian file or --cycle N"),
    };
    if !(a.time >= 0.0) || !a.time.is_finite() {
        bail!("--time must be finite and non-negative");
    }
    let reps = match a.reps {
        Some(0) => bail!("--reps must be at least 1"),
        Some(r) => r,
        None if a.time == 0.0 => 1,
        None => trotter_reps(&terms, a.time, a.eps.unwrap_or(0.01))?,
    };
    let circuit = trotter_circuit(&terms, a.time, reps)?;
    let stats = circuit_stats(&circuit);
    let out = json!({
        "num_qubits": terms.num_qubits(),
        "terms": terms.sorted_terms().iter().map(|t| json!([t.string.to_string(), t.coefficient])).collect::<Vec<_>>(),
        "all_commute": terms.all_commute(),
        "spectral_norm": terms.to_operator().spectral_norm(),
        "time": a.time,
        "reps": reps,
        "circuit": stats,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(path) = a.out {
        fs::write(&path, circuit.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn load_machine(name: &str) -> Result<ArchitectureSpec> {
    let path = Path::new(name);
    if path.is_file() {
        return Ok(ArchitectureSpec::load(path)?);
    }
    Ok(qbench_core::builtin_machine(name)?)
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let src = fs::read_to_string(&a.circuit).with_context(|| format!("reading {}", a.circuit.display()))?;
    let circuit = parse_circuit(&src).with_context(|| format!("parsing {}", a.circuit.display()))?;
    let stats = circuit_stats(&circuit);
    println!("gates {}\nworkspace {}\ndepth {}", stats.gate_count, stats.workspace, stats.depth);
    if let Some(machine) = a.machine {
        let arch = load_machine(&machine)?;
        let routed = transpile(&circuit, &arch, None)?;
        let t = circuit_stats(&routed.circuit);
        println!(
            "on {}: gates {} workspace {} depth {} final layout {:?}",
            arch.name, t.gate_count, t.workspace, t.depth, routed.final_layout
        );
    }
    Ok(())
}

fn find_records(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    if dir.join("record.json").is_file() {
        found.push(dir.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    for sub in entries {
        find_records(&sub, found)?;
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut dirs = Vec::new();
    find_records(&a.run_dir, &mut dirs)?;
    if dirs.is_empty() {
        bail!("no record.json under {}", a.run_dir.display());
    }
    let records: Vec<RunRecord> = dirs.iter().map(|d| rerender(d)).collect::<Result<_, _>>()?;
    let reports: Vec<_> = records.iter().map(|r| r.report.clone()).collect();
    if dirs.len() > 1 || dirs[0] != a.run_dir {
        let summary = a.run_dir.join("benchmarks.csv");
        let file = fs::File::create(&summary).with_context(|| format!("writing {}", summary.display()))?;
        write_reports_csv(file, &reports)?;
    }
    print!("{}", render_table(&reports));
    Ok(())
}

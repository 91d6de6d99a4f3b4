//! Command-line front end for the simulator.
//!
//! One binary, three jobs:
//!
//! * **run** (default): execute a single seeded simulation and write its
//!   artifact set — transcript, trust records, labels, model snapshot,
//!   metrics report and a config echo — into `--out`;
//! * **sweep** (`--sweep nodes|packets`): walk the full experiment grid on
//!   one axis, writing a mean CSV and a standard-deviation companion per
//!   metric;
//! * **plot** (subcommand): render a sweep's four tables as static SVG line
//!   charts.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure
//! (I/O or a transcript inconsistency detected during aggregation).

mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use wtmrd::sweep::{run_sweep, SweepAxis, SweepError, SweepSpec};
use wtmrd::transcript::{write_labels_csv, write_transcript_csv, write_trust_csv};
use wtmrd::trust::TrustMode;
use wtmrd::workload::AttackKind;
use wtmrd::{run_scenario, RunError, ScenarioConfig, VariantSpec};

/// Deterministic ad-hoc-network simulator with trust-based attack detection.
#[derive(Parser)]
#[command(name = "wtmrd", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// TOML scenario file; built-in defaults fill any omitted field.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed (overrides the scenario file).
    #[arg(long)]
    seed: Option<u64>,

    /// Network size (overrides the scenario file).
    #[arg(long)]
    nodes: Option<u16>,

    /// Packet budget for the designated flow.
    #[arg(long)]
    packets: Option<u32>,

    /// Fraction of nodes given the attacker role, in [0, 0.5).
    #[arg(long, value_name = "FRACTION")]
    malicious: Option<f64>,

    /// Attack mounted by malicious nodes: "blackhole" or "grayhole:<p>".
    #[arg(long, value_parser = parse_attack)]
    attack: Option<AttackKind>,

    /// Probe bookkeeping mode: "faithful" or "corrected".
    #[arg(long, value_parser = parse_trust_mode, value_name = "MODE")]
    trust_mode: Option<TrustMode>,

    /// Mechanism variant: "wtmrd", "noclass" or "threshold:<tau>". A single
    /// run executes it; a sweep restricts the tables to that one column.
    #[arg(long, value_parser = parse_variant)]
    variant: Option<VariantSpec>,

    /// Node-disjoint paths kept per flow.
    #[arg(long, value_name = "K")]
    paths: Option<usize>,

    /// Seeded repetitions per sweep cell.
    #[arg(long)]
    runs: Option<u32>,

    /// Output directory for all artifacts.
    #[arg(long, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Walk the full experiment grid on this axis ("nodes" or "packets")
    /// instead of executing a single run.
    #[arg(long, value_parser = parse_axis, value_name = "AXIS")]
    sweep: Option<SweepAxis>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Render a sweep's four metric tables as SVG line charts.
    Plot {
        /// Directory holding adr.csv, adt.csv, dsl.csv and delay.csv;
        /// the charts are written next to them.
        #[arg(long, default_value = "out", value_name = "DIR")]
        dir: PathBuf,
    },
}

/// Failures split by exit code: bad input (1) vs. failure while executing a
/// job that was accepted as valid (2).
enum CliError {
    Config(String),
    Runtime(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_only = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if usage_only {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(Command::Plot { dir }) = &cli.command {
        return cmd_plot(dir);
    }
    let config = resolve_config(&cli)?;
    match cli.sweep {
        Some(axis) => cmd_sweep(&cli, axis, &config),
        None => cmd_run(&cli, &config),
    }
}

/// Load the scenario file (or defaults), fold the flag overrides in, and
/// re-validate the combination.
fn resolve_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            ScenarioConfig::from_toml(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(nodes) = cli.nodes {
        config.nodes = nodes;
    }
    if let Some(packets) = cli.packets {
        config.flows.designated_packets = Some(packets);
    }
    if let Some(fraction) = cli.malicious {
        config.malicious_fraction = fraction;
    }
    if let Some(attack) = cli.attack {
        config.attack = attack;
    }
    if let Some(mode) = cli.trust_mode {
        config.trust_mode = mode;
    }
    if let Some(budget) = cli.paths {
        config.path_budget = budget;
    }
    if let Some(runs) = cli.runs {
        config.runs = runs;
    }
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

fn cmd_run(cli: &Cli, config: &ScenarioConfig) -> Result<(), CliError> {
    let variant = cli.variant.unwrap_or(VariantSpec::Wtmrd);
    let output = run_scenario(config, variant, config.seed, false).map_err(run_error)?;

    let dir = &cli.out;
    create_dir(dir)?;
    write(dir.join("config.toml"), config.to_toml())?;
    write(
        dir.join("transcript.csv"),
        write_transcript_csv(&output.transcript),
    )?;
    write(dir.join("trust.csv"), write_trust_csv(&output.trust_records))?;
    write(
        dir.join("labels.csv"),
        write_labels_csv(&output.roles, &output.labels),
    )?;
    if let Some(snapshot) = output.model_snapshot {
        write(dir.join("model.csv"), snapshot)?;
    }
    write(
        dir.join("metrics.csv"),
        output.report.to_csv(&variant.to_string()),
    )?;

    let r = &output.report;
    println!(
        "run: {} nodes, seed {}, variant {variant}",
        config.nodes, config.seed
    );
    println!(
        "  adr {:.2}%  dsl {:.2}%  delay {:.4} ms  adt {:.4} ms  ({}/{} packets delivered)",
        r.adr_percent, r.dsl_percent, r.delay_millis, r.adt_millis, r.delivered, r.total_packets
    );
    println!("  wrote {}", dir.display());
    Ok(())
}

fn cmd_sweep(cli: &Cli, axis: SweepAxis, config: &ScenarioConfig) -> Result<(), CliError> {
    let mut spec = SweepSpec::full_grid(axis);
    if let Some(variant) = cli.variant {
        spec.variants = vec![variant];
    }
    spec.runs = config.runs;

    let result = run_sweep(config, &spec).map_err(sweep_error)?;

    let dir = &cli.out;
    create_dir(dir)?;
    write(dir.join("config.toml"), config.to_toml())?;
    write(dir.join("sweep.toml"), sweep_echo(&spec))?;
    for (stem, mean, std) in result.tables() {
        write(dir.join(format!("{stem}.csv")), mean)?;
        write(dir.join(format!("{stem}_std.csv")), std)?;
        println!("wrote {0}/{stem}.csv (+{stem}_std.csv)", dir.display());
    }
    Ok(())
}

fn cmd_plot(dir: &Path) -> Result<(), CliError> {
    for (stem, title, y_label) in plot::CHARTS {
        let path = dir.join(format!("{stem}.csv"));
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let table = plot::parse_table(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let svg_path = dir.join(format!("{stem}.svg"));
        write(svg_path.clone(), plot::render_chart(&table, title, y_label))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

/// Echo of the grid actually walked, alongside the base `config.toml`.
fn sweep_echo(spec: &SweepSpec) -> String {
    let values: Vec<String> = spec.values.iter().map(u32::to_string).collect();
    let variants: Vec<String> = spec
        .variants
        .iter()
        .map(|v| format!("\"{v}\""))
        .collect();
    format!(
        "axis = \"{}\"\nvalues = [{}]\nvariants = [{}]\nruns = {}\n",
        spec.axis,
        values.join(", "),
        variants.join(", "),
        spec.runs,
    )
}

fn run_error(e: RunError) -> CliError {
    match e {
        RunError::Config(e) => CliError::Config(e.to_string()),
        RunError::Metrics(e) => CliError::Runtime(e.to_string()),
    }
}

fn sweep_error(e: SweepError) -> CliError {
    match e {
        // A cell failing mid-grid is a runtime abort; everything else is a
        // malformed grid description.
        SweepError::Cell { .. } => CliError::Runtime(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))
}

fn write(path: PathBuf, contents: String) -> Result<(), CliError> {
    fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn parse_attack(s: &str) -> Result<AttackKind, String> {
    s.parse()
}

fn parse_variant(s: &str) -> Result<VariantSpec, String> {
    s.parse()
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse()
}

fn parse_trust_mode(s: &str) -> Result<TrustMode, String> {
    match s {
        "faithful" => Ok(TrustMode::Faithful),
        "corrected" => Ok(TrustMode::Corrected),
        other => Err(format!(
            "unknown trust mode {other:?} (expected \"faithful\" or \"corrected\")"
        )),
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sbqs::engine::Mode;
use sbqs_cli::output::format_number;
use sbqs_cli::{emit_csv, emit_svg, evaluate_bounds, load_config, run_experiment, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "sbqs", version, about = "Imaginary-time evolution by resource states and post-selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep β and write the result CSV and a bounds report.
    Run(Common),
    /// Print the analytic bounds for the largest β of the grid as JSON.
    Bounds(Common),
    /// Print the resource decomposition and its reconstruction residual.
    Decompose(Common),
    /// Like `run`, with every measurement sampled.
    Sample(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the fidelity plot.
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of β points computed concurrently.
    #[arg(long)]
    parallel: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut config = load_config(&self.config)?;
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        if self.svg && config.output.svg.is_none() {
            config.output.svg = Some("fidelity.svg".into());
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(p) = self.parallel {
            config.parallel = p;
        }
        config.validate()?;
        Ok(config)
    }
}

fn sweep(config: &ExperimentConfig) -> Result<(), HarnessError> {
    let experiment = run_experiment(config)?;
    for w in &experiment.warnings {
        eprintln!("warning: {w}");
    }
    let csv = config.csv_path();
    emit_csv(&experiment.rows, &csv)?;
    println!("wrote {}", csv.display());
    let bounds_path = csv.with_file_name("bounds.json");
    let json = serde_json::to_string_pretty(&experiment.bounds).map_err(|e| HarnessError::Io(e.to_string()))?;
    std::fs::write(&bounds_path, json + "\n").map_err(|e| HarnessError::Io(format!("{}: {e}", bounds_path.display())))?;
    println!("wrote {}", bounds_path.display());
    if let Some(svg) = config.svg_path() {
        emit_svg(&experiment.rows, &svg)?;
        println!("wrote {}", svg.display());
    }
    for r in experiment.rows.iter().filter(|r| r.note.is_some()) {
        eprintln!("beta {}: {}", format_number(r.beta), r.note.as_deref().unwrap_or_default());
    }
    Ok(())
}

fn decompose(config: &ExperimentConfig) -> Result<(), HarnessError> {
    let d = config.decompose()?;
    let source = config.pauli_sum()?.densify()?;
    let residual = (d.densify()? - source).iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("provenance: {:?}", d.provenance);
    println!("qubits: {}", d.n);
    println!("terms: {}", d.len());
    println!("identity offset: {}", format_number(d.identity_offset));
    for t in &d.terms {
        println!("  {:<16} weight {:>14}  support {:?}", t.label, format_number(t.weight), t.support);
    }
    println!("reconstruction residual: {residual:.3e}");
    Ok(())
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run(c) => sweep(&c.load()?),
        Command::Sample(c) => {
            let mut config = c.load()?;
            config.mode = Mode::Sampled;
            sweep(&config)
        }
        Command::Bounds(c) => {
            let report = evaluate_bounds(&c.load()?)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| HarnessError::Io(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
        Command::Decompose(c) => decompose(&c.load()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

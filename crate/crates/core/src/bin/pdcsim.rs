use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdcsim::run::{run, RunConfig, RunError, Scenario};

/// Pulsed type-II down-conversion simulator.
#[derive(Parser, Debug)]
#[command(name = "pdcsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Visibility and relative rate versus filter bandwidth (fig1.csv).
    FilterSweep(RunArgs),
    /// First-pass, second-pass and double-pass visibilities.
    PassCompare(RunArgs),
    /// Coincidence fringes versus the relative pass phase.
    PhaseSweep(RunArgs),
    /// Single- and double-pass visibilities versus spatial misalignment.
    Misalign(RunArgs),
    /// Double-pass visibility versus interaction strength at second order.
    PowerSweep(RunArgs),
    /// Write the joint spectral amplitude and its grid metadata.
    JsaDump(RunArgs),
    /// Amplitude overlap fed into the mode model.
    Chain(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to `output_dir` in the config, then `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for data-parallel loops.
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(self) -> (Scenario, RunArgs) {
        match self {
            Command::FilterSweep(a) => (Scenario::FilterSweep, a),
            Command::PassCompare(a) => (Scenario::PassCompare, a),
            Command::PhaseSweep(a) => (Scenario::PhaseSweep, a),
            Command::Misalign(a) => (Scenario::Misalign, a),
            Command::PowerSweep(a) => (Scenario::PowerSweep, a),
            Command::JsaDump(a) => (Scenario::JsaDump, a),
            Command::Chain(a) => (Scenario::Chain, a),
        }
    }
}

fn execute(scenario: Scenario, args: RunArgs) -> Result<(), RunError> {
    let config = RunConfig::from_path(&args.config)?;
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let manifest = run(scenario, &config, &out, args.threads)?;
    for f in &manifest.outputs {
        println!("{}  {}", f.sha256, out.join(&f.file).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = cli.command.split();
    match execute(scenario, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdcsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

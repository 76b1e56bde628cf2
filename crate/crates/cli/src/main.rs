//! Command-line driver: synthesis, simulation, analysis and reproduction runs.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{analyze, bounds, circuit, gme, reproduce, simulate, synth};
use output::RunContext;

#[derive(Parser, Debug)]
#[command(name = "noonforge", version, about = "Heralded three-mode NOON state generation and analysis")]
struct Cli {
    /// RNG seed; falls back to the config file, then NOONFORGE_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Show angles in degrees on stdout; files always use radians.
    #[arg(long, global = true)]
    degrees: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for heralding unitaries from seeded restarts.
    Synth(synth::SynthArgs),
    /// Evolve, herald and scan a device; write fringe CSVs and populations.
    Simulate(simulate::SimulateArgs),
    /// Fit fringes, bound and estimate the fidelity, certify entanglement.
    Analyze(analyze::AnalyzeArgs),
    /// Coherence-only fidelity bounds from fringes or fringe parameters.
    Bounds(bounds::BoundsArgs),
    /// Product-state threshold of a NOON state and optional certification.
    Gme(gme::GmeArgs),
    /// Compose or fit wave-plate circuits.
    #[command(subcommand)]
    Circuit(circuit::CircuitCommand),
    /// Recompute the headline numbers and compare them with expected values.
    Reproduce(reproduce::ReproduceArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = RunContext { output_dir: cli.output_dir.clone(), degrees: cli.degrees };
    let result = match &cli.command {
        Command::Synth(args) => synth::run(args, cli.seed, &ctx),
        Command::Simulate(args) => simulate::run(args, cli.seed, &ctx),
        Command::Analyze(args) => analyze::run(args, cli.seed, &ctx),
        Command::Bounds(args) => bounds::run(args, cli.seed, &ctx),
        Command::Gme(args) => gme::run(args, cli.seed, &ctx),
        Command::Circuit(command) => circuit::run(command, cli.seed, &ctx),
        Command::Reproduce(args) => reproduce::run(args, cli.seed, &ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.kind.exit_code()
        }
    }
}

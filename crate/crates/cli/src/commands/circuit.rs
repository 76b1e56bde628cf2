use std::path::PathBuf;

use clap::{Args, Subcommand};
use noonforge_core::optics::{compose, Circuit, SagnacSettings};
use noonforge_core::synth::{fit_circuit_angles, heralded_objective, reference_unitary, FitOptions, HeraldedScore};
use noonforge_core::ModeUnitary;
use serde::{Deserialize, Serialize};

use super::simulate::{circuit_from_file, unitary_from_file};
use crate::error::CliResult;
use crate::output::{resolve_seed, write_envelope, RunContext};

#[derive(Subcommand, Debug)]
pub enum CircuitCommand {
    /// Multiply out an element list and score the resulting unitary.
    Compose(ComposeArgs),
    /// Fit the Sagnac wave-plate angles and mirror phase to a unitary.
    Fit(FitArgs),
}

#[derive(Args, Debug)]
pub struct ComposeArgs {
    /// Element list JSON.
    pub circuit: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Target unitary (matrix JSON, synth or compose output); default is the reference device.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Nelder-Mead starts; the first is the reported configuration.
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
}

#[derive(Serialize, Deserialize)]
struct Composed {
    unitary: ModeUnitary,
    fidelity: f64,
    success_probability: f64,
}

#[derive(Serialize, Deserialize)]
struct FitConfig {
    target: ModeUnitary,
    options: FitOptions,
}

#[derive(Serialize, Deserialize)]
struct FitOutput {
    settings: SagnacSettings,
    canonical: SagnacSettings,
    circuit: Circuit,
    residual: f64,
    fidelity: f64,
    success_probability: f64,
}

fn print_score(score: &HeraldedScore) {
    println!("heralded fidelity     {:.12}", score.fidelity);
    println!("success probability   {:.12}", score.success_probability);
}

pub fn run(command: &CircuitCommand, seed: Option<u64>, ctx: &RunContext) -> CliResult<()> {
    let seed = resolve_seed(seed, None)?;
    ctx.ensure_dir()?;
    match command {
        CircuitCommand::Compose(args) => {
            let circuit = circuit_from_file(&args.circuit)?;
            let unitary = compose(&circuit)?;
            let score = heralded_objective(&unitary)?;
            print_score(&score);
            let path = ctx.path("unitary.json");
            let result = Composed { unitary, fidelity: score.fidelity, success_probability: score.success_probability };
            write_envelope(&path, "circuit compose", seed, &circuit, &result)?;
            println!("wrote {}", path.display());
        }
        CircuitCommand::Fit(args) => {
            let target = match &args.target {
                Some(path) => unitary_from_file(path)?,
                None => reference_unitary(),
            };
            let options = FitOptions { n_starts: args.starts, seed };
            let fit = fit_circuit_angles(&target, &options)?;
            let score = heralded_objective(&fit.settings.unitary())?;
            let c = fit.settings.canonical();
            println!("residual              {:.3e}", fit.residual);
            for (name, value) in
                [("hwp1", c.hwp1), ("hwp2", c.hwp2), ("hwp3", c.hwp3), ("qwp1", c.qwp1), ("mirror", c.mirror_phase)]
            {
                println!("{name:<22}{}", ctx.angle(value));
            }
            print_score(&score);
            let path = ctx.path("circuit_fit.json");
            let result = FitOutput {
                settings: fit.settings,
                canonical: c,
                circuit: fit.circuit,
                residual: fit.residual,
                fidelity: score.fidelity,
                success_probability: score.success_probability,
            };
            write_envelope(&path, "circuit fit", seed, &FitConfig { target, options }, &result)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

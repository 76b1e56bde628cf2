use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use noonforge_core::synth::{synthesize, SynthConfig};

use crate::error::{CliError, CliResult};
use crate::output::{load_config, resolve_seed, seed_in, write_envelope, RunContext};

/// A run succeeds when some restart reaches this heralded fidelity.
pub const TARGET_FIDELITY: f64 = 1.0 - 1e-6;

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Synthesis config JSON, or the output of an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Skip fitting the interferometer topology to converged unitaries.
    #[arg(long)]
    pub no_fit_circuits: bool,
    #[arg(long, default_value = "synth_results.json")]
    pub out: String,
}

pub fn run(args: &SynthArgs, seed: Option<u64>, ctx: &RunContext) -> CliResult<()> {
    let (mut config, raw) = match &args.config {
        Some(path) => {
            let (c, v) = load_config::<SynthConfig>(path)?;
            (c, Some(v))
        }
        None => (SynthConfig::default(), None),
    };
    if let Some(n) = args.restarts {
        config.n_restarts = n;
    }
    if let Some(n) = args.max_iters {
        config.max_iters = n;
    }
    if args.no_fit_circuits {
        config.fit_circuits = false;
    }
    config.rng_seed = resolve_seed(seed, seed_in(raw.as_ref(), "rng_seed"))?;
    config.validate()?;

    let results = synthesize(&config)?;
    ctx.ensure_dir()?;
    let path = ctx.path(&args.out);
    write_envelope(&path, "synth", config.rng_seed, &config, &results)?;

    println!("restart  fidelity        success_prob  circuit");
    for r in results.iter().take(5) {
        let circuit = match (r.circuit_cost, r.circuit_residual) {
            (Some(n), _) => format!("{n} elements"),
            (None, Some(res)) => format!("no fit (residual {res:.1e})"),
            (None, None) => "-".to_string(),
        };
        println!("{:>7}  {:.12}  {:.10}  {circuit}", r.restart_index, r.fidelity, r.success_probability);
    }
    println!("wrote {}", path.display());

    match results.first() {
        Some(best) if best.fidelity >= TARGET_FIDELITY => Ok(()),
        Some(best) => Err(CliError::numerical(anyhow!(
            "best fidelity {:.9} is below the target {TARGET_FIDELITY}",
            best.fidelity
        ))),
        None => Err(CliError::validation(anyhow!("no restarts were run"))),
    }
}

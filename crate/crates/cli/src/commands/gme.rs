use clap::Args;
use noonforge_core::analysis::{certify_gme, gme_threshold, GmeReport};
use noonforge_core::fock::noon_state;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::output::{resolve_seed, write_envelope, RunContext};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmeConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub fidelity: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GmeArgs {
    /// NOON phase of the B term, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha1: f64,
    /// NOON phase of the C term, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha2: f64,
    /// Measured fidelity to certify against the threshold.
    #[arg(long, requires = "sigma")]
    pub fidelity: Option<f64>,
    #[arg(long, requires = "fidelity")]
    pub sigma: Option<f64>,
}

pub fn run(args: &GmeArgs, seed: Option<u64>, ctx: &RunContext) -> CliResult<()> {
    let config = GmeConfig { alpha1: args.alpha1, alpha2: args.alpha2, fidelity: args.fidelity, sigma: args.sigma };
    let mut report: GmeReport = gme_threshold(&noon_state(config.alpha1, config.alpha2))?;
    println!("product-state threshold  {:.12}", report.threshold);
    for (label, s) in ["A|BC", "B|AC", "C|AB"].iter().zip(report.sigma2_max) {
        println!("  {label}  largest squared Schmidt coefficient {s:.12}");
    }
    if let (Some(f), Some(s)) = (config.fidelity, config.sigma) {
        let z = certify_gme(f, s, report.threshold)?;
        report.z_score = Some(z);
        println!("z = {z:.3} ({})", if f > report.threshold { "above threshold" } else { "not above threshold" });
    }
    ctx.ensure_dir()?;
    let path = ctx.path("gme.json");
    write_envelope(&path, "gme", resolve_seed(seed, None)?, &config, &report)?;
    println!("wrote {}", path.display());
    Ok(())
}

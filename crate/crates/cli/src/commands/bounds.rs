use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use noonforge_core::analysis::{fidelity_bounds, fit_fringe, BoundsConfig, CoherenceSet, FitConfig};
use noonforge_core::measurement::FringeParams;
use serde::{Deserialize, Serialize};

use super::analyze::load_fringes;
use crate::error::{CliError, CliResult};
use crate::output::{load_config, resolve_seed, seed_in, triple, write_envelope, RunContext};

/// Fringe parameters given directly, in the order AB, AC, BC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeTriples {
    /// Fringe offsets `A`.
    pub offsets: [f64; 3],
    /// Contrasts `V/A`.
    pub contrasts: [f64; 3],
    pub phases: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsCommandConfig {
    #[serde(default)]
    pub fringes: Option<Vec<PathBuf>>,
    #[serde(default)]
    pub params: Option<FringeTriples>,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Three fringe CSVs (AB, AC, BC).
    #[arg(long, num_args = 3, conflicts_with_all = ["contrasts", "offsets", "phases"])]
    pub fringes: Vec<PathBuf>,
    /// Contrasts V/A of AB, AC, BC as `a,b,c`.
    #[arg(long, value_parser = triple)]
    pub contrasts: Option<[f64; 3]>,
    /// Fringe offsets A as `a,b,c`; default 1,1,1.
    #[arg(long, value_parser = triple)]
    pub offsets: Option<[f64; 3]>,
    /// Fringe phases in radians as `a,b,c`; default 0,0,0.
    #[arg(long, value_parser = triple)]
    pub phases: Option<[f64; 3]>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub delta_points: Option<usize>,
}

pub fn run(args: &BoundsArgs, seed: Option<u64>, ctx: &RunContext) -> CliResult<()> {
    let (mut config, raw) = match &args.config {
        Some(path) => {
            let (c, v) = load_config::<BoundsCommandConfig>(path)?;
            (c, Some(v))
        }
        None => (
            BoundsCommandConfig {
                fringes: None,
                params: None,
                bounds: BoundsConfig::default(),
                fit: FitConfig::default(),
            },
            None,
        ),
    };
    if !args.fringes.is_empty() {
        config.fringes = Some(args.fringes.clone());
        config.params = None;
    }
    if let Some(contrasts) = args.contrasts {
        config.fringes = None;
        config.params = Some(FringeTriples {
            offsets: args.offsets.unwrap_or([1.0; 3]),
            contrasts,
            phases: args.phases.unwrap_or([0.0; 3]),
        });
    } else if args.offsets.is_some() || args.phases.is_some() {
        return Err(CliError::validation(anyhow!("--offsets and --phases need --contrasts")));
    }
    if let Some(n) = args.grid_points {
        config.bounds.grid_points = n;
    }
    if let Some(n) = args.delta_points {
        config.bounds.delta_points = n;
    }
    let seed = resolve_seed(seed, seed_in(raw.as_ref(), "seed"))?;
    config.fit.seed = seed;

    let coherences = match (&config.fringes, &config.params) {
        (Some(paths), _) => {
            let data = load_fringes(paths)?;
            let fit =
                |k: usize| fit_fringe(&data[k], &FitConfig { seed: seed.wrapping_add(k as u64), ..config.fit.clone() });
            CoherenceSet { ab: fit(0)?, ac: fit(1)?, bc: fit(2)? }
        }
        (None, Some(p)) => {
            let f = |k: usize| FringeParams::exact(p.offsets[k], p.contrasts[k] * p.offsets[k], p.phases[k]);
            CoherenceSet { ab: f(0), ac: f(1), bc: f(2) }
        }
        (None, None) => return Err(CliError::validation(anyhow!("give --fringes or --contrasts"))),
    };
    let report = fidelity_bounds(&coherences, &config.bounds)?;

    println!("fidelity bounds  [{:.6}, {:.6}]", report.lower, report.upper);
    println!(
        "at lower         r_B = {:.4}, r_C = {:.4}, α1 = {}, α2 = {}",
        report.at_lower.r_b,
        report.at_lower.r_c,
        ctx.angle(report.at_lower.alpha1),
        ctx.angle(report.at_lower.alpha2)
    );
    for w in &report.warnings {
        println!("warning          {w}");
    }
    ctx.ensure_dir()?;
    let path = ctx.path("bounds.json");
    write_envelope(&path, "bounds", seed, &config, &report)?;
    println!("wrote {}", path.display());
    Ok(())
}

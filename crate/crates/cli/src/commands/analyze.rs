use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use noonforge_core::analysis::{analyze, AnalysisConfig, AnalysisInput, AnalysisReport, PopulationSet};
use noonforge_core::io::{read_fringe_files, read_populations, sidecar_path, write_fitted_curve};
use noonforge_core::measurement::{FringeData, FringeParams};
use serde::{Deserialize, Serialize};

use super::simulate::PAIRS;
use crate::error::{CliError, CliResult};
use crate::output::{load_config, resolve_seed, seed_in, write_envelope, RunContext};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    /// Fringe CSVs; without sidecars they are taken as AB, AC, BC in order.
    pub fringes: Vec<PathBuf>,
    #[serde(default)]
    pub populations: Option<PathBuf>,
    #[serde(flatten)]
    pub analysis: AnalysisConfig,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Three fringe CSVs.
    #[arg(num_args = 0..=3)]
    pub fringes: Vec<PathBuf>,
    /// Directory with fringe_AB/AC/BC.csv and, if present, populations.json.
    #[arg(long, conflicts_with = "fringes")]
    pub dir: Option<PathBuf>,
    /// Population JSON; without it only the bounds are reported.
    #[arg(long)]
    pub populations: Option<PathBuf>,
    /// Analysis config JSON, or the report of an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub fidelity_resamples: Option<usize>,
    /// Bootstrap resamples for the bounds; 0 skips their uncertainties.
    #[arg(long)]
    pub bounds_resamples: Option<usize>,
    /// Bootstrap resamples of each fringe fit.
    #[arg(long)]
    pub fit_resamples: Option<usize>,
}

/// Reads three fringe files. Sidecars name the pair; files without one are
/// assigned AB, AC, BC by position.
pub fn load_fringes(paths: &[PathBuf]) -> CliResult<Vec<FringeData>> {
    if paths.len() != 3 {
        return Err(CliError::validation(anyhow!("need three fringe files (AB, AC, BC), got {}", paths.len())));
    }
    paths
        .iter()
        .zip(PAIRS)
        .map(|(path, (pair, _))| {
            let positional = (!sidecar_path(path).exists()).then_some(pair);
            read_fringe_files(path, positional)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(CliError::validation)
        })
        .collect()
}

fn dir_inputs(dir: &Path) -> (Vec<PathBuf>, Option<PathBuf>) {
    let fringes = PAIRS.iter().map(|(_, label)| dir.join(format!("fringe_{label}.csv"))).collect();
    let pop = dir.join("populations.json");
    (fringes, pop.exists().then_some(pop))
}

pub fn run(args: &AnalyzeArgs, seed: Option<u64>, ctx: &RunContext) -> CliResult<()> {
    let (mut config, raw) = match &args.config {
        Some(path) => {
            let (c, v) = load_config::<AnalyzeConfig>(path)?;
            (c, Some(v))
        }
        None => (AnalyzeConfig { fringes: Vec::new(), populations: None, analysis: AnalysisConfig::default() }, None),
    };
    if let Some(dir) = &args.dir {
        let (fringes, pop) = dir_inputs(dir);
        config.fringes = fringes;
        config.populations = pop;
    }
    if !args.fringes.is_empty() {
        config.fringes = args.fringes.clone();
        config.populations = None;
    }
    if args.populations.is_some() {
        config.populations = args.populations.clone();
    }
    if let Some(n) = args.fidelity_resamples {
        config.analysis.fidelity_resamples = n;
    }
    if let Some(n) = args.bounds_resamples {
        config.analysis.bounds_resamples = n;
    }
    if let Some(n) = args.fit_resamples {
        config.analysis.fit.bootstrap_resamples = n;
    }
    let seed = resolve_seed(seed, seed_in(raw.as_ref(), "seed"))?;
    config.analysis.seed = seed;
    config.analysis.fit.seed = seed;

    let fringes = load_fringes(&config.fringes)?;
    let populations: Option<PopulationSet> = match &config.populations {
        Some(path) => {
            let p = read_populations(path).with_context(|| format!("reading {}", path.display()))?;
            p.validate()?;
            Some(p)
        }
        None => None,
    };
    let input = AnalysisInput::from_fringes(fringes, populations)?;
    let report = analyze(&input, &config.analysis)?;

    ctx.ensure_dir()?;
    let fits: [(&FringeData, &FringeParams, &str); 3] = [
        (&input.ab, &report.fringes.ab, "AB"),
        (&input.ac, &report.fringes.ac, "AC"),
        (&input.bc, &report.fringes.bc, "BC"),
    ];
    for (data, params, label) in fits {
        let path = ctx.path(&format!("fit_{label}.csv"));
        let mut buf = Vec::new();
        write_fitted_curve(data, params, &mut buf)?;
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
    }
    let path = ctx.path("report.json");
    write_envelope(&path, "analyze", seed, &config, &report)?;
    print_report(&report, ctx);
    println!("wrote {}", path.display());
    Ok(())
}

fn print_report(report: &AnalysisReport, ctx: &RunContext) {
    for (label, f) in [("AB", &report.fringes.ab), ("AC", &report.fringes.ac), ("BC", &report.fringes.bc)] {
        println!(
            "fringe {label}  A = {:.4} ± {:.4}  V/A = {:.4} ± {:.4}  φ = {}",
            f.offset,
            f.offset_sigma,
            f.contrast(),
            f.contrast_sigma(),
            ctx.angle(f.phase)
        );
    }
    match (report.fidelity, report.fidelity_sigma) {
        (Some(fid), sigma) => {
            println!("fidelity      {fid:.4} ± {:.4}", sigma.unwrap_or(0.0));
            if let (Some(a1), Some(a2)) = (report.alpha1, report.alpha2) {
                println!("phases        α1 = {}, α2 = {}", ctx.angle(a1), ctx.angle(a2));
            }
        }
        (None, _) => println!("fidelity      (no populations)"),
    }
    let b = &report.bounds;
    let pm = |s: Option<f64>| s.map(|s| format!(" ± {s:.4}")).unwrap_or_default();
    println!("bounds        [{:.4}{}, {:.4}{}]", b.lower, pm(b.lower_sigma), b.upper, pm(b.upper_sigma));
    for w in &b.details.warnings {
        println!("warning       {w}");
    }
    let z = report.gme.z.map(|z| format!("z = {z:.2}, ")).unwrap_or_default();
    println!("entanglement  threshold {:.4}, {z}certified: {}", report.gme.threshold, report.gme.certified);
}

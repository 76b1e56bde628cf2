use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use noonforge_core::analysis::{max_fidelity_over_phases, NoonCoherences, PopulationSet};
use noonforge_core::fock::herald;
use noonforge_core::io::{write_fringe_files, write_json};
use noonforge_core::measurement::{
    apply_noise_chain, default_thetas, fringe_scan, sample_counts, sample_population_counts, NoiseModel,
    DEFAULT_POINTS_PER_PERIOD,
};
use noonforge_core::optics::{compose, Circuit, SagnacSettings};
use noonforge_core::synth::{fit_mirror_phase, reference_unitary, HERALD_INPUT};
use noonforge_core::{FockSpaceState, ModeLabel, ModeUnitary, PureState};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::output::{load_config, resolve_seed, seed_in, write_envelope, RunContext};

/// Heralding probabilities at or below this count as "never heralds".
const MIN_HERALD_PROBABILITY: f64 = 1e-15;

pub const PAIRS: [((ModeLabel, ModeLabel), &str); 3] =
    [((ModeLabel::A, ModeLabel::B), "AB"), ((ModeLabel::A, ModeLabel::C), "AC"), ((ModeLabel::B, ModeLabel::C), "BC")];

/// The four-mode transformation the input photons go through.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Device {
    /// The tabulated reference unitary.
    Reference,
    /// The reported wave-plate angles with the mirror phase fitted.
    Reported,
    Circuit {
        circuit: Circuit,
    },
    Unitary {
        unitary: ModeUnitary,
    },
}

impl Device {
    pub fn unitary(&self) -> CliResult<ModeUnitary> {
        Ok(match self {
            Device::Reference => reference_unitary(),
            Device::Reported => fit_mirror_phase(&SagnacSettings::reported(0.0))?.settings.unitary(),
            Device::Circuit { circuit } => compose(circuit)?,
            Device::Unitary { unitary } => unitary.clone(),
        })
    }
}

/// A unitary from a bare matrix, a synth output (best result) or a
/// `circuit compose` output.
pub fn unitary_from_file(path: &PathBuf) -> CliResult<ModeUnitary> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let candidate = match value.get("result") {
        Some(Value::Array(results)) => results.first().and_then(|r| r.get("unitary")).cloned(),
        Some(result) => result.get("unitary").cloned(),
        None => Some(value),
    }
    .ok_or_else(|| anyhow!("{}: no unitary found", path.display()))?;
    Ok(serde_json::from_value(candidate).with_context(|| format!("{}: invalid unitary", path.display()))?)
}

pub fn circuit_from_file(path: &PathBuf) -> CliResult<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("{}: invalid circuit", path.display()))?)
}

/// Parses `dephase=0.1`, `bad_event=0.15` or `white=0.05`.
pub fn parse_noise(text: &str) -> Result<NoiseModel, String> {
    let (kind, value) = text.split_once('=').ok_or_else(|| format!("expected kind=value, got {text:?}"))?;
    let x: f64 = value.trim().parse().map_err(|_| format!("{value:?} is not a number"))?;
    match kind.trim() {
        "white" => Ok(NoiseModel::White { p: x }),
        "dephase" => Ok(NoiseModel::Dephase { d: x }),
        "bad_event" => Ok(NoiseModel::BadEvent { q: x }),
        other => Err(format!("unknown noise kind {other:?}; expected white, dephase or bad_event")),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub device: Device,
    /// Applied to the heralded state in order.
    #[serde(default)]
    pub noise: Vec<NoiseModel>,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Events per analyzer setting; absent means exact probabilities.
    #[serde(default)]
    pub events: Option<u64>,
    /// Events for the population measurement; defaults to `events`.
    #[serde(default)]
    pub population_events: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_points() -> usize {
    DEFAULT_POINTS_PER_PERIOD
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateFiles {
    pub ab: String,
    pub ac: String,
    pub bc: String,
    pub populations: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub herald_probability: f64,
    /// Phase-optimized NOON fidelity of the simulated state.
    pub fidelity: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub files: SimulateFiles,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Simulation config JSON, or the manifest of an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Element list JSON of the interferometer.
    #[arg(long, conflicts_with_all = ["unitary", "device"])]
    pub circuit: Option<PathBuf>,
    /// 4×4 matrix JSON, or a synth or `circuit compose` output.
    #[arg(long, conflicts_with = "device")]
    pub unitary: Option<PathBuf>,
    /// Built-in device: `reference` or `reported`.
    #[arg(long)]
    pub device: Option<String>,
    /// Noise channel `kind=value` (white, dephase, bad_event); repeatable, applied in order.
    #[arg(long = "noise", value_parser = parse_noise)]
    pub noise: Vec<NoiseModel>,
    /// Analyzer settings per fringe period.
    #[arg(long)]
    pub points: Option<usize>,
    /// Sampled events per setting; omit for exact probabilities.
    #[arg(long)]
    pub events: Option<u64>,
    #[arg(long)]
    pub population_events: Option<u64>,
}

pub fn run(args: &SimulateArgs, seed: Option<u64>, ctx: &RunContext) -> CliResult<()> {
    let (mut config, raw) = match &args.config {
        Some(path) => {
            let (c, v) = load_config::<SimulateConfig>(path)?;
            (c, Some(v))
        }
        None => (
            SimulateConfig {
                device: Device::Reference,
                noise: Vec::new(),
                points: default_points(),
                events: None,
                population_events: None,
                seed: 0,
            },
            None,
        ),
    };
    if let Some(path) = &args.circuit {
        config.device = Device::Circuit { circuit: circuit_from_file(path)? };
    }
    if let Some(path) = &args.unitary {
        config.device = Device::Unitary { unitary: unitary_from_file(path)? };
    }
    match args.device.as_deref() {
        Some("reference") => config.device = Device::Reference,
        Some("reported") => config.device = Device::Reported,
        Some(other) => {
            return Err(CliError::validation(anyhow!("unknown device {other:?}; expected reference or reported")))
        }
        None => {}
    }
    if !args.noise.is_empty() {
        config.noise = args.noise.clone();
    }
    if let Some(n) = args.points {
        config.points = n;
    }
    if args.events.is_some() {
        config.events = args.events;
    }
    if args.population_events.is_some() {
        config.population_events = args.population_events;
    }
    config.seed = resolve_seed(seed, seed_in(raw.as_ref(), "seed"))?;
    if config.points < 4 {
        return Err(CliError::validation(anyhow!("need at least 4 points per period, got {}", config.points)));
    }
    if config.events == Some(0) || config.population_events == Some(0) {
        return Err(CliError::validation(anyhow!("event counts must be positive")));
    }

    let summary = simulate(&config, ctx)?;
    println!("herald probability  {:.10}", summary.herald_probability);
    println!("NOON fidelity       {:.10}", summary.fidelity);
    println!("phases              α1 = {}, α2 = {}", ctx.angle(summary.alpha1), ctx.angle(summary.alpha2));
    let manifest = ctx.path("manifest.json");
    write_envelope(&manifest, "simulate", config.seed, &config, &summary)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn simulate(config: &SimulateConfig, ctx: &RunContext) -> CliResult<SimulateSummary> {
    let u = config.device.unitary()?;
    let out = PureState::basis_state(&HERALD_INPUT)?.evolve(&u)?;
    let heralded = herald(&out, ModeLabel::Herald, 1)?;
    if heralded.probability <= MIN_HERALD_PROBABILITY {
        return Err(CliError::numerical(anyhow!("the device never heralds a photon in the herald mode")));
    }
    let rho = apply_noise_chain(&heralded.state.to_density(), &config.noise)?;
    let truth = max_fidelity_over_phases(&PopulationSet::from_density(&rho)?, &NoonCoherences::from_density(&rho)?)?;

    ctx.ensure_dir()?;
    let thetas = default_thetas(config.points);
    let mut names = Vec::new();
    for (k, (pair, label)) in PAIRS.into_iter().enumerate() {
        let mut data = fringe_scan(&rho, pair, &thetas)?;
        if let Some(n) = config.events {
            data = sample_counts(&data, n, config.seed.wrapping_add(k as u64))?;
        }
        let path = write_fringe_files(&ctx.output_dir, &format!("fringe_{label}"), &data)?;
        names.push(file_name(&path));
    }
    let populations = match config.population_events.or(config.events) {
        Some(n) => PopulationSet::from_counts(sample_population_counts(&rho, n, config.seed.wrapping_add(3))?)?,
        None => PopulationSet::from_density(&rho)?,
    };
    let pop_path = ctx.path("populations.json");
    write_json(&pop_path, &populations)?;

    Ok(SimulateSummary {
        herald_probability: heralded.probability,
        fidelity: truth.fidelity,
        alpha1: truth.alpha1,
        alpha2: truth.alpha2,
        files: SimulateFiles {
            ab: names[0].clone(),
            ac: names[1].clone(),
            bc: names[2].clone(),
            populations: file_name(&pop_path),
        },
    })
}

fn file_name(path: &std::path::Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

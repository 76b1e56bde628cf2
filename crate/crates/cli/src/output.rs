//! Output envelopes, config loading and seed resolution shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "NOONFORGE_SEED";

/// Every JSON output: the command, the seed and the full config that
/// produced `result`. Feeding the file back through `--config` reruns it.
#[derive(Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub command: String,
    pub seed: u64,
    pub config: C,
    pub result: R,
}

/// Where outputs go and how angles are shown on stdout.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub output_dir: PathBuf,
    pub degrees: bool,
}

impl RunContext {
    pub fn path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    pub fn ensure_dir(&self) -> CliResult<()> {
        fs::create_dir_all(&self.output_dir)
            .with_context(|| format!("creating {}", self.output_dir.display()))
            .map_err(CliError::validation)
    }

    /// An angle in radians, shown in the requested unit.
    pub fn angle(&self, rad: f64) -> String {
        if self.degrees {
            format!("{:.4}°", rad.to_degrees())
        } else {
            format!("{rad:.6} rad")
        }
    }
}

pub fn write_envelope<C: Serialize, R: Serialize>(
    path: &Path,
    command: &str,
    seed: u64,
    config: &C,
    result: &R,
) -> CliResult<()> {
    let envelope = Envelope { command: command.to_string(), seed, config, result };
    noonforge_core::io::write_json(path, &envelope)?;
    Ok(())
}

/// A config file is either a bare config or an envelope written by an
/// earlier run, in which case its `config` is used.
pub fn load_config<C: DeserializeOwned>(path: &Path) -> CliResult<(C, Value)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let inner = match value.get("config") {
        Some(c) if value.get("command").is_some() => c.clone(),
        _ => value,
    };
    let config = serde_json::from_value(inner.clone()).with_context(|| format!("invalid config {}", path.display()))?;
    Ok((config, inner))
}

/// Precedence: `--seed`, then the config file, then `NOONFORGE_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>, from_config: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag.or(from_config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::validation(anyhow!("{SEED_ENV}={text:?} is not a non-negative integer"))),
        Err(_) => Ok(0),
    }
}

/// The seed stored under `key` of a loaded config, if it was present.
pub fn seed_in(raw: Option<&Value>, key: &str) -> Option<u64> {
    raw.and_then(|v| v.get(key)).and_then(Value::as_u64)
}

/// Parses `a,b,c` into three floats.
pub fn triple(text: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got {text:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("{p:?} is not a number"))?;
    }
    Ok(out)
}

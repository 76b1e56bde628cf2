//! File formats: fringe CSVs with JSON sidecars, population JSON and fitted
//! curve CSVs.
//!
//! Count mode uses the header `theta_rad,c11,c20,c02`; probability mode uses
//! `theta_rad,p11`. Angles are always radians.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::PopulationSet;
use crate::fock::ModeLabel;
use crate::measurement::{FringeData, FringeMetadata, FringeParams, FringeSample, FringeValue, MeasurementError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed fringe csv: {0}")]
    Format(String),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
}

fn file_error(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File { path: path.to_path_buf(), source }
}

pub const COUNT_HEADER: [&str; 4] = ["theta_rad", "c11", "c20", "c02"];
pub const PROBABILITY_HEADER: [&str; 2] = ["theta_rad", "p11"];

pub fn write_fringe_csv<W: Write>(data: &FringeData, writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    if data.is_counts() {
        w.write_record(COUNT_HEADER)?;
    } else {
        w.write_record(PROBABILITY_HEADER)?;
    }
    for s in data.samples() {
        match s.value {
            FringeValue::Counts { c11, c20, c02 } => {
                w.write_record([s.theta.to_string(), c11.to_string(), c20.to_string(), c02.to_string()])?
            }
            FringeValue::Probability { p11, .. } => w.write_record([s.theta.to_string(), p11.to_string()])?,
            // mixed modes are rejected by construction
        }
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

/// Probability-mode files carry only `p11`; the bunched outcomes are split
/// evenly as `p20 = p02 = (1 − p11)/2`.
pub fn read_fringe_csv<R: Read>(
    reader: R,
    pair: (ModeLabel, ModeLabel),
    metadata: FringeMetadata,
) -> Result<FringeData, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let counts = if header == COUNT_HEADER {
        true
    } else if header == PROBABILITY_HEADER {
        false
    } else {
        return Err(IoError::Format(format!("unexpected header {}", header.join(","))));
    };
    let mut samples = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).ok_or_else(|| IoError::Format(format!("row {}: missing field", line + 1)));
        let float = |i: usize| -> Result<f64, IoError> {
            field(i)?.parse::<f64>().map_err(|e| IoError::Format(format!("row {}: {e}", line + 1)))
        };
        let int = |i: usize| -> Result<u64, IoError> {
            field(i)?.parse::<u64>().map_err(|e| IoError::Format(format!("row {}: {e}", line + 1)))
        };
        let theta = float(0)?;
        let value = if counts {
            FringeValue::Counts { c11: int(1)?, c20: int(2)?, c02: int(3)? }
        } else {
            let p11 = float(1)?;
            FringeValue::Probability { p11, p20: (1.0 - p11) / 2.0, p02: (1.0 - p11) / 2.0 }
        };
        samples.push(FringeSample { theta, value });
    }
    Ok(FringeData::new(pair, samples, metadata)?)
}

/// Caption data stored next to a fringe CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeSidecar {
    pub pair: (ModeLabel, ModeLabel),
    #[serde(flatten)]
    pub metadata: FringeMetadata,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `<stem>.csv` and its sidecar `<stem>.json` into `dir`.
pub fn write_fringe_files(dir: &Path, stem: &str, data: &FringeData) -> Result<PathBuf, IoError> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut buf = Vec::new();
    write_fringe_csv(data, &mut buf)?;
    fs::write(&csv_path, buf).map_err(file_error(&csv_path))?;
    let sidecar = FringeSidecar { pair: data.pair(), metadata: data.metadata.clone() };
    let json_path = sidecar_path(&csv_path);
    fs::write(&json_path, serde_json::to_string_pretty(&sidecar)? + "\n").map_err(file_error(&json_path))?;
    Ok(csv_path)
}

/// Reads a fringe CSV and its sidecar; `pair` overrides or replaces the sidecar.
pub fn read_fringe_files(csv_path: &Path, pair: Option<(ModeLabel, ModeLabel)>) -> Result<FringeData, IoError> {
    let json_path = sidecar_path(csv_path);
    let sidecar: Option<FringeSidecar> = if json_path.exists() {
        let text = fs::read_to_string(&json_path).map_err(file_error(&json_path))?;
        Some(serde_json::from_str(&text)?)
    } else {
        None
    };
    let pair = pair
        .or(sidecar.as_ref().map(|s| s.pair))
        .ok_or_else(|| IoError::Format(format!("{}: no sidecar and no pair given", csv_path.display())))?;
    let file = fs::File::open(csv_path).map_err(file_error(csv_path))?;
    read_fringe_csv(file, pair, sidecar.map(|s| s.metadata).unwrap_or_default())
}

pub fn read_populations(path: &Path) -> Result<PopulationSet, IoError> {
    let text = fs::read_to_string(path).map_err(file_error(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Plot-ready `theta_rad,measured,fitted` rows.
pub fn write_fitted_curve<W: Write>(data: &FringeData, params: &FringeParams, writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["theta_rad", "measured", "fitted"])?;
    for s in data.samples() {
        let measured = s.value.p11().map(|p| p.to_string()).unwrap_or_default();
        w.write_record([s.theta.to_string(), measured, params.evaluate(s.theta).to_string()])?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(file_error(path))
}

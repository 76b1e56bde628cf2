//! Fringe fitting, phase-optimized fidelity, coherence-only fidelity bounds,
//! entanglement certification and bootstrap uncertainties.

mod bounds;
mod fidelity;
mod fringe;
mod gme;
mod pipeline;
mod stats;

pub use bounds::{
    feasible_interval, fidelity_at_ratios, fidelity_bounds, BoundsConfig, BoundsReport, ExtremePoint, R_CAP,
};
pub use fidelity::{
    fidelity_from_measurements, max_fidelity_over_phases, noon_fidelity, CoherenceSet, EstimateMethod,
    FidelityEstimate, NoonCoherences, PopulationSet,
};
pub use fringe::{fit_fringe, fit_fringe_exact, FitConfig, FRINGE_PERIOD};
pub use gme::{certify_gme, gme_threshold, GmeReport, BIPARTITIONS};
pub use pipeline::{analyze, AnalysisConfig, AnalysisInput, AnalysisReport, BoundsSummary, GmeSummary};
pub use stats::{
    poisson, propagate_uncertainty, propagate_uncertainty_many, simulate_herald_counts, success_ratio, Estimate,
    RatioEstimate, Resample, MIN_RESAMPLES,
};

use thiserror::Error;

use crate::fock::FockError;
use crate::measurement::MeasurementError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {required} valid fringe points, got {found}")]
    InsufficientPoints { found: usize, required: usize },
    #[error("fringe samples cover {covered:.4} rad, less than one period")]
    InsufficientCoverage { covered: f64 },
    #[error("fringe design matrix is degenerate")]
    DegenerateDesign,
    #[error("coherence {pair} violates |ρ_ij|² ≤ ρ_ii ρ_jj by {excess:.3e}")]
    UnphysicalCoherence { pair: &'static str, excess: f64 },
    #[error("population {name} = {value} is invalid")]
    InvalidPopulation { name: &'static str, value: f64 },
    #[error("fringe {pair}: {reason}")]
    InvalidFringe { pair: &'static str, reason: String },
    #[error("contrast {value} of pair {pair} exceeds 1 by more than three standard deviations")]
    ContrastAboveOne { pair: &'static str, value: f64 },
    #[error("v = {0} is outside [0, 1]")]
    ContrastOutOfRange(f64),
    #[error("the feasible region of population ratios is empty")]
    EmptyFeasibleRegion,
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("bootstrap needs at least {MIN_RESAMPLES} resamples, got {0}")]
    TooFewResamples(usize),
    #[error("only {valid} of {total} bootstrap resamples could be analyzed")]
    BootstrapFailed { valid: usize, total: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

impl AnalysisError {
    /// Failures of the numerics on otherwise well-formed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            AnalysisError::DegenerateDesign
                | AnalysisError::EmptyFeasibleRegion
                | AnalysisError::BootstrapFailed { .. }
        )
    }
}

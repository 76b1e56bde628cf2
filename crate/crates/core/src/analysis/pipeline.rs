use serde::{Deserialize, Serialize};

use super::bounds::{fidelity_bounds, BoundsConfig, BoundsReport};
use super::fidelity::{fidelity_from_measurements, CoherenceSet, FidelityEstimate, PopulationSet};
use super::fringe::{fit_fringe, fit_fringe_exact, FitConfig};
use super::gme::{certify_gme, gme_threshold};
use super::stats::{propagate_uncertainty, propagate_uncertainty_many};
use super::AnalysisError;
use crate::fock::{noon_state, ModeLabel};
use crate::measurement::{FringeData, FringeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    /// Bootstrap resamples for the fidelity point estimate.
    #[serde(default = "default_resamples")]
    pub fidelity_resamples: usize,
    /// Bootstrap resamples for the bounds; 0 skips their uncertainties.
    #[serde(default = "default_bounds_resamples")]
    pub bounds_resamples: usize,
    /// Discretization used inside the bounds bootstrap.
    #[serde(default = "bootstrap_bounds_config")]
    pub bootstrap_bounds: BoundsConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_resamples() -> usize {
    200
}

fn default_bounds_resamples() -> usize {
    100
}

fn bootstrap_bounds_config() -> BoundsConfig {
    BoundsConfig { grid_points: 200, delta_points: 1024, refine_points: 21 }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            fit: FitConfig::default(),
            bounds: BoundsConfig::default(),
            fidelity_resamples: default_resamples(),
            bounds_resamples: default_bounds_resamples(),
            bootstrap_bounds: bootstrap_bounds_config(),
            seed: 0,
        }
    }
}

/// Fringes of the pairs AB, AC, BC and optionally the populations.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisInput {
    pub ab: FringeData,
    pub ac: FringeData,
    pub bc: FringeData,
    pub populations: Option<PopulationSet>,
}

impl AnalysisInput {
    /// Sorts three fringes by pair.
    pub fn from_fringes(fringes: Vec<FringeData>, populations: Option<PopulationSet>) -> Result<Self, AnalysisError> {
        let mut slots: [Option<FringeData>; 3] = [None, None, None];
        for f in fringes {
            let slot = match f.pair() {
                (ModeLabel::A, ModeLabel::B) | (ModeLabel::B, ModeLabel::A) => 0,
                (ModeLabel::A, ModeLabel::C) | (ModeLabel::C, ModeLabel::A) => 1,
                (ModeLabel::B, ModeLabel::C) | (ModeLabel::C, ModeLabel::B) => 2,
                p => return Err(AnalysisError::InvalidInput(format!("unexpected pair {}{}", p.0, p.1))),
            };
            if slots[slot].replace(f).is_some() {
                return Err(AnalysisError::InvalidInput("duplicate fringe pair".into()));
            }
        }
        let [Some(ab), Some(ac), Some(bc)] = slots else {
            return Err(AnalysisError::InvalidInput("need fringes for AB, AC and BC".into()));
        };
        Ok(AnalysisInput { ab, ac, bc, populations })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub lower: f64,
    pub upper: f64,
    pub lower_sigma: Option<f64>,
    pub upper_sigma: Option<f64>,
    pub details: BoundsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmeSummary {
    pub threshold: f64,
    /// Present when a point estimate with a positive uncertainty exists.
    pub z: Option<f64>,
    pub certified: bool,
    pub sigma2_max: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub fidelity: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub fidelity_sigma: Option<f64>,
    pub bounds: BoundsSummary,
    pub gme: GmeSummary,
    pub fringes: CoherenceSet,
    pub estimate: Option<FidelityEstimate>,
}

/// Least-squares fits of resampled fringes. They carry the uncertainties of
/// the point fits so that range checks tolerate the same sampling noise.
fn resampled_fits(f: &[FringeData], point: &CoherenceSet) -> Result<CoherenceSet, AnalysisError> {
    let fit = |data: &FringeData, p: &FringeParams| -> Result<FringeParams, AnalysisError> {
        let e = fit_fringe_exact(data)?;
        Ok(FringeParams {
            offset_sigma: p.offset_sigma,
            visibility_sigma: p.visibility_sigma,
            phase_sigma: p.phase_sigma,
            ..e
        })
    };
    Ok(CoherenceSet { ab: fit(&f[0], &point.ab)?, ac: fit(&f[1], &point.ac)?, bc: fit(&f[2], &point.bc)? })
}

/// Fits the three fringes, bounds the fidelity, and with populations gives
/// the phase-optimized point estimate with a bootstrap uncertainty and the
/// entanglement certification against the NOON product-state threshold.
pub fn analyze(input: &AnalysisInput, config: &AnalysisConfig) -> Result<AnalysisReport, AnalysisError> {
    let fit = |data: &FringeData, k: u64| -> Result<FringeParams, AnalysisError> {
        fit_fringe(data, &FitConfig { seed: config.fit.seed.wrapping_add(k), ..config.fit.clone() })
    };
    let fringes = CoherenceSet { ab: fit(&input.ab, 0)?, ac: fit(&input.ac, 1)?, bc: fit(&input.bc, 2)? };
    let bounds = fidelity_bounds(&fringes, &config.bounds)?;
    let fringe_data = vec![input.ab.clone(), input.ac.clone(), input.bc.clone()];
    let (lower_sigma, upper_sigma) = if config.bounds_resamples == 0 {
        (None, None)
    } else {
        let [lo, hi] = propagate_uncertainty_many(&fringe_data, config.bounds_resamples, config.seed, |f| {
            let b = fidelity_bounds(&resampled_fits(f, &fringes)?, &config.bootstrap_bounds)?;
            Ok::<_, AnalysisError>([b.lower, b.upper])
        })?;
        (Some(lo.sigma), Some(hi.sigma))
    };
    let gme = gme_threshold(&noon_state(0.0, 0.0))?;

    let mut estimate = None;
    if let Some(pop) = &input.populations {
        let mut est = fidelity_from_measurements(pop, &fringes)?;
        let data = (fringe_data, pop.clone());
        let spread = propagate_uncertainty(&data, config.fidelity_resamples, config.seed, |(f, p)| {
            fidelity_from_measurements(p, &resampled_fits(f, &fringes)?).map(|e| e.fidelity)
        })?;
        est.fidelity_sigma = Some(spread.sigma);
        estimate = Some(est);
    }

    let (z, certified) = match &estimate {
        Some(e) => {
            let sigma = e.fidelity_sigma.unwrap_or(0.0);
            let z = certify_gme(e.fidelity, sigma, gme.threshold).ok();
            (z, e.fidelity > gme.threshold)
        }
        None => (None, bounds.lower > gme.threshold),
    };
    Ok(AnalysisReport {
        fidelity: estimate.as_ref().map(|e| e.fidelity),
        alpha1: estimate.as_ref().map(|e| e.alpha1),
        alpha2: estimate.as_ref().map(|e| e.alpha2),
        fidelity_sigma: estimate.as_ref().and_then(|e| e.fidelity_sigma),
        bounds: BoundsSummary { lower: bounds.lower, upper: bounds.upper, lower_sigma, upper_sigma, details: bounds },
        gme: GmeSummary { threshold: gme.threshold, z, certified, sigma2_max: gme.sigma2_max },
        fringes,
        estimate,
    })
}

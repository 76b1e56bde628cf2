use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{circular_sigma, sample_sigma, Resample};
use super::AnalysisError;
use crate::measurement::{wrap_pi, FringeData, FringeParams, ZERO_VISIBILITY};

/// Period of the coincidence fringe in the analyzer angle.
pub const FRINGE_PERIOD: f64 = FRAC_PI_4;

const MIN_POINTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_resamples() -> usize {
    1000
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { bootstrap_resamples: default_resamples(), seed: 0 }
    }
}

/// Valid `(θ, P₁₁)` points; count-mode points with no events are skipped.
fn fringe_points(data: &FringeData) -> Vec<(f64, f64)> {
    data.samples().iter().filter_map(|s| s.value.p11().ok().map(|p| (s.theta, p))).collect()
}

/// Least squares on `{1, cos 8θ, sin 8θ}`.
fn least_squares(points: &[(f64, f64)]) -> Result<[f64; 3], AnalysisError> {
    if points.len() < MIN_POINTS {
        return Err(AnalysisError::InsufficientPoints { found: points.len(), required: MIN_POINTS });
    }
    let n = points.len();
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    // a uniform grid of n points covers (hi − lo)·n/(n − 1)
    let covered = (hi - lo) * n as f64 / (n - 1) as f64;
    if covered < FRINGE_PERIOD - 1e-9 {
        return Err(AnalysisError::InsufficientCoverage { covered });
    }
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (8.0 * points[i].0).cos(),
        _ => (8.0 * points[i].0).sin(),
    });
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        return Err(AnalysisError::DegenerateDesign);
    }
    let a = svd.solve(&y, 0.0).map_err(|_| AnalysisError::DegenerateDesign)?;
    Ok([a[0], a[1], a[2]])
}

fn params_from_coefficients(a: [f64; 3]) -> (f64, f64, f64) {
    let offset = 2.0 * a[0];
    let visibility = 2.0 * a[1].hypot(a[2]);
    let phase = if visibility < ZERO_VISIBILITY { 0.0 } else { wrap_pi((-a[2]).atan2(a[1])) };
    (offset, visibility, phase)
}

/// Point estimate without uncertainties.
pub fn fit_fringe_exact(data: &FringeData) -> Result<FringeParams, AnalysisError> {
    let (a, v, phi) = params_from_coefficients(least_squares(&fringe_points(data))?);
    Ok(FringeParams::exact(a, v, phi))
}

/// Fits `C(θ) = A/2 + (V/2)cos(8θ + φ)`. Count data get Poisson-bootstrap
/// uncertainties; probability data are treated as noiseless.
pub fn fit_fringe(data: &FringeData, config: &FitConfig) -> Result<FringeParams, AnalysisError> {
    let mut params = fit_fringe_exact(data)?;
    if !data.is_counts() || config.bootstrap_resamples == 0 {
        return Ok(params);
    }
    let (mut offsets, mut visibilities, mut phases) = (Vec::new(), Vec::new(), Vec::new());
    for r in 0..config.bootstrap_resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        let resampled = data.resample(&mut rng);
        if let Ok(a) = least_squares(&fringe_points(&resampled)) {
            let (o, v, p) = params_from_coefficients(a);
            offsets.push(o);
            visibilities.push(v);
            phases.push(p);
        }
    }
    params.offset_sigma = sample_sigma(&offsets);
    params.visibility_sigma = sample_sigma(&visibilities);
    params.phase_sigma =
        if params.visibility < ZERO_VISIBILITY { f64::INFINITY } else { circular_sigma(&phases, params.phase) };
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ModeLabel;
    use crate::measurement::{default_thetas, FringeMetadata, FringeSample, FringeValue};

    fn probability_data(f: impl Fn(f64) -> f64, thetas: &[f64]) -> FringeData {
        let samples = thetas
            .iter()
            .map(|&theta| {
                let p11 = f(theta);
                FringeSample {
                    theta,
                    value: FringeValue::Probability { p11, p20: (1.0 - p11) / 2.0, p02: (1.0 - p11) / 2.0 },
                }
            })
            .collect();
        FringeData::new((ModeLabel::A, ModeLabel::B), samples, FringeMetadata::default()).unwrap()
    }

    #[test]
    fn exact_recovery_of_sinusoid() {
        let data = probability_data(|t| 0.5 + 0.4 * (8.0 * t + 1.0).cos(), &default_thetas(16));
        let p = fit_fringe(&data, &FitConfig::default()).unwrap();
        assert!((p.offset - 1.0).abs() < 1e-14);
        assert!((p.visibility - 0.8).abs() < 1e-14);
        assert!((p.phase - 1.0).abs() < 1e-13);
        assert_eq!(p.visibility_sigma, 0.0);
    }

    #[test]
    fn constant_data_has_zero_visibility() {
        let data = probability_data(|_| 0.25, &default_thetas(16));
        let p = fit_fringe(&data, &FitConfig::default()).unwrap();
        assert!((p.offset - 0.5).abs() < 1e-14);
        assert!(p.visibility < 1e-14);
        assert_eq!(p.phase, 0.0);
        assert!(p.phase_sigma.is_infinite());
    }

    #[test]
    fn rejects_short_or_narrow_scans() {
        let data = probability_data(|_| 0.5, &default_thetas(3));
        assert!(matches!(fit_fringe_exact(&data), Err(AnalysisError::InsufficientPoints { found: 3, .. })));
        let narrow: Vec<f64> = (0..10).map(|k| 0.01 * k as f64).collect();
        let data = probability_data(|_| 0.5, &narrow);
        assert!(matches!(fit_fringe_exact(&data), Err(AnalysisError::InsufficientCoverage { .. })));
    }

    #[test]
    fn aliased_angles_are_degenerate() {
        // every point sits at the same fringe phase
        let thetas: Vec<f64> = (0..5).map(|k| FRINGE_PERIOD * k as f64).collect();
        let data = probability_data(|_| 0.5, &thetas);
        assert_eq!(fit_fringe_exact(&data), Err(AnalysisError::DegenerateDesign));
    }
}

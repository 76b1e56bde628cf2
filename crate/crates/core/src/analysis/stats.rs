use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::fidelity::PopulationSet;
use super::AnalysisError;
use crate::measurement::{binomial, wrap_pi, FringeData, FringeValue};

pub const MIN_RESAMPLES: usize = 100;

/// Poisson draw; `lambda ≤ 0` gives 0.
pub fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 || !lambda.is_finite() {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
}

/// Data that can be redrawn under their own counting statistics. Noiseless
/// (probability-mode) data resample to themselves.
pub trait Resample: Sized {
    fn resample(&self, rng: &mut ChaCha8Rng) -> Self;
}

impl Resample for FringeData {
    fn resample(&self, rng: &mut ChaCha8Rng) -> Self {
        self.with_values(self.samples().iter().map(|s| match s.value {
            FringeValue::Counts { c11, c20, c02 } => FringeValue::Counts {
                c11: poisson(rng, c11 as f64),
                c20: poisson(rng, c20 as f64),
                c02: poisson(rng, c02 as f64),
            },
            p => p,
        }))
    }
}

impl Resample for PopulationSet {
    fn resample(&self, rng: &mut ChaCha8Rng) -> Self {
        let Some(n) = self.n_events else { return self.clone() };
        let counts = self.as_array().map(|p| poisson(rng, (p * n as f64).round()));
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return self.clone();
        }
        let mut out = PopulationSet::from_array(counts.map(|c| c as f64 / total as f64));
        out.n_events = Some(total);
        out.sigma = self.sigma;
        out
    }
}

impl<T: Resample> Resample for Vec<T> {
    fn resample(&self, rng: &mut ChaCha8Rng) -> Self {
        self.iter().map(|x| x.resample(rng)).collect()
    }
}

impl<A: Resample, B: Resample> Resample for (A, B) {
    fn resample(&self, rng: &mut ChaCha8Rng) -> Self {
        (self.0.resample(rng), self.1.resample(rng))
    }
}

impl<T: Resample> Resample for Option<T> {
    fn resample(&self, rng: &mut ChaCha8Rng) -> Self {
        self.as_ref().map(|x| x.resample(rng))
    }
}

/// Value of an analysis on the original data with its bootstrap spread.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub mean: f64,
    pub sigma: f64,
    pub valid_resamples: usize,
}

/// Parametric bootstrap: resample `input` `resamples` times (resample `r`
/// uses the stream `(seed, r)`), rerun `analysis`, and report the spread.
/// Resamples on which the analysis fails are dropped; more than half failing
/// is an error.
pub fn propagate_uncertainty<T: Resample, E>(
    input: &T,
    resamples: usize,
    seed: u64,
    analysis: impl Fn(&T) -> Result<f64, E>,
) -> Result<Estimate, AnalysisError>
where
    AnalysisError: From<E>,
{
    let [e] = propagate_uncertainty_many(input, resamples, seed, |x| analysis(x).map(|v| [v]))?;
    Ok(e)
}

/// [`propagate_uncertainty`] for an analysis with several outputs, all
/// computed on the same resamples.
pub fn propagate_uncertainty_many<T: Resample, E, const N: usize>(
    input: &T,
    resamples: usize,
    seed: u64,
    analysis: impl Fn(&T) -> Result<[f64; N], E>,
) -> Result<[Estimate; N], AnalysisError>
where
    AnalysisError: From<E>,
{
    if resamples < MIN_RESAMPLES {
        return Err(AnalysisError::TooFewResamples(resamples));
    }
    let value = analysis(input)?;
    let draws: Vec<[f64; N]> = (0..resamples)
        .filter_map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            analysis(&input.resample(&mut rng)).ok()
        })
        .collect();
    if 2 * draws.len() < resamples {
        return Err(AnalysisError::BootstrapFailed { valid: draws.len(), total: resamples });
    }
    Ok(std::array::from_fn(|i| {
        let values: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Estimate { value: value[i], mean, sigma: sample_sigma(&values), valid_resamples: values.len() }
    }))
}

/// Sample standard deviation; infinite with fewer than two values.
pub(crate) fn sample_sigma(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::INFINITY;
    }
    // shifted by the first value so identical inputs give exactly zero
    let n = values.len() as f64;
    let shift = values[0];
    let mean = values.iter().map(|v| v - shift).sum::<f64>() / n;
    (values.iter().map(|v| (v - shift - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Spread of angles measured as wrapped deviations from `center`.
pub(crate) fn circular_sigma(values: &[f64], center: f64) -> f64 {
    let deviations: Vec<f64> = values.iter().map(|v| wrap_pi(v - center)).collect();
    sample_sigma(&deviations)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub value: f64,
    pub sigma: f64,
}

/// `k/n` with independent Poisson errors on both counts:
/// `σ = (k/n)·√(1/k + 1/n)`.
pub fn success_ratio(with_unitary: u64, with_identity: u64) -> Result<RatioEstimate, AnalysisError> {
    if with_identity == 0 {
        return Err(AnalysisError::ZeroDenominator);
    }
    let (k, n) = (with_unitary as f64, with_identity as f64);
    let value = k / n;
    let sigma = if with_unitary == 0 { 0.0 } else { value * (1.0 / k + 1.0 / n).sqrt() };
    Ok(RatioEstimate { value, sigma })
}

/// Number of successful heralds in `trials` attempts.
pub fn simulate_herald_counts(probability: f64, trials: u64, seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    binomial(&mut rng, trials, probability)
}

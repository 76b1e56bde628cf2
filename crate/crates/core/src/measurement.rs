//! Coherence-extraction measurement: vacuum projection of one target mode,
//! polarization analysis of the remaining pair, pseudo-number-resolved
//! detection, noise channels and synthetic count sampling.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{fock_basis, fock_lift, CMatrix, DensityMatrix, FockError, FockSpaceState, ModeLabel, ModeUnitary};
use crate::optics::{hwp, qwp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasurementError {
    #[error("mode {0} is not a target mode")]
    NotTargetMode(ModeLabel),
    #[error("expected a two-photon state on {expected} modes, got {photons} photons on {modes} modes")]
    WrongBasis { expected: usize, photons: u32, modes: usize },
    #[error("theta values must be finite and strictly increasing (violated at sample {0})")]
    ThetaOrder(usize),
    #[error("no samples")]
    Empty,
    #[error("probability {value} at sample {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("all counts are zero")]
    ZeroCounts,
    #[error("{name} = {value} is outside {range}")]
    ParameterOutOfRange { name: &'static str, value: f64, range: &'static str },
    #[error("count sampling needs probability-mode data")]
    NotProbabilityMode,
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Conditional two-photon state of two target modes after projecting the
/// third onto vacuum. `rho` lives on the basis `20, 11, 02` of `pair` and is
/// normalized unless `weight` is zero, in which case it is the zero matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoModeState {
    pub pair: (ModeLabel, ModeLabel),
    pub rho: DensityMatrix,
    pub weight: f64,
}

impl TwoModeState {
    pub fn rho_20_02(&self) -> Complex64 {
        self.rho.matrix()[(0, 2)]
    }

    pub fn diagonal(&self) -> [f64; 3] {
        let m = self.rho.matrix();
        [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re]
    }
}

/// The pair left over when `k` is projected out, in mode order.
pub fn complementary_pair(k: ModeLabel) -> Result<(ModeLabel, ModeLabel), MeasurementError> {
    match k {
        ModeLabel::A => Ok((ModeLabel::B, ModeLabel::C)),
        ModeLabel::B => Ok((ModeLabel::A, ModeLabel::C)),
        ModeLabel::C => Ok((ModeLabel::A, ModeLabel::B)),
        ModeLabel::Herald => Err(MeasurementError::NotTargetMode(k)),
    }
}

/// The target mode that is projected out to analyze `pair`.
pub fn projected_mode(pair: (ModeLabel, ModeLabel)) -> Result<ModeLabel, MeasurementError> {
    ModeLabel::TARGETS
        .into_iter()
        .find(|&k| complementary_pair(k).ok() == Some(pair))
        .ok_or(MeasurementError::NotTargetMode(ModeLabel::Herald))
}

fn require_three_mode(rho: &DensityMatrix) -> Result<(), MeasurementError> {
    let b = rho.basis();
    if b.n_photons() != 2 || b.n_modes() != 3 {
        return Err(MeasurementError::WrongBasis { expected: 3, photons: b.n_photons(), modes: b.n_modes() });
    }
    Ok(())
}

pub fn vacuum_project(rho: &DensityMatrix, k: ModeLabel) -> Result<TwoModeState, MeasurementError> {
    let pair = complementary_pair(k)?;
    require_three_mode(rho)?;
    let outcome = rho.herald(k, 0)?;
    Ok(TwoModeState { pair, rho: outcome.state, weight: outcome.probability })
}

/// `HWP(θ)·QWP(π/4)`: the quarter-wave plate acts first.
pub fn meas_unitary(theta: f64) -> ModeUnitary {
    hwp(theta).then_after(&qwp(FRAC_PI_4)).expect("2×2")
}

/// Probabilities of the `11`, `20` and `02` outcomes after the analyzer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub p11: f64,
    pub p20: f64,
    pub p02: f64,
}

pub fn outcome_probabilities(state: &TwoModeState, theta: f64) -> OutcomeProbabilities {
    let basis = state.rho.basis();
    let lift = fock_lift(&meas_unitary(theta), basis).expect("two-mode basis");
    let out = &lift * state.rho.matrix() * lift.adjoint();
    OutcomeProbabilities { p20: out[(0, 0)].re, p11: out[(1, 1)].re, p02: out[(2, 2)].re }
}

/// Coincidence probability `⟨1,1|ρ(θ)|1,1⟩`.
pub fn coincidence_prob(state: &TwoModeState, theta: f64) -> f64 {
    outcome_probabilities(state, theta).p11
}

/// Offset `A`, cosine amplitude `V` and phase `φ` of `C(θ) = A/2 + (V/2)cos(8θ + φ)`,
/// with one-sigma uncertainties.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeParams {
    pub offset: f64,
    pub visibility: f64,
    /// In `(−π, π]`; zero when the visibility vanishes.
    pub phase: f64,
    pub offset_sigma: f64,
    pub visibility_sigma: f64,
    pub phase_sigma: f64,
}

/// Visibilities below this carry no phase.
pub const ZERO_VISIBILITY: f64 = 1e-12;

impl FringeParams {
    pub fn exact(offset: f64, visibility: f64, phase: f64) -> Self {
        let phase_sigma = if visibility.abs() < ZERO_VISIBILITY { f64::INFINITY } else { 0.0 };
        FringeParams {
            offset,
            visibility,
            phase: wrap_pi(phase),
            offset_sigma: 0.0,
            visibility_sigma: 0.0,
            phase_sigma,
        }
    }

    /// `V/A`, or 0 for an empty fringe.
    pub fn contrast(&self) -> f64 {
        if self.offset > 0.0 {
            self.visibility / self.offset
        } else {
            0.0
        }
    }

    /// First-order uncertainty of the contrast.
    pub fn contrast_sigma(&self) -> f64 {
        if self.offset <= 0.0 {
            return f64::INFINITY;
        }
        let c = self.contrast();
        ((self.visibility_sigma / self.offset).powi(2) + (c * self.offset_sigma / self.offset).powi(2)).sqrt()
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        0.5 * self.offset + 0.5 * self.visibility * (8.0 * theta + self.phase).cos()
    }
}

/// Maps an angle to `(−π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Fringe parameters implied by a conditional state: `A = ρ₂₀,₂₀ + ρ₀₂,₀₂`,
/// `V = 2|ρ₂₀,₀₂|`, `ρ₂₀,₀₂ = |ρ₂₀,₀₂| e^{−iφ}`.
pub fn fringe_params_from_rho(state: &TwoModeState) -> FringeParams {
    let [d20, _, d02] = state.diagonal();
    let coh = state.rho_20_02();
    let v = 2.0 * coh.norm();
    let phase = if v < ZERO_VISIBILITY { 0.0 } else { -coh.arg() };
    FringeParams::exact(d20 + d02, v, phase)
}

/// One analyzer setting: either outcome probabilities or detected counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FringeValue {
    Probability { p11: f64, p20: f64, p02: f64 },
    Counts { c11: u64, c20: u64, c02: u64 },
}

impl FringeValue {
    /// Pseudo-number-resolved coincidence fraction.
    pub fn p11(&self) -> Result<f64, MeasurementError> {
        match *self {
            FringeValue::Probability { p11, .. } => Ok(p11),
            FringeValue::Counts { c11, c20, c02 } => pnr_normalized_probability(c11, c20, c02),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeSample {
    pub theta: f64,
    pub value: FringeValue,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FringeMetadata {
    #[serde(default)]
    pub integration_seconds: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub events_per_point: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FringeDataRaw")]
pub struct FringeData {
    pair: (ModeLabel, ModeLabel),
    samples: Vec<FringeSample>,
    pub metadata: FringeMetadata,
}

#[derive(Deserialize)]
struct FringeDataRaw {
    pair: (ModeLabel, ModeLabel),
    samples: Vec<FringeSample>,
    #[serde(default)]
    metadata: FringeMetadata,
}

impl TryFrom<FringeDataRaw> for FringeData {
    type Error = MeasurementError;

    fn try_from(raw: FringeDataRaw) -> Result<Self, Self::Error> {
        FringeData::new(raw.pair, raw.samples, raw.metadata)
    }
}

impl FringeData {
    pub fn new(
        pair: (ModeLabel, ModeLabel),
        samples: Vec<FringeSample>,
        metadata: FringeMetadata,
    ) -> Result<Self, MeasurementError> {
        if !pair.0.is_target() {
            return Err(MeasurementError::NotTargetMode(pair.0));
        }
        if !pair.1.is_target() {
            return Err(MeasurementError::NotTargetMode(pair.1));
        }
        if samples.is_empty() {
            return Err(MeasurementError::Empty);
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.theta.is_finite() || (i > 0 && s.theta <= samples[i - 1].theta) {
                return Err(MeasurementError::ThetaOrder(i));
            }
            if let FringeValue::Probability { p11, p20, p02 } = s.value {
                for value in [p11, p20, p02] {
                    if !(-1e-12..=1.0 + 1e-12).contains(&value) {
                        return Err(MeasurementError::ProbabilityOutOfRange { index: i, value });
                    }
                }
            }
        }
        Ok(FringeData { pair, samples, metadata })
    }

    pub fn pair(&self) -> (ModeLabel, ModeLabel) {
        self.pair
    }

    pub fn samples(&self) -> &[FringeSample] {
        &self.samples
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta).collect()
    }

    pub fn is_counts(&self) -> bool {
        matches!(self.samples[0].value, FringeValue::Counts { .. })
    }

    /// Same pair, thetas and metadata with new values; order is preserved.
    pub fn with_values(&self, values: impl IntoIterator<Item = FringeValue>) -> Self {
        let samples =
            self.samples.iter().zip(values).map(|(s, value)| FringeSample { theta: s.theta, value }).collect();
        FringeData { pair: self.pair, samples, metadata: self.metadata.clone() }
    }
}

/// `n` uniform analyzer angles over one fringe period `[0, π/4)`.
pub fn default_thetas(n: usize) -> Vec<f64> {
    (0..n).map(|k| FRAC_PI_4 * k as f64 / n as f64).collect()
}

pub const DEFAULT_POINTS_PER_PERIOD: usize = 16;

pub fn fringe_scan(
    rho: &DensityMatrix,
    pair: (ModeLabel, ModeLabel),
    thetas: &[f64],
) -> Result<FringeData, MeasurementError> {
    let state = vacuum_project(rho, projected_mode(pair)?)?;
    let samples = thetas
        .iter()
        .map(|&theta| {
            let p = outcome_probabilities(&state, theta);
            let clip = |x: f64| x.clamp(0.0, 1.0);
            FringeSample {
                theta,
                value: FringeValue::Probability { p11: clip(p.p11), p20: clip(p.p20), p02: clip(p.p02) },
            }
        })
        .collect();
    FringeData::new(pair, samples, FringeMetadata::default())
}

/// Draws `n_events` multinomial outcomes per analyzer setting. Point `k` uses
/// the stream `(seed, k)`, so each point is independent of the others.
pub fn sample_counts(fringe: &FringeData, n_events: u64, seed: u64) -> Result<FringeData, MeasurementError> {
    let mut values = Vec::with_capacity(fringe.samples.len());
    for (k, s) in fringe.samples.iter().enumerate() {
        let FringeValue::Probability { p11, p20, p02 } = s.value else {
            return Err(MeasurementError::NotProbabilityMode);
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let total = (p11 + p20 + p02).max(f64::MIN_POSITIVE);
        let c11 = binomial(&mut rng, n_events, p11 / total);
        let rest = n_events - c11;
        let rest_prob = p20 + p02;
        let c20 = if rest_prob > 0.0 { binomial(&mut rng, rest, p20 / rest_prob) } else { 0 };
        values.push(FringeValue::Counts { c11, c20, c02: rest - c20 });
    }
    let mut out = fringe.with_values(values);
    out.metadata.seed = Some(seed);
    out.metadata.events_per_point = Some(n_events);
    Ok(out)
}

pub(crate) fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
}

/// `c11 / (c11 + c20 + c02)`.
pub fn pnr_normalized_probability(c11: u64, c20: u64, c02: u64) -> Result<f64, MeasurementError> {
    let total = c11 + c20 + c02;
    if total == 0 {
        return Err(MeasurementError::ZeroCounts);
    }
    Ok(c11 as f64 / total as f64)
}

/// Probability that a doubly occupied mode, fanned out by a beam splitter of
/// reflectivity `ratio`, fires both detectors: `P₂ · 2r(1 − r)`.
pub fn pnr_split_model(two_photon_mode_prob: f64, ratio: f64) -> Result<f64, MeasurementError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(MeasurementError::ParameterOutOfRange { name: "splitting ratio", value: ratio, range: "(0, 1)" });
    }
    if !(0.0..=1.0).contains(&two_photon_mode_prob) {
        return Err(MeasurementError::ParameterOutOfRange {
            name: "two-photon probability",
            value: two_photon_mode_prob,
            range: "[0, 1]",
        });
    }
    Ok(two_photon_mode_prob * 2.0 * ratio * (1.0 - ratio))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// `(1 − p)ρ + p·I/dim`.
    White { p: f64 },
    /// Coherences among the NOON terms scaled by `1 − d`.
    Dephase { d: f64 },
    /// Weight `q` moved uniformly onto `|110⟩, |101⟩, |011⟩`.
    BadEvent { q: f64 },
}

const NOON_TERMS: [[u32; 3]; 3] = [[2, 0, 0], [0, 2, 0], [0, 0, 2]];
const BAD_TERMS: [[u32; 3]; 3] = [[1, 1, 0], [1, 0, 1], [0, 1, 1]];

pub fn apply_noise(rho: &DensityMatrix, model: NoiseModel) -> Result<DensityMatrix, MeasurementError> {
    let (name, value) = match model {
        NoiseModel::White { p } => ("p", p),
        NoiseModel::Dephase { d } => ("d", d),
        NoiseModel::BadEvent { q } => ("q", q),
    };
    if !(0.0..=1.0).contains(&value) {
        return Err(MeasurementError::ParameterOutOfRange { name, value, range: "[0, 1]" });
    }
    let basis = rho.basis().clone();
    let mut m = rho.matrix().clone();
    match model {
        NoiseModel::White { p } => {
            let dim = basis.len() as f64;
            m *= Complex64::new(1.0 - p, 0.0);
            for i in 0..basis.len() {
                m[(i, i)] += Complex64::new(p / dim, 0.0);
            }
        }
        NoiseModel::Dephase { d } => {
            require_three_mode(rho)?;
            let idx: Vec<usize> =
                NOON_TERMS.iter().map(|s| basis.index_of_occupations(s).expect("noon term")).collect();
            for &i in &idx {
                for &j in &idx {
                    if i != j {
                        m[(i, j)] *= Complex64::new(1.0 - d, 0.0);
                    }
                }
            }
        }
        NoiseModel::BadEvent { q } => {
            require_three_mode(rho)?;
            m *= Complex64::new(1.0 - q, 0.0);
            for s in BAD_TERMS {
                let i = basis.index_of_occupations(&s).expect("bad term");
                m[(i, i)] += Complex64::new(q / 3.0, 0.0);
            }
        }
    }
    Ok(DensityMatrix::new(basis, m)?)
}

pub fn apply_noise_chain(rho: &DensityMatrix, models: &[NoiseModel]) -> Result<DensityMatrix, MeasurementError> {
    models.iter().try_fold(rho.clone(), |acc, &m| apply_noise(&acc, m))
}

/// Diagonal of a two-photon three-mode state in canonical order
/// `200, 110, 101, 020, 011, 002`.
pub fn populations(rho: &DensityMatrix) -> Result<[f64; 6], MeasurementError> {
    require_three_mode(rho)?;
    let m = rho.matrix();
    Ok(std::array::from_fn(|i| m[(i, i)].re.max(0.0)))
}

/// Multinomial sample of `n_events` population measurements in canonical order.
pub fn sample_population_counts(rho: &DensityMatrix, n_events: u64, seed: u64) -> Result<[u64; 6], MeasurementError> {
    let p = populations(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 6];
    let mut remaining_n = n_events;
    let mut remaining_p: f64 = p.iter().sum();
    for i in 0..6 {
        if i == 5 {
            counts[i] = remaining_n;
            break;
        }
        let c = if remaining_p > 0.0 { binomial(&mut rng, remaining_n, p[i] / remaining_p) } else { 0 };
        counts[i] = c;
        remaining_n -= c;
        remaining_p -= p[i];
    }
    Ok(counts)
}

/// A state on the two-photon two-mode basis `20, 11, 02` of `pair`.
pub fn two_mode_state(pair: (ModeLabel, ModeLabel), matrix: CMatrix) -> Result<TwoModeState, MeasurementError> {
    let rho = DensityMatrix::new(fock_basis(2, 2)?, matrix)?;
    let weight = rho.trace();
    Ok(TwoModeState { pair, rho: rho.normalized(), weight })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::noon_state;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn projector(occ: &[u32; 3]) -> DensityMatrix {
        let basis = fock_basis(2, 3).unwrap();
        let i = basis.index_of_occupations(occ).unwrap();
        let mut m = CMatrix::zeros(6, 6);
        m[(i, i)] = c(1.0, 0.0);
        DensityMatrix::new(basis, m).unwrap()
    }

    #[test]
    fn vacuum_projection_of_noon() {
        let s = vacuum_project(&noon_state(0.0, 0.0).to_density(), ModeLabel::C).unwrap();
        assert_eq!(s.pair, (ModeLabel::A, ModeLabel::B));
        assert!((s.weight - 2.0 / 3.0).abs() < 1e-12);
        let m = s.rho.matrix();
        for (i, j) in [(0, 0), (2, 2), (0, 2), (2, 0)] {
            assert!((m[(i, j)] - c(0.5, 0.0)).norm() < 1e-12);
        }
        assert!(m[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn vacuum_projection_trivial_cases() {
        let s = vacuum_project(&projector(&[1, 1, 0]), ModeLabel::C).unwrap();
        assert!((s.weight - 1.0).abs() < 1e-12);
        assert!((s.rho.matrix()[(1, 1)] - c(1.0, 0.0)).norm() < 1e-12);
        let s = vacuum_project(&projector(&[1, 0, 1]), ModeLabel::C).unwrap();
        assert_eq!(s.weight, 0.0);
        assert!(matches!(
            vacuum_project(&projector(&[1, 0, 1]), ModeLabel::Herald),
            Err(MeasurementError::NotTargetMode(ModeLabel::Herald))
        ));
    }

    #[test]
    fn analyzer_at_zero() {
        let u = meas_unitary(0.0);
        let k = 1.0 / 2f64.sqrt();
        let expected = [[c(0.0, -k), c(-k, 0.0)], [c(k, 0.0), c(0.0, k)]];
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert!((u.matrix()[(i, j)] - want).norm() < 1e-15);
            }
        }
        let shifted = meas_unitary(0.7 + PI);
        assert!((meas_unitary(0.7).matrix() - shifted.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn coincidences_of_fixed_states() {
        let pair = (ModeLabel::A, ModeLabel::B);
        let mut m11 = CMatrix::zeros(3, 3);
        m11[(1, 1)] = c(1.0, 0.0);
        let mut m20 = CMatrix::zeros(3, 3);
        m20[(0, 0)] = c(1.0, 0.0);
        let s11 = two_mode_state(pair, m11).unwrap();
        let s20 = two_mode_state(pair, m20).unwrap();
        for k in 0..20 {
            let theta = 0.1 * k as f64;
            assert!(coincidence_prob(&s11, theta).abs() < 1e-14);
            assert!((coincidence_prob(&s20, theta) - 0.5).abs() < 1e-14);
        }
        let noon = vacuum_project(&noon_state(0.0, 0.0).to_density(), ModeLabel::C).unwrap();
        assert!((coincidence_prob(&noon, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fringe_parameters_of_noon_pairs() {
        let (a1, a2) = (0.7, -2.1);
        let rho = noon_state(a1, a2).to_density();
        let ab = fringe_params_from_rho(&vacuum_project(&rho, ModeLabel::C).unwrap());
        assert!((ab.offset - 1.0).abs() < 1e-12 && (ab.visibility - 1.0).abs() < 1e-12);
        assert!((ab.phase - a1).abs() < 1e-12);
        let ac = fringe_params_from_rho(&vacuum_project(&rho, ModeLabel::B).unwrap());
        assert!((ac.phase - wrap_pi(a2)).abs() < 1e-12);
        let bc = fringe_params_from_rho(&vacuum_project(&rho, ModeLabel::A).unwrap());
        assert!((bc.phase - wrap_pi(a2 - a1)).abs() < 1e-12);
    }

    #[test]
    fn zero_visibility_has_no_phase() {
        let mut m = CMatrix::zeros(3, 3);
        m[(1, 1)] = c(1.0, 0.0);
        let p = fringe_params_from_rho(&two_mode_state((ModeLabel::A, ModeLabel::B), m).unwrap());
        assert_eq!((p.offset, p.visibility, p.phase), (0.0, 0.0, 0.0));
        assert!(p.phase_sigma.is_infinite());
    }

    #[test]
    fn scan_of_noon_and_dephased_noon() {
        let thetas = default_thetas(16);
        let rho = noon_state(0.0, 0.0).to_density();
        let scan = fringe_scan(&rho, (ModeLabel::A, ModeLabel::B), &thetas).unwrap();
        for s in scan.samples() {
            let expected = 0.5 + 0.5 * (8.0 * s.theta).cos();
            assert!((s.value.p11().unwrap() - expected).abs() < 1e-9);
        }
        let flat = apply_noise(&rho, NoiseModel::Dephase { d: 1.0 }).unwrap();
        let scan = fringe_scan(&flat, (ModeLabel::A, ModeLabel::B), &thetas).unwrap();
        for s in scan.samples() {
            assert!((s.value.p11().unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let rho = noon_state(0.3, 0.1).to_density();
        let scan = fringe_scan(&rho, (ModeLabel::A, ModeLabel::C), &default_thetas(16)).unwrap();
        let a = sample_counts(&scan, 1000, 42).unwrap();
        let b = sample_counts(&scan, 1000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_counts(&scan, 1000, 43).unwrap());
        for (s, p) in a.samples().iter().zip(scan.samples()) {
            let FringeValue::Counts { c11, c20, c02 } = s.value else { panic!() };
            assert_eq!(c11 + c20 + c02, 1000);
            if p.value.p11().unwrap() == 0.0 {
                assert_eq!(c11, 0);
            }
        }
        assert!(matches!(sample_counts(&a, 10, 1), Err(MeasurementError::NotProbabilityMode)));
    }

    #[test]
    fn pnr_normalization_and_split() {
        assert_eq!(pnr_normalized_probability(50, 25, 25).unwrap(), 0.5);
        assert_eq!(pnr_normalized_probability(0, 10, 10).unwrap(), 0.0);
        assert_eq!(pnr_normalized_probability(0, 0, 0), Err(MeasurementError::ZeroCounts));
        assert!((pnr_split_model(1.0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((pnr_split_model(1.0, 0.3).unwrap() - 0.42).abs() < 1e-15);
        assert!(pnr_split_model(1.0, 1.0).is_err());
        assert!(pnr_split_model(1.0, 0.0).is_err());
    }

    #[test]
    fn noise_channels() {
        let rho = noon_state(0.0, 0.0).to_density();
        assert_eq!(apply_noise(&rho, NoiseModel::White { p: 0.0 }).unwrap(), rho);
        let bad = apply_noise(&rho, NoiseModel::BadEvent { q: 0.15 }).unwrap();
        let p = populations(&bad).unwrap();
        assert!((p[0] + p[3] + p[5] - 0.85).abs() < 1e-12);
        assert!((bad.trace() - 1.0).abs() < 1e-12);
        let white = apply_noise(&rho, NoiseModel::White { p: 0.3 }).unwrap();
        assert!((white.trace() - 1.0).abs() < 1e-12);
        assert!(apply_noise(&rho, NoiseModel::Dephase { d: 1.5 }).is_err());
        assert!(apply_noise(&rho, NoiseModel::White { p: -0.1 }).is_err());
    }

    #[test]
    fn theta_order_is_validated() {
        let v = FringeValue::Counts { c11: 1, c20: 0, c02: 0 };
        let samples = vec![FringeSample { theta: 0.2, value: v }, FringeSample { theta: 0.1, value: v }];
        let pair = (ModeLabel::A, ModeLabel::B);
        assert_eq!(FringeData::new(pair, samples, FringeMetadata::default()), Err(MeasurementError::ThetaOrder(1)));
    }

    #[test]
    fn wrap_is_half_open() {
        assert!((wrap_pi(-PI) - PI).abs() < 1e-15);
        assert!((wrap_pi(PI) - PI).abs() < 1e-15);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}

//! Search for four-mode unitaries that herald the three-mode NOON state from
//! `|1,1,1,0⟩`, and fitting of the Sagnac circuit parameters to a unitary.

use std::f64::consts::{PI, TAU};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{transition_amplitude, CMatrix, FockError, FockState, ModeUnitary};
use crate::optics::{matrix_distance, Circuit, OpticsError, SagnacSettings};
use crate::optim::{golden_max, nelder_mead, NelderMeadOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} chart parameters, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
}

/// Number of real parameters of the U(4) chart.
pub const CHART_DIM: usize = 16;

/// Occupations of the three single photons entering modes A, B, C.
pub const HERALD_INPUT: [u32; 4] = [1, 1, 1, 0];

/// The reference heralding unitary in the column convention of [`ModeUnitary`].
///
/// Its usual tabulation lists the input modes along rows, so the table is
/// transposed here; read column-wise it would herald with probability 1/2 and
/// a NOON fidelity of only 2/9.
pub fn reference_unitary() -> ModeUnitary {
    let a = 1.0 / 2f64.sqrt();
    let b = 1.0 / 6f64.sqrt();
    let d = (2.0f64 / 3.0).sqrt();
    let r = |x: f64| Complex64::new(x, 0.0);
    let i = |x: f64| Complex64::new(0.0, x);
    let table = [
        [r(-a), r(b), i(-b), r(b)],
        [r(-a), r(-b), i(b), r(-b)],
        [r(0.0), r(-d), i(-b), r(b)],
        [r(0.0), r(0.0), r(-a), i(a)],
    ];
    ModeUnitary::new(CMatrix::from_fn(4, 4, |row, col| table[col][row])).expect("reference table is unitary")
}

/// Heralded NOON fidelity (maximized over the two relative phases) and
/// heralding probability for the input `|1,1,1,0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeraldedScore {
    pub fidelity: f64,
    pub success_probability: f64,
}

/// Amplitudes of `|n_A n_B n_C⟩|1⟩_herald` in the output, for the six
/// two-photon target states in canonical order.
pub fn heralded_amplitudes(u: &ModeUnitary) -> Result<[Complex64; 6], SynthError> {
    if u.dim() != 4 {
        return Err(FockError::DimensionMismatch { expected: 4, found: u.dim() }.into());
    }
    const TARGETS: [[u32; 4]; 6] = [[2, 0, 0, 1], [1, 1, 0, 1], [1, 0, 1, 1], [0, 2, 0, 1], [0, 1, 1, 1], [0, 0, 2, 1]];
    let input = FockState::new(HERALD_INPUT.to_vec());
    let mut out = [Complex64::new(0.0, 0.0); 6];
    for (slot, t) in out.iter_mut().zip(TARGETS) {
        *slot = transition_amplitude(u, &input, &FockState::new(t.to_vec()))?;
    }
    Ok(out)
}

/// Phase-maximized NOON overlap of a pure two-photon three-mode state given in
/// canonical order: the optimum aligns the three NOON amplitudes, giving
/// `(|ψ₂₀₀| + |ψ₀₂₀| + |ψ₀₀₂|)² / 3‖ψ‖²`. Returns `(fidelity, α₁, α₂)`.
pub fn max_noon_overlap(amps: &[Complex64; 6]) -> (f64, f64, f64) {
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if norm <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let (a, b, c) = (amps[0], amps[3], amps[5]);
    let f = (a.norm() + b.norm() + c.norm()).powi(2) / (3.0 * norm);
    let alpha1 = (b.arg() - a.arg()).rem_euclid(TAU);
    let alpha2 = (c.arg() - a.arg()).rem_euclid(TAU);
    (f.min(1.0), alpha1, alpha2)
}

pub fn heralded_objective(u: &ModeUnitary) -> Result<HeraldedScore, SynthError> {
    let amps = heralded_amplitudes(u)?;
    let success_probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let (fidelity, _, _) = max_noon_overlap(&amps);
    Ok(HeraldedScore { fidelity, success_probability: success_probability.min(1.0) })
}

/// `U = exp(iH)` with `H` Hermitian: `params[0..4]` is the diagonal, the rest
/// are (re, im) pairs of the upper triangle in row-major order.
pub fn parameterize(params: &[f64]) -> Result<ModeUnitary, SynthError> {
    if params.len() != CHART_DIM {
        return Err(SynthError::WrongLength { expected: CHART_DIM, found: params.len() });
    }
    let mut h = CMatrix::zeros(4, 4);
    for i in 0..4 {
        h[(i, i)] = Complex64::new(params[i], 0.0);
    }
    let mut k = 4;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let z = Complex64::new(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l)));
    Ok(ModeUnitary::new(&v * phases * v.adjoint())?)
}

fn default_restarts() -> usize {
    20
}
fn default_max_iters() -> usize {
    2000
}
fn default_initial_step() -> f64 {
    1.0
}
fn default_max_step() -> f64 {
    10.0
}
fn default_armijo() -> f64 {
    1e-4
}
fn default_fd_step() -> f64 {
    1e-6
}
fn default_fidelity_tolerance() -> f64 {
    1e-10
}
fn default_success_floor() -> f64 {
    0.25 - 1e-3
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    #[serde(default = "default_restarts")]
    pub n_restarts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
    /// Sufficient-decrease constant of the backtracking line search.
    #[serde(default = "default_armijo")]
    pub armijo: f64,
    /// Central-difference step for the gradient.
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// Stop a restart once `1 − F` falls below this.
    #[serde(default = "default_fidelity_tolerance")]
    pub fidelity_tolerance: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_success_floor")]
    pub success_prob_floor: f64,
    /// Fit the Sagnac topology to converged unitaries to fill `circuit_cost`.
    #[serde(default = "default_true")]
    pub fit_circuits: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_restarts: default_restarts(),
            max_iters: default_max_iters(),
            initial_step: default_initial_step(),
            max_step: default_max_step(),
            armijo: default_armijo(),
            fd_step: default_fd_step(),
            fidelity_tolerance: default_fidelity_tolerance(),
            rng_seed: 0,
            success_prob_floor: default_success_floor(),
            fit_circuits: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.n_restarts == 0 {
            return bad("n_restarts must be at least 1");
        }
        if !(self.initial_step > 0.0 && self.max_step >= self.initial_step) {
            return bad("need 0 < initial_step <= max_step");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo must lie in (0, 1)");
        }
        if self.fd_step.is_nan() || self.fd_step <= 0.0 {
            return bad("fd_step must be positive");
        }
        if self.fidelity_tolerance.is_nan() || self.fidelity_tolerance < 0.0 {
            return bad("fidelity_tolerance must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.success_prob_floor) {
            return bad("success_prob_floor must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthResult {
    pub unitary: ModeUnitary,
    pub fidelity: f64,
    pub success_probability: f64,
    /// Element count of the Sagnac realization when it fits within 1e-4.
    pub circuit_cost: Option<usize>,
    pub circuit_residual: Option<f64>,
    pub restart_index: usize,
    pub iterations: usize,
    pub converged: bool,
    pub meets_success_floor: bool,
}

/// Residual below which a fitted circuit counts as a realization.
pub const CIRCUIT_COST_RESIDUAL: f64 = 1e-4;

/// Runs `n_restarts` independent descents and returns every result, best
/// first: fidelity (to 1e-9), then success probability, then restart index.
pub fn synthesize(config: &SynthConfig) -> Result<Vec<SynthResult>, SynthError> {
    config.validate()?;
    let mut results = (0..config.n_restarts).map(|r| run_restart(config, r)).collect::<Result<Vec<_>, _>>()?;
    results.sort_by(|a, b| {
        let fa = (a.fidelity * 1e9).round();
        let fb = (b.fidelity * 1e9).round();
        fb.total_cmp(&fa)
            .then(b.success_probability.total_cmp(&a.success_probability))
            .then(a.restart_index.cmp(&b.restart_index))
    });
    Ok(results)
}

/// The RNG stream owned by one restart.
pub fn restart_rng(seed: u64, restart_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart_index as u64);
    rng
}

fn run_restart(config: &SynthConfig, restart_index: usize) -> Result<SynthResult, SynthError> {
    let mut rng = restart_rng(config.rng_seed, restart_index);
    let mut x: Vec<f64> = (0..CHART_DIM).map(|_| rng.random_range(-PI..PI)).collect();
    let loss = |p: &[f64]| -> Result<f64, SynthError> { Ok(-heralded_objective(&parameterize(p)?)?.fidelity) };

    let mut fx = loss(&x)?;
    let mut step = config.initial_step;
    let mut iterations = 0;
    let mut converged = 1.0 + fx <= config.fidelity_tolerance;
    while iterations < config.max_iters && !converged {
        iterations += 1;
        let grad = central_gradient(loss, &x, config.fd_step)?;
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2 == 0.0 {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        while t >= 1e-14 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - t * gi).collect();
            let ft = loss(&trial)?;
            if ft <= fx - config.armijo * t * g2 {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, ft)) => {
                x = trial;
                fx = ft;
                step = (2.0 * t).min(config.max_step);
            }
            None => break,
        }
        converged = 1.0 + fx <= config.fidelity_tolerance;
    }

    let unitary = parameterize(&x)?;
    let score = heralded_objective(&unitary)?;
    let (circuit_cost, circuit_residual) = if config.fit_circuits && score.fidelity >= 1.0 - 1e-6 {
        let fit = fit_circuit_angles(&unitary, &FitOptions { n_starts: 16, seed: config.rng_seed })?;
        let cost = (fit.residual <= CIRCUIT_COST_RESIDUAL).then_some(SagnacSettings::ELEMENT_COUNT);
        (cost, Some(fit.residual))
    } else {
        (None, None)
    };
    Ok(SynthResult {
        unitary,
        fidelity: score.fidelity,
        success_probability: score.success_probability,
        circuit_cost,
        circuit_residual,
        restart_index,
        iterations,
        converged,
        meets_success_floor: score.success_probability >= config.success_prob_floor,
    })
}

pub fn central_gradient<E>(f: impl Fn(&[f64]) -> Result<f64, E>, x: &[f64], h: f64) -> Result<Vec<f64>, E> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorPhaseFit {
    pub settings: SagnacSettings,
    pub score: HeraldedScore,
}

/// Resolution of the initial mirror-phase scan.
pub const MIRROR_SCAN_STEP: f64 = 1e-4;

/// Fits the common mirror phase of the Sagnac circuit for fixed wave-plate
/// angles: a scan over `[0, 2π)` at [`MIRROR_SCAN_STEP`] followed by golden
/// section refinement within one scan step.
pub fn fit_mirror_phase(angles: &SagnacSettings) -> Result<MirrorPhaseFit, SynthError> {
    let score_at = |phi: f64| -> Result<HeraldedScore, SynthError> {
        heralded_objective(&SagnacSettings { mirror_phase: phi, ..*angles }.unitary())
    };
    let n = (TAU / MIRROR_SCAN_STEP).ceil() as usize;
    let (mut best_phi, mut best_f) = (0.0, f64::NEG_INFINITY);
    for k in 0..n {
        let phi = k as f64 * MIRROR_SCAN_STEP;
        let f = score_at(phi)?.fidelity;
        if f > best_f {
            best_f = f;
            best_phi = phi;
        }
    }
    let (phi, f) = golden_max(
        |p| score_at(p).map(|s| s.fidelity).unwrap_or(f64::NEG_INFINITY),
        best_phi - MIRROR_SCAN_STEP,
        best_phi + MIRROR_SCAN_STEP,
        1e-13,
    );
    let phi = if f >= best_f { phi } else { best_phi };
    let settings = SagnacSettings { mirror_phase: phi.rem_euclid(TAU), ..*angles };
    Ok(MirrorPhaseFit { settings, score: score_at(settings.mirror_phase)? })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { n_starts: 64, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitFit {
    pub settings: SagnacSettings,
    pub circuit: Circuit,
    /// [`crate::optics::unitary_distance`] between the composed circuit and the target.
    pub residual: f64,
}

/// Least-squares fit of the four wave-plate angles and the mirror phase of
/// the Sagnac topology to `target`, by multi-start Nelder–Mead on the squared
/// unitary distance. The first start is the reported configuration.
pub fn fit_circuit_angles(target: &ModeUnitary, options: &FitOptions) -> Result<CircuitFit, SynthError> {
    if target.dim() != 4 {
        return Err(FockError::DimensionMismatch { expected: 4, found: target.dim() }.into());
    }
    let objective =
        |p: &[f64]| matrix_distance(SagnacSettings::from_vec(p).unitary().matrix(), target.matrix()).powi(2);
    let coarse = NelderMeadOptions { initial_step: 0.3, max_evals: 4000, f_tol: 1e-30, x_tol: 1e-12 };
    let polish = NelderMeadOptions { initial_step: 1e-3, max_evals: 4000, f_tol: 1e-32, x_tol: 1e-14 };

    let mut rng = restart_rng(options.seed, usize::MAX);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in 0..options.n_starts.max(1) {
        let x0: Vec<f64> = if start == 0 {
            SagnacSettings::reported(0.0).to_vec().to_vec()
        } else {
            (0..5).map(|_| rng.random_range(0.0..PI)).collect()
        };
        let (x, _) = nelder_mead(objective, &x0, &coarse);
        let (x, v) = nelder_mead(objective, &x, &polish);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((x, v));
        }
        if best.as_ref().is_some_and(|(_, b)| *b < 1e-24) {
            break;
        }
    }
    let (x, v) = best.expect("at least one start");
    let settings = SagnacSettings::from_vec(&x);
    Ok(CircuitFit { circuit: settings.circuit(), residual: v.max(0.0).sqrt(), settings })
}

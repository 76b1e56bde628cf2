use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::fock::{FockError, FockSpaceState, ModeLabel, PureState};

/// Single modes split off in the three bipartitions `A|BC`, `B|AC`, `C|AB`.
pub const BIPARTITIONS: [ModeLabel; 3] = [ModeLabel::A, ModeLabel::B, ModeLabel::C];

/// Largest product-state overlap: the maximum over bipartitions of the
/// largest squared Schmidt coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmeReport {
    pub threshold: f64,
    /// Per bipartition, in the order of [`BIPARTITIONS`].
    pub sigma2_max: [f64; 3],
    #[serde(default)]
    pub z_score: Option<f64>,
}

/// Column index of the occupations of the two remaining modes.
fn rest_index(a: u32, b: u32) -> usize {
    // (0,0) (1,0) (0,1) (2,0) (1,1) (0,2)
    let n = a + b;
    (n * (n + 1) / 2 + b) as usize
}

pub fn gme_threshold(target: &PureState) -> Result<GmeReport, AnalysisError> {
    let basis = target.basis();
    if basis.n_photons() != 2 || basis.n_modes() != 3 {
        return Err(FockError::DimensionMismatch { expected: 6, found: basis.len() }.into());
    }
    let norm = target.norm_sqr();
    if norm <= 0.0 {
        return Err(AnalysisError::InvalidInput("zero state".into()));
    }
    let mut sigma2_max = [0.0; 3];
    for (slot, k) in sigma2_max.iter_mut().zip(BIPARTITIONS) {
        let k = k.index();
        let mut c = DMatrix::<Complex64>::zeros(3, 6);
        for (state, amp) in basis.states().iter().zip(target.amplitudes().iter()) {
            let occ = state.occupations();
            let rest: Vec<u32> = (0..3).filter(|&m| m != k).map(|m| occ[m]).collect();
            c[(occ[k] as usize, rest_index(rest[0], rest[1]))] = *amp;
        }
        let s = c.singular_values();
        *slot = s.max().powi(2) / norm;
    }
    let threshold = sigma2_max.iter().copied().fold(0.0, f64::max);
    Ok(GmeReport { threshold, sigma2_max, z_score: None })
}

/// Standard deviations by which `fidelity` exceeds `threshold`.
pub fn certify_gme(fidelity: f64, sigma: f64, threshold: f64) -> Result<f64, AnalysisError> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(AnalysisError::NonPositiveSigma(sigma));
    }
    Ok((fidelity - threshold) / sigma)
}

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::fock::{DensityMatrix, FockSpaceState};
use crate::measurement::{populations, FringeParams};
use crate::optim::golden_max;

/// Diagonal of the two-photon three-mode state, with optional per-entry
/// uncertainties and the number of events it was estimated from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSet {
    #[serde(rename = "P_200")]
    pub p200: f64,
    #[serde(rename = "P_020")]
    pub p020: f64,
    #[serde(rename = "P_002")]
    pub p002: f64,
    #[serde(rename = "P_110")]
    pub p110: f64,
    #[serde(rename = "P_101")]
    pub p101: f64,
    #[serde(rename = "P_011")]
    pub p011: f64,
    /// Uncertainties in canonical order `200, 110, 101, 020, 011, 002`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[f64; 6]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_events: Option<u64>,
}

const NAMES: [&str; 6] = ["P_200", "P_110", "P_101", "P_020", "P_011", "P_002"];

impl PopulationSet {
    /// From values in canonical order `200, 110, 101, 020, 011, 002`.
    pub fn from_array(p: [f64; 6]) -> Self {
        PopulationSet {
            p200: p[0],
            p110: p[1],
            p101: p[2],
            p020: p[3],
            p011: p[4],
            p002: p[5],
            sigma: None,
            n_events: None,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.p200, self.p110, self.p101, self.p020, self.p011, self.p002]
    }

    pub fn from_density(rho: &DensityMatrix) -> Result<Self, AnalysisError> {
        Ok(Self::from_array(populations(rho)?))
    }

    /// Relative frequencies with binomial uncertainties.
    pub fn from_counts(counts: [u64; 6]) -> Result<Self, AnalysisError> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(AnalysisError::ZeroDenominator);
        }
        let n = total as f64;
        let p = counts.map(|c| c as f64 / n);
        let mut set = Self::from_array(p);
        set.sigma = Some(p.map(|x| (x * (1.0 - x) / n).sqrt()));
        set.n_events = Some(total);
        Ok(set)
    }

    pub fn noon_sum(&self) -> f64 {
        self.p200 + self.p020 + self.p002
    }

    fn sigma_at(&self, i: usize) -> f64 {
        self.sigma.map_or(0.0, |s| s[i])
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let p = self.as_array();
        for (i, &value) in p.iter().enumerate() {
            let tol = 1e-9 + 3.0 * self.sigma_at(i);
            if !value.is_finite() || value < -tol || value > 1.0 + tol {
                return Err(AnalysisError::InvalidPopulation { name: NAMES[i], value });
            }
        }
        let total: f64 = p.iter().sum();
        let sum_sigma = (0..6).map(|i| self.sigma_at(i).powi(2)).sum::<f64>().sqrt();
        if total > 1.0 + 1e-9 + 3.0 * sum_sigma {
            return Err(AnalysisError::InvalidPopulation { name: "sum", value: total });
        }
        Ok(())
    }
}

/// `ρ₂₀₀,₀₂₀`, `ρ₂₀₀,₀₀₂`, `ρ₀₂₀,₀₀₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoonCoherences {
    pub ab: Complex64,
    pub ac: Complex64,
    pub bc: Complex64,
}

impl NoonCoherences {
    pub fn from_density(rho: &DensityMatrix) -> Result<Self, AnalysisError> {
        populations(rho)?;
        let b = rho.basis();
        let idx = |occ: [u32; 3]| b.index_of_occupations(&occ).expect("two photons in three modes");
        let (a, bb, c) = (idx([2, 0, 0]), idx([0, 2, 0]), idx([0, 0, 2]));
        let m = rho.matrix();
        Ok(NoonCoherences { ab: m[(a, bb)], ac: m[(a, c)], bc: m[(bb, c)] })
    }
}

/// Fringe parameters of the three target pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSet {
    pub ab: FringeParams,
    pub ac: FringeParams,
    pub bc: FringeParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMethod {
    Full,
    Bounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub fidelity: f64,
    /// In `[0, 2π)`.
    pub alpha1: f64,
    pub alpha2: f64,
    pub fidelity_sigma: Option<f64>,
    pub alpha1_sigma: Option<f64>,
    pub alpha2_sigma: Option<f64>,
    pub method: EstimateMethod,
}

/// `⟨noon(α₁, α₂)|ρ|noon(α₁, α₂)⟩` from the NOON populations and coherences.
pub fn noon_fidelity(pop: &PopulationSet, coh: &NoonCoherences, alpha1: f64, alpha2: f64) -> f64 {
    let e = |a: f64| Complex64::from_polar(1.0, a);
    let cross = e(alpha1) * coh.ab + e(alpha2) * coh.ac + e(alpha2 - alpha1) * coh.bc;
    (pop.noon_sum() + 2.0 * cross.re) / 3.0
}

const PHASE_GRID: usize = 64;
const PHASE_TOL: f64 = 1e-10;

/// Maximizes the NOON fidelity over both relative phases: a 64×64 grid on
/// `[0, 2π)²`, then alternating golden-section refinement.
pub fn max_fidelity_over_phases(pop: &PopulationSet, coh: &NoonCoherences) -> Result<FidelityEstimate, AnalysisError> {
    pop.validate()?;
    check_physical(pop, coh)?;
    let f = |a1: f64, a2: f64| noon_fidelity(pop, coh, a1, a2);
    let step = TAU / PHASE_GRID as f64;
    let (mut a1, mut a2, mut best) = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..PHASE_GRID {
        for j in 0..PHASE_GRID {
            let (x, y) = (i as f64 * step, j as f64 * step);
            let v = f(x, y);
            if v > best {
                (a1, a2, best) = (x, y, v);
            }
        }
    }
    for _ in 0..200 {
        let (n1, v1) = golden_max(|x| f(x, a2), a1 - step, a1 + step, 1e-13);
        let (n2, v2) = golden_max(|y| f(n1, y), a2 - step, a2 + step, 1e-13);
        if v1.max(v2) < best {
            break;
        }
        let moved = (n1 - a1).abs().max((n2 - a2).abs());
        (a1, a2, best) = (n1, n2, f(n1, n2));
        if moved < PHASE_TOL {
            break;
        }
    }
    // Newton polish: the golden search resolves phases only to √ε
    for _ in 0..5 {
        let e = |a: f64| Complex64::from_polar(1.0, a);
        let (u, v, w) = (e(a1) * coh.ab, e(a2) * coh.ac, e(a2 - a1) * coh.bc);
        let (g1, g2) = (w.im - u.im, -v.im - w.im);
        let (h11, h22, h12) = (-(u.re + w.re), -(v.re + w.re), w.re);
        let det = h11 * h22 - h12 * h12;
        if !(h11 < 0.0 && det > 0.0) {
            break;
        }
        let (d1, d2) = ((-g1 * h22 + g2 * h12) / det, (g1 * h12 - g2 * h11) / det);
        let value = f(a1 + d1, a2 + d2);
        if value < best - 1e-15 {
            break;
        }
        (a1, a2, best) = (a1 + d1, a2 + d2, value.max(best));
    }
    Ok(FidelityEstimate {
        fidelity: best.clamp(0.0, 1.0),
        alpha1: a1.rem_euclid(TAU),
        alpha2: a2.rem_euclid(TAU),
        fidelity_sigma: None,
        alpha1_sigma: None,
        alpha2_sigma: None,
        method: EstimateMethod::Full,
    })
}

fn check_physical(pop: &PopulationSet, coh: &NoonCoherences) -> Result<(), AnalysisError> {
    let s = |i: usize| pop.sigma.map_or(0.0, |s| s[i]);
    for (name, c, (pi, si), (pj, sj)) in [
        ("AB", coh.ab, (pop.p200, s(0)), (pop.p020, s(3))),
        ("AC", coh.ac, (pop.p200, s(0)), (pop.p002, s(5))),
        ("BC", coh.bc, (pop.p020, s(3)), (pop.p002, s(5))),
    ] {
        let excess = c.norm_sqr() - pi.max(0.0) * pj.max(0.0);
        let tol = 1e-9 + 3.0 * (pj * si).hypot(pi * sj);
        if excess > tol {
            return Err(AnalysisError::UnphysicalCoherence { pair: name, excess });
        }
    }
    Ok(())
}

/// Coherence magnitudes from fringe visibilities, `|ρ_ij| = (V/2)(P_i + P_j + P_ij)`,
/// and phases from `ρ_ij = |ρ_ij| e^{−iφ}`; then the phase-optimized fidelity.
pub fn fidelity_from_measurements(pop: &PopulationSet, coh: &CoherenceSet) -> Result<FidelityEstimate, AnalysisError> {
    let rho = |f: &FringeParams, weight: f64| Complex64::from_polar(0.5 * f.visibility * weight, -f.phase);
    let coherences = NoonCoherences {
        ab: rho(&coh.ab, pop.p200 + pop.p020 + pop.p110),
        ac: rho(&coh.ac, pop.p200 + pop.p002 + pop.p101),
        bc: rho(&coh.bc, pop.p020 + pop.p002 + pop.p011),
    };
    max_fidelity_over_phases(pop, &coherences)
}

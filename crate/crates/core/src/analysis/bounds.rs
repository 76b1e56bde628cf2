//! Fidelity bounds from the three fringes alone.
//!
//! With populations unknown, write them through the ratios `r_B = P₀₂₀/P₂₀₀`,
//! `r_C = P₀₀₂/P₂₀₀`. Each fringe fixes its pair's conditional offset `A` and
//! contrast `c = V/A`, which determine `P₂₀₀` and the coherence magnitudes
//! for given ratios. Positivity of each pair's 2×2 NOON block restricts the
//! ratios; the fidelity, maximized over the NOON phases, is then minimized
//! and maximized over the remaining feasible ratios.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::fidelity::CoherenceSet;
use super::AnalysisError;
use crate::measurement::FringeParams;
use crate::optim::golden_max;

/// Search box for ratios whose feasible interval is unbounded.
pub const R_CAP: (f64, f64) = (1e-6, 1e6);

/// Points of the subsampled first pass over δ.
const COARSE_DELTA_POINTS: usize = 64;

/// Relative slack on the pairwise positivity constraints.
const FEASIBILITY_SLACK: f64 = 1e-12;

/// Roots of `v²r² + (2v² − 4)r + v² = 0`: the ratios `r` allowed by
/// `v²(1 + r)² ≤ 4r`. `v = 0` leaves `r` unconstrained.
pub fn feasible_interval(v: f64) -> Result<(f64, f64), AnalysisError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(AnalysisError::ContrastOutOfRange(v));
    }
    if v == 0.0 {
        return Ok((0.0, f64::INFINITY));
    }
    let v2 = v * v;
    let root = 2.0 - v2 + 2.0 * (1.0 - v2).sqrt();
    Ok((v2 / root, root / v2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    /// Log-spaced points per ratio axis.
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    /// Uniform points over `δ ∈ [0, 2π)`.
    #[serde(default = "default_delta")]
    pub delta_points: usize,
    /// Points per axis of the local pass around each extremum.
    #[serde(default = "default_refine")]
    pub refine_points: usize,
}

fn default_grid() -> usize {
    500
}
fn default_delta() -> usize {
    2048
}
fn default_refine() -> usize {
    41
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { grid_points: default_grid(), delta_points: default_delta(), refine_points: default_refine() }
    }
}

/// Intermediates of the fidelity at one pair of ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremePoint {
    pub r_b: f64,
    pub r_c: f64,
    pub p_a: f64,
    pub s_a: f64,
    pub s_c: f64,
    /// `α₂ − α₁` at the optimum.
    pub delta: f64,
    /// `δ + φ_AB − φ_AC`.
    pub big_delta: f64,
    /// `|S_A + S_C e^{iΔ}|`.
    pub r: f64,
    /// `arg(S_A + S_C e^{iΔ})`.
    pub phi: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    /// Searched ranges of `r_B` and `r_C`.
    pub r_b_interval: [f64; 2],
    pub r_c_interval: [f64; 2],
    pub at_lower: ExtremePoint,
    pub at_upper: ExtremePoint,
    pub feasible_points: usize,
    pub warnings: Vec<String>,
}

struct Pair {
    inv_offset: f64,
    contrast: f64,
    phase: f64,
}

struct Problem {
    ab: Pair,
    ac: Pair,
    bc: Pair,
    deltas: Vec<f64>,
    /// `cos(δ_k + φ_AB − φ_AC)`
    cos_big: Vec<f64>,
    /// `cos(δ_k − φ_BC)`
    cos_bc: Vec<f64>,
}

fn prepare_pair(name: &'static str, f: &FringeParams, warnings: &mut Vec<String>) -> Result<Pair, AnalysisError> {
    let invalid = |reason: String| AnalysisError::InvalidFringe { pair: name, reason };
    if !(f.offset.is_finite() && f.visibility.is_finite() && f.phase.is_finite()) {
        return Err(invalid("non-finite fringe parameters".into()));
    }
    if f.offset <= 0.0 {
        return Err(invalid(format!("offset {} must be positive", f.offset)));
    }
    if f.visibility < 0.0 {
        return Err(invalid(format!("visibility {} must be non-negative", f.visibility)));
    }
    let mut offset = f.offset;
    if offset > 1.0 {
        if offset - 1.0 > 1e-9 && offset - 1.0 > 3.0 * f.offset_sigma {
            return Err(invalid(format!("offset {offset} exceeds 1")));
        }
        if offset - 1.0 > 1e-9 {
            warnings.push(format!("offset of pair {name} ({offset:.6}) clipped to 1"));
        }
        offset = 1.0;
    }
    let mut contrast = f.visibility / f.offset;
    if contrast > 1.0 {
        if contrast - 1.0 > 1e-9 && contrast - 1.0 > 3.0 * f.contrast_sigma() {
            return Err(AnalysisError::ContrastAboveOne { pair: name, value: contrast });
        }
        if contrast - 1.0 > 1e-9 {
            warnings.push(format!("contrast of pair {name} ({contrast:.6}) clipped to 1"));
        }
        contrast = 1.0;
    }
    Ok(Pair { inv_offset: 1.0 / offset, contrast, phase: f.phase })
}

impl Problem {
    fn new(coh: &CoherenceSet, delta_points: usize, warnings: &mut Vec<String>) -> Result<Self, AnalysisError> {
        if delta_points < 3 {
            return Err(AnalysisError::InvalidInput("delta_points must be at least 3".into()));
        }
        let ab = prepare_pair("AB", &coh.ab, warnings)?;
        let ac = prepare_pair("AC", &coh.ac, warnings)?;
        let bc = prepare_pair("BC", &coh.bc, warnings)?;
        let deltas: Vec<f64> = (0..delta_points).map(|k| TAU * k as f64 / delta_points as f64).collect();
        let cos_big = deltas.iter().map(|d| (d + ab.phase - ac.phase).cos()).collect();
        let cos_bc = deltas.iter().map(|d| (d - bc.phase).cos()).collect();
        Ok(Problem { ab, ac, bc, deltas, cos_big, cos_bc })
    }

    fn feasible(&self, rb: f64, rc: f64) -> bool {
        let c = self.bc.contrast;
        c * c * (rb + rc).powi(2) <= 4.0 * rb * rc * (1.0 + FEASIBILITY_SLACK)
    }

    fn p_a(&self, rb: f64, rc: f64) -> f64 {
        1.0 / (1.0
            + (1.0 + rb) * (self.ab.inv_offset - 1.0)
            + (1.0 + rc) * (self.ac.inv_offset - 1.0)
            + (rb + rc) * self.bc.inv_offset)
    }

    fn sums(&self, rb: f64, rc: f64) -> (f64, f64, f64) {
        (self.ab.contrast * (1.0 + rb), self.ac.contrast * (1.0 + rc), self.bc.contrast * (rb + rc))
    }

    /// `R(δ) + W cos(δ − φ_BC)`, the δ-dependent part of the bracket.
    fn phase_term(&self, s_a: f64, s_c: f64, w: f64, delta: f64) -> f64 {
        let big = delta + self.ab.phase - self.ac.phase;
        (s_a * s_a + s_c * s_c + 2.0 * s_a * s_c * big.cos()).max(0.0).sqrt() + w * (delta - self.bc.phase).cos()
    }

    /// Maximum over the δ grid with parabolic interpolation; returns the
    /// value and the best grid index. Every local maximum of the δ curve is
    /// broad, so the fine grid is searched only around the best few maxima of
    /// a stride-subsampled pass.
    fn grid_phase_max(&self, s_a: f64, s_c: f64, w: f64) -> (f64, usize) {
        let a = s_a * s_a + s_c * s_c;
        let b = 2.0 * s_a * s_c;
        let n = self.deltas.len();
        let at = |k: usize| (a + b * self.cos_big[k]).max(0.0).sqrt() + w * self.cos_bc[k];
        let stride = (n / COARSE_DELTA_POINTS).max(1);
        let (mut best, mut best_k) = (f64::NEG_INFINITY, 0);
        if stride == 1 {
            for k in 0..n {
                let v = at(k);
                if v > best {
                    (best, best_k) = (v, k);
                }
            }
        } else {
            let m = n / stride;
            let coarse: Vec<f64> = (0..m).map(|j| at(j * stride)).collect();
            let mut peaks: Vec<usize> =
                (0..m).filter(|&j| coarse[j] >= coarse[(j + m - 1) % m] && coarse[j] >= coarse[(j + 1) % m]).collect();
            peaks.sort_by(|&x, &y| coarse[y].total_cmp(&coarse[x]));
            for &j in peaks.iter().take(3) {
                let center = j * stride;
                for offset in 0..=2 * stride {
                    let k = (center + n + offset - stride) % n;
                    let v = at(k);
                    if v > best {
                        (best, best_k) = (v, k);
                    }
                }
            }
        }
        let (ym, yp) = (at((best_k + n - 1) % n), at((best_k + 1) % n));
        let curvature = ym - 2.0 * best + yp;
        if curvature < 0.0 {
            let t = (0.5 * (ym - yp) / curvature).clamp(-1.0, 1.0);
            best -= 0.25 * (ym - yp) * t;
        }
        (best, best_k)
    }

    fn coarse_fidelity(&self, rb: f64, rc: f64) -> f64 {
        let (s_a, s_c, w) = self.sums(rb, rc);
        let (m, _) = self.grid_phase_max(s_a, s_c, w);
        self.p_a(rb, rc) / 3.0 * (1.0 + rb + rc + m)
    }

    fn exact(&self, rb: f64, rc: f64) -> ExtremePoint {
        let (s_a, s_c, w) = self.sums(rb, rc);
        let (_, k) = self.grid_phase_max(s_a, s_c, w);
        let h = TAU / self.deltas.len() as f64;
        let d0 = self.deltas[k];
        let (delta, m) = golden_max(|d| self.phase_term(s_a, s_c, w, d), d0 - h, d0 + h, 1e-12);
        let at_grid = self.phase_term(s_a, s_c, w, d0);
        let (delta, m) = if m >= at_grid { (delta, m) } else { (d0, at_grid) };
        let big_delta = delta + self.ab.phase - self.ac.phase;
        let (y, x) = (s_c * big_delta.sin(), s_a + s_c * big_delta.cos());
        let p_a = self.p_a(rb, rc);
        let alpha1 = (self.ab.phase - y.atan2(x)).rem_euclid(TAU);
        ExtremePoint {
            r_b: rb,
            r_c: rc,
            p_a,
            s_a,
            s_c,
            delta: delta.rem_euclid(TAU),
            big_delta: big_delta.rem_euclid(TAU),
            r: x.hypot(y),
            phi: y.atan2(x),
            alpha1,
            alpha2: (alpha1 + delta).rem_euclid(TAU),
            fidelity: (p_a / 3.0 * (1.0 + rb + rc + m)).clamp(0.0, 1.0),
        }
    }
}

fn capped_interval(v: f64) -> Result<[f64; 2], AnalysisError> {
    let (lo, hi) = feasible_interval(v)?;
    Ok([lo.max(R_CAP.0), hi.min(R_CAP.1)])
}

fn log_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi / lo - 1.0 < 1e-14 {
        return vec![(lo * hi).sqrt()];
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp().clamp(lo, hi)).collect()
}

/// Log-space step of an axis, zero for a degenerate axis.
fn log_step(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        0.0
    } else {
        (axis[1] / axis[0]).ln()
    }
}

#[derive(Clone, Copy)]
struct Extremes {
    min: (f64, f64, f64),
    max: (f64, f64, f64),
    count: usize,
}

fn scan(problem: &Problem, rbs: &[f64], rcs: &[f64], acc: &mut Option<Extremes>) {
    for &rb in rbs {
        for &rc in rcs {
            if !problem.feasible(rb, rc) {
                continue;
            }
            let f = problem.coarse_fidelity(rb, rc);
            let e = acc.get_or_insert(Extremes { min: (f, rb, rc), max: (f, rb, rc), count: 0 });
            e.count += 1;
            if f < e.min.0 {
                e.min = (f, rb, rc);
            }
            if f > e.max.0 {
                e.max = (f, rb, rc);
            }
        }
    }
}

fn local_axis(center: f64, step: f64, bounds: [f64; 2], n: usize) -> Vec<f64> {
    if step == 0.0 {
        return vec![center];
    }
    log_axis((center * (-step).exp()).max(bounds[0]), (center * step.exp()).min(bounds[1]), n)
}

/// Lower and upper fidelity over all population ratios compatible with the
/// three fringes.
pub fn fidelity_bounds(coh: &CoherenceSet, config: &BoundsConfig) -> Result<BoundsReport, AnalysisError> {
    if config.grid_points == 0 {
        return Err(AnalysisError::InvalidInput("grid_points must be positive".into()));
    }
    let mut warnings = Vec::new();
    let problem = Problem::new(coh, config.delta_points, &mut warnings)?;
    let rb_box = capped_interval(problem.ab.contrast)?;
    let rc_box = capped_interval(problem.ac.contrast)?;
    let rbs = log_axis(rb_box[0], rb_box[1], config.grid_points);
    let rcs = log_axis(rc_box[0], rc_box[1], config.grid_points);

    let mut acc = None;
    scan(&problem, &rbs, &rcs, &mut acc);
    // a unit BC contrast confines the region to r_B = r_C, which the grid may miss
    for &r in rbs.iter().chain(&rcs) {
        if (rb_box[0]..=rb_box[1]).contains(&r) && (rc_box[0]..=rc_box[1]).contains(&r) {
            scan(&problem, &[r], &[r], &mut acc);
        }
    }
    let coarse = acc.ok_or(AnalysisError::EmptyFeasibleRegion)?;
    let (sb, sc) = (log_step(&rbs), log_step(&rcs));
    let mut refined = Some(coarse);
    for (_, rb, rc) in [coarse.min, coarse.max] {
        let lb = local_axis(rb, sb, rb_box, config.refine_points);
        let lc = local_axis(rc, sc, rc_box, config.refine_points);
        scan(&problem, &lb, &lc, &mut refined);
    }
    let refined = refined.expect("coarse scan found points");

    let at_lower = problem.exact(refined.min.1, refined.min.2);
    let at_upper = problem.exact(refined.max.1, refined.max.2);
    Ok(BoundsReport {
        lower: at_lower.fidelity.min(at_upper.fidelity),
        upper: at_upper.fidelity.max(at_lower.fidelity),
        r_b_interval: rb_box,
        r_c_interval: rc_box,
        at_lower,
        at_upper,
        feasible_points: coarse.count,
        warnings,
    })
}

/// Phase-optimized fidelity when the population ratios are known.
pub fn fidelity_at_ratios(
    coh: &CoherenceSet,
    r_b: f64,
    r_c: f64,
    config: &BoundsConfig,
) -> Result<ExtremePoint, AnalysisError> {
    if !(r_b > 0.0 && r_c > 0.0 && r_b.is_finite() && r_c.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!("ratios must be positive, got ({r_b}, {r_c})")));
    }
    let mut warnings = Vec::new();
    let problem = Problem::new(coh, config.delta_points, &mut warnings)?;
    let pair_ok = |c: f64, r: f64| c * c * (1.0 + r).powi(2) <= 4.0 * r * (1.0 + 1e-9);
    if !pair_ok(problem.ab.contrast, r_b) || !pair_ok(problem.ac.contrast, r_c) {
        return Err(AnalysisError::EmptyFeasibleRegion);
    }
    let c = problem.bc.contrast;
    if c * c * (r_b + r_c).powi(2) > 4.0 * r_b * r_c * (1.0 + 1e-9) {
        return Err(AnalysisError::EmptyFeasibleRegion);
    }
    Ok(problem.exact(r_b, r_c))
}

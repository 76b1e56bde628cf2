//! Jones matrices of the interferometer elements in the four-mode basis
//! `(H,1), (V,1), (H,2), (V,2)` and composition of element sequences.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{CMatrix, FockError, ModeUnitary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("malformed circuit element #{index}: {reason}")]
    MalformedElement { index: usize, reason: String },
    #[error("wave plates act on path 1 or 2, got {0}")]
    InvalidPath(u8),
    #[error(transparent)]
    Fock(#[from] FockError),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Half-wave plate at angle `theta`: `-i [[cos2θ, sin2θ], [sin2θ, -cos2θ]]`.
pub fn hwp(theta: f64) -> ModeUnitary {
    let (s, co) = (2.0 * theta).sin_cos();
    ModeUnitary::new_unchecked(CMatrix::from_row_slice(2, 2, &[c(0.0, -co), c(0.0, -s), c(0.0, -s), c(0.0, co)]))
}

/// Quarter-wave plate at angle `theta`:
/// `(1/√2) [[1 - i cos2θ, -i sin2θ], [-i sin2θ, 1 + i cos2θ]]`.
pub fn qwp(theta: f64) -> ModeUnitary {
    let (s, co) = (2.0 * theta).sin_cos();
    let k = FRAC_1_SQRT_2;
    ModeUnitary::new_unchecked(CMatrix::from_row_slice(
        2,
        2,
        &[c(k, -k * co), c(0.0, -k * s), c(0.0, -k * s), c(k, k * co)],
    ))
}

/// Polarizing beam splitter: H transmitted, V swaps paths and picks up `i`.
pub fn pbs() -> ModeUnitary {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    ModeUnitary::new_unchecked(CMatrix::from_row_slice(4, 4, &[o, z, z, z, z, z, z, i, z, z, o, z, z, i, z, z]))
}

/// Mirror pair: phase `phi` on the vertical component of both paths.
pub fn mirror(phi: f64) -> ModeUnitary {
    let e = Complex64::from_polar(1.0, phi);
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    ModeUnitary::new_unchecked(CMatrix::from_row_slice(4, 4, &[o, z, z, z, z, e, z, z, z, z, o, z, z, z, z, e]))
}

/// Places a 2×2 polarization transformation on one spatial path.
pub fn embed(path: u8, v: &ModeUnitary) -> Result<ModeUnitary, OpticsError> {
    if v.dim() != 2 {
        return Err(FockError::DimensionMismatch { expected: 2, found: v.dim() }.into());
    }
    let offset = match path {
        1 => 0,
        2 => 2,
        other => return Err(OpticsError::InvalidPath(other)),
    };
    // Re-validate: callers may hand in deserialized matrices.
    let v = ModeUnitary::new(v.matrix().clone())?;
    let mut m = CMatrix::identity(4, 4);
    m.view_mut((offset, offset), (2, 2)).copy_from(v.matrix());
    Ok(ModeUnitary::new_unchecked(m))
}

/// One optical element. Angles and phases are in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CircuitElement {
    Hwp { path: u8, angle_rad: f64 },
    Qwp { path: u8, angle_rad: f64 },
    Pbs,
    Mirror { phase_rad: f64 },
}

impl CircuitElement {
    pub fn matrix(&self) -> Result<ModeUnitary, OpticsError> {
        match *self {
            CircuitElement::Hwp { path, angle_rad } => embed(path, &hwp(finite(angle_rad)?)),
            CircuitElement::Qwp { path, angle_rad } => embed(path, &qwp(finite(angle_rad)?)),
            CircuitElement::Pbs => Ok(pbs()),
            CircuitElement::Mirror { phase_rad } => Ok(mirror(finite(phase_rad)?)),
        }
    }
}

fn finite(x: f64) -> Result<f64, OpticsError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(OpticsError::MalformedElement { index: 0, reason: format!("non-finite angle {x}") })
    }
}

/// Elements in the order light traverses them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub elements: Vec<CircuitElement>,
}

impl Circuit {
    pub fn new(elements: Vec<CircuitElement>) -> Self {
        Circuit { elements }
    }

    /// `c1 ++ c2`: `self` first, then `other`.
    pub fn then(&self, other: &Circuit) -> Circuit {
        Circuit { elements: self.elements.iter().chain(&other.elements).cloned().collect() }
    }
}

/// Product of the element matrices, the first element rightmost.
pub fn compose(circuit: &Circuit) -> Result<ModeUnitary, OpticsError> {
    let mut total = ModeUnitary::identity(4);
    for (index, element) in circuit.elements.iter().enumerate() {
        let m = element.matrix().map_err(|e| match e {
            OpticsError::MalformedElement { reason, .. } => OpticsError::MalformedElement { index, reason },
            OpticsError::InvalidPath(p) => {
                OpticsError::MalformedElement { index, reason: format!("wave plate path {p} is not 1 or 2") }
            }
            other => other,
        })?;
        total = m.then_after(&total)?;
    }
    Ok(total)
}

/// Global-phase-invariant distance `√(1 − |tr(U†V)|/n)`, in `[0, 1]`.
///
/// Evaluated as `‖U − e^{iχ}V‖_F / √(2n)` with the optimal `χ`, which equals
/// the trace form for unitaries but does not lose precision near zero.
pub fn unitary_distance(u: &ModeUnitary, v: &ModeUnitary) -> Result<f64, OpticsError> {
    if u.dim() != v.dim() {
        return Err(FockError::DimensionMismatch { expected: u.dim(), found: v.dim() }.into());
    }
    Ok(matrix_distance(u.matrix(), v.matrix()))
}

pub(crate) fn matrix_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let n = u.nrows() as f64;
    let tr: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let phase = if tr.norm() > 0.0 { tr.conj() / tr.norm() } else { c(1.0, 0.0) };
    let diff: f64 = u.iter().zip(v.iter()).map(|(a, b)| (a - phase * b).norm_sqr()).sum();
    (diff / (2.0 * n)).sqrt().min(1.0)
}

/// Free parameters of the displaced-Sagnac realization. The element sequence
/// is `HWP1(path 1), PBS, HWP2(path 2), M, M, HWP3(path 2), M, PBS, QWP1(path 2)`
/// with the same mirror phase on all three reflections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SagnacSettings {
    pub hwp1: f64,
    pub hwp2: f64,
    pub hwp3: f64,
    pub qwp1: f64,
    pub mirror_phase: f64,
}

impl SagnacSettings {
    pub const HWP1_PATH: u8 = 1;
    pub const HWP2_PATH: u8 = 2;
    pub const HWP3_PATH: u8 = 2;
    pub const QWP1_PATH: u8 = 2;

    /// Wave-plate angles of the experimental configuration with a given mirror phase.
    pub fn reported(mirror_phase: f64) -> Self {
        SagnacSettings { hwp1: PI / 8.0, hwp2: 0.848 * PI, hwp3: 0.0, qwp1: 0.75 * PI, mirror_phase }
    }

    pub fn from_vec(p: &[f64]) -> Self {
        SagnacSettings { hwp1: p[0], hwp2: p[1], hwp3: p[2], qwp1: p[3], mirror_phase: p[4] }
    }

    pub fn to_vec(&self) -> [f64; 5] {
        [self.hwp1, self.hwp2, self.hwp3, self.qwp1, self.mirror_phase]
    }

    pub fn circuit(&self) -> Circuit {
        let m = CircuitElement::Mirror { phase_rad: self.mirror_phase };
        Circuit::new(vec![
            CircuitElement::Hwp { path: Self::HWP1_PATH, angle_rad: self.hwp1 },
            CircuitElement::Pbs,
            CircuitElement::Hwp { path: Self::HWP2_PATH, angle_rad: self.hwp2 },
            m.clone(),
            m.clone(),
            CircuitElement::Hwp { path: Self::HWP3_PATH, angle_rad: self.hwp3 },
            m,
            CircuitElement::Pbs,
            CircuitElement::Qwp { path: Self::QWP1_PATH, angle_rad: self.qwp1 },
        ])
    }

    /// Composes the circuit without going through element validation.
    pub fn unitary(&self) -> ModeUnitary {
        let mut u = embed(Self::HWP1_PATH, &hwp(self.hwp1)).expect("valid path");
        for m in [
            pbs(),
            embed(Self::HWP2_PATH, &hwp(self.hwp2)).expect("valid path"),
            mirror(2.0 * self.mirror_phase),
            embed(Self::HWP3_PATH, &hwp(self.hwp3)).expect("valid path"),
            mirror(self.mirror_phase),
            pbs(),
            embed(Self::QWP1_PATH, &qwp(self.qwp1)).expect("valid path"),
        ] {
            u = m.then_after(&u).expect("4×4");
        }
        u
    }

    /// Reduces angles by the plate symmetries: `HWP(θ+π/2) = −HWP(θ)`,
    /// `QWP(θ+π) = QWP(θ)`; the mirror phase goes to `[0, 2π)`.
    pub fn canonical(&self) -> Self {
        let m = |x: f64, p: f64| x.rem_euclid(p);
        SagnacSettings {
            hwp1: m(self.hwp1, PI / 2.0),
            hwp2: m(self.hwp2, PI / 2.0),
            hwp3: m(self.hwp3, PI / 2.0),
            qwp1: m(self.qwp1, PI),
            mirror_phase: m(self.mirror_phase, 2.0 * PI),
        }
    }

    /// Number of optical elements in the realization.
    pub const ELEMENT_COUNT: usize = 9;
}

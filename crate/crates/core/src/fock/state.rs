use std::sync::Arc;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{FockBasis, FockState, ModeLabel};
use super::permanent::permanent;
use super::unitary::{MatrixJson, ModeUnitary};
use super::{CMatrix, FockError};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_FLOOR: f64 = -1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitude `⟨output| U_F |input⟩` of the Fock-space lift of `u`.
pub fn transition_amplitude(u: &ModeUnitary, input: &FockState, output: &FockState) -> Result<Complex64, FockError> {
    if input.n_modes() != u.dim() || output.n_modes() != u.dim() {
        return Err(FockError::DimensionMismatch { expected: u.dim(), found: input.n_modes() });
    }
    if input.photon_number() != output.photon_number() {
        return Ok(ZERO);
    }
    let rows = output.mode_indices();
    let cols = input.mode_indices();
    let m = u.matrix();
    let sub = CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(permanent(&sub)? / norm)
}

/// The Fock-space lift of `u` on `basis`, as a `basis.len()`-square matrix.
pub fn fock_lift(u: &ModeUnitary, basis: &FockBasis) -> Result<CMatrix, FockError> {
    if u.dim() != basis.n_modes() {
        return Err(FockError::DimensionMismatch { expected: basis.n_modes(), found: u.dim() });
    }
    let d = basis.len();
    let mut lift = CMatrix::zeros(d, d);
    for (s, input) in basis.states().iter().enumerate() {
        for (t, output) in basis.states().iter().enumerate() {
            lift[(t, s)] = transition_amplitude(u, input, output)?;
        }
    }
    Ok(lift)
}

/// Amplitudes over a fixed-photon-number Fock basis. Not renormalized by any
/// operation: the squared norm is the probability weight of the branch.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    basis: Arc<FockBasis>,
    amplitudes: DVector<Complex64>,
}

/// Density matrix over a fixed-photon-number Fock basis. The trace is the
/// probability weight of the branch.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: Arc<FockBasis>,
    matrix: CMatrix,
}

/// Result of projecting one mode onto a fixed occupation.
///
/// `state` lives on the remaining modes and is renormalized when
/// `probability > 0` (it is the zero vector otherwise); `probability` is the
/// weight of the projected, unrenormalized state.
#[derive(Clone, Debug)]
pub struct HeraldOutcome<S> {
    pub state: S,
    pub probability: f64,
}

impl<S: FockSpaceState> HeraldOutcome<S> {
    /// The projected state before renormalization.
    pub fn unnormalized(&self) -> S {
        self.state.scaled(self.probability)
    }
}

/// Operations shared by pure and mixed states.
pub trait FockSpaceState: Sized + Clone {
    fn basis(&self) -> &FockBasis;

    /// Squared norm (pure) or trace (mixed).
    fn weight(&self) -> f64;

    fn evolve(&self, u: &ModeUnitary) -> Result<Self, FockError>;

    /// Projects `mode` onto occupation `count`.
    fn herald(&self, mode: ModeLabel, count: u32) -> Result<HeraldOutcome<Self>, FockError>;

    /// `|⟨target|ψ⟩|²` or `⟨target|ρ|target⟩`.
    fn fidelity(&self, target: &PureState) -> Result<f64, FockError>;

    /// Multiplies the weight by `factor` (amplitudes by its square root).
    fn scaled(&self, factor: f64) -> Self;

    fn to_density(&self) -> DensityMatrix;
}

impl PureState {
    pub fn new(basis: FockBasis, amplitudes: Vec<Complex64>) -> Result<Self, FockError> {
        Self::with_shared_basis(Arc::new(basis), DVector::from_vec(amplitudes))
    }

    fn with_shared_basis(basis: Arc<FockBasis>, amplitudes: DVector<Complex64>) -> Result<Self, FockError> {
        if amplitudes.len() != basis.len() {
            return Err(FockError::LengthMismatch { expected: basis.len(), found: amplitudes.len() });
        }
        Ok(PureState { basis, amplitudes })
    }

    /// The basis state `|occupations⟩`.
    pub fn basis_state(occupations: &[u32]) -> Result<Self, FockError> {
        let n: u32 = occupations.iter().sum();
        let basis = FockBasis::new(n, occupations.len())?;
        let index = basis.index_of_occupations(occupations).expect("state is in its own basis");
        let mut amplitudes = vec![ZERO; basis.len()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(basis, amplitudes)
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupations: &[u32]) -> Option<Complex64> {
        self.basis.index_of_occupations(occupations).map(|i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(&self) -> Self {
        let w = self.norm_sqr();
        if w > 0.0 {
            self.scaled(1.0 / w)
        } else {
            self.clone()
        }
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64, FockError> {
        if self.basis != other.basis {
            return Err(FockError::BasisMismatch);
        }
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum())
    }
}

impl FockSpaceState for PureState {
    fn basis(&self) -> &FockBasis {
        &self.basis
    }

    fn weight(&self) -> f64 {
        self.norm_sqr()
    }

    fn evolve(&self, u: &ModeUnitary) -> Result<Self, FockError> {
        if u.dim() != self.basis.n_modes() {
            return Err(FockError::DimensionMismatch { expected: self.basis.n_modes(), found: u.dim() });
        }
        let mut out = DVector::from_element(self.basis.len(), ZERO);
        for (s, input) in self.basis.states().iter().enumerate() {
            let a = self.amplitudes[s];
            if a == ZERO {
                continue;
            }
            for (t, output) in self.basis.states().iter().enumerate() {
                out[t] += a * transition_amplitude(u, input, output)?;
            }
        }
        Ok(PureState { basis: self.basis.clone(), amplitudes: out })
    }

    fn herald(&self, mode: ModeLabel, count: u32) -> Result<HeraldOutcome<Self>, FockError> {
        let projection = Projection::new(&self.basis, mode, count)?;
        let mut amps = DVector::from_element(projection.reduced.len(), ZERO);
        for &(full, reduced) in &projection.pairs {
            amps[reduced] = self.amplitudes[full];
        }
        let state = PureState { basis: Arc::new(projection.reduced), amplitudes: amps };
        let probability = state.norm_sqr();
        Ok(HeraldOutcome { state: state.normalized(), probability })
    }

    fn fidelity(&self, target: &PureState) -> Result<f64, FockError> {
        Ok(target.inner(self)?.norm_sqr())
    }

    fn scaled(&self, factor: f64) -> Self {
        let s = factor.sqrt();
        PureState { basis: self.basis.clone(), amplitudes: self.amplitudes.map(|a| a * s) }
    }

    fn to_density(&self) -> DensityMatrix {
        DensityMatrix { basis: self.basis.clone(), matrix: &self.amplitudes * self.amplitudes.adjoint() }
    }
}

impl DensityMatrix {
    /// Validates Hermiticity and positivity; the trace is free.
    pub fn new(basis: FockBasis, matrix: CMatrix) -> Result<Self, FockError> {
        Self::with_shared_basis(Arc::new(basis), matrix)
    }

    pub(crate) fn with_shared_basis(basis: Arc<FockBasis>, matrix: CMatrix) -> Result<Self, FockError> {
        let d = basis.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(FockError::LengthMismatch { expected: d, found: matrix.nrows() });
        }
        let deviation = (&matrix - matrix.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if deviation > HERMITIAN_TOL {
            return Err(FockError::NotHermitian { deviation });
        }
        let rho = DensityMatrix { basis, matrix };
        let min_eigenvalue = rho.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eigenvalue < PSD_FLOOR {
            return Err(FockError::NotPositive { min_eigenvalue });
        }
        Ok(rho)
    }

    /// `I / dim` on `basis`.
    pub fn maximally_mixed(basis: FockBasis) -> Self {
        let d = basis.len();
        DensityMatrix { basis: Arc::new(basis), matrix: CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn element(&self, row: &[u32], col: &[u32]) -> Option<Complex64> {
        let i = self.basis.index_of_occupations(row)?;
        let j = self.basis.index_of_occupations(col)?;
        Some(self.matrix[(i, j)])
    }

    /// Diagonal entry for a basis state.
    pub fn population(&self, occupations: &[u32]) -> Option<f64> {
        self.element(occupations, occupations).map(|z| z.re)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(&self) -> Self {
        let t = self.trace();
        if t > 0.0 {
            self.scaled(1.0 / t)
        } else {
            self.clone()
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        // Symmetrize so round-off never makes the eigen-solver see a non-Hermitian input.
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    }
}

impl FockSpaceState for DensityMatrix {
    fn basis(&self) -> &FockBasis {
        &self.basis
    }

    fn weight(&self) -> f64 {
        self.trace()
    }

    fn evolve(&self, u: &ModeUnitary) -> Result<Self, FockError> {
        let lift = fock_lift(u, &self.basis)?;
        Ok(DensityMatrix { basis: self.basis.clone(), matrix: &lift * &self.matrix * lift.adjoint() })
    }

    fn herald(&self, mode: ModeLabel, count: u32) -> Result<HeraldOutcome<Self>, FockError> {
        let projection = Projection::new(&self.basis, mode, count)?;
        let d = projection.reduced.len();
        let mut m = CMatrix::zeros(d, d);
        for &(fi, ri) in &projection.pairs {
            for &(fj, rj) in &projection.pairs {
                m[(ri, rj)] = self.matrix[(fi, fj)];
            }
        }
        let state = DensityMatrix { basis: Arc::new(projection.reduced), matrix: m };
        let probability = state.trace();
        Ok(HeraldOutcome { state: state.normalized(), probability })
    }

    fn fidelity(&self, target: &PureState) -> Result<f64, FockError> {
        if *self.basis != *target.basis {
            return Err(FockError::BasisMismatch);
        }
        let t = &target.amplitudes;
        Ok((t.adjoint() * &self.matrix * t)[(0, 0)].re)
    }

    fn scaled(&self, factor: f64) -> Self {
        DensityMatrix { basis: self.basis.clone(), matrix: &self.matrix * Complex64::new(factor, 0.0) }
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }
}

/// Index bookkeeping for projecting one mode onto a fixed occupation.
struct Projection {
    reduced: FockBasis,
    /// (index in the full basis, index in the reduced basis)
    pairs: Vec<(usize, usize)>,
}

impl Projection {
    fn new(basis: &FockBasis, mode: ModeLabel, count: u32) -> Result<Self, FockError> {
        let m = mode.index();
        if m >= basis.n_modes() {
            return Err(FockError::ModeOutOfRange { mode: m, n_modes: basis.n_modes() });
        }
        if basis.n_modes() < 2 {
            return Err(FockError::ModeOutOfRange { mode: m, n_modes: basis.n_modes() });
        }
        if count > basis.n_photons() {
            return Err(FockError::PhotonCountExceeded { count, photons: basis.n_photons() });
        }
        let reduced = FockBasis::new(basis.n_photons() - count, basis.n_modes() - 1)?;
        let pairs = basis
            .states()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.occupations()[m] == count)
            .map(|(i, s)| (i, reduced.index_of(&s.without_mode(m)).expect("reduced state exists")))
            .collect();
        Ok(Projection { reduced, pairs })
    }
}

pub fn evolve(state: &PureState, u: &ModeUnitary) -> Result<PureState, FockError> {
    state.evolve(u)
}

pub fn evolve_density(rho: &DensityMatrix, u: &ModeUnitary) -> Result<DensityMatrix, FockError> {
    rho.evolve(u)
}

pub fn herald<S: FockSpaceState>(state: &S, mode: ModeLabel, count: u32) -> Result<HeraldOutcome<S>, FockError> {
    state.herald(mode, count)
}

pub fn fidelity<S: FockSpaceState>(state: &S, target: &PureState) -> Result<f64, FockError> {
    state.fidelity(target)
}

/// `(|200⟩ + e^{iα₁}|020⟩ + e^{iα₂}|002⟩)/√3`.
pub fn noon_state(alpha1: f64, alpha2: f64) -> PureState {
    let basis = FockBasis::new(2, 3).expect("three modes");
    let s = 1.0 / 3f64.sqrt();
    let mut amps = vec![ZERO; basis.len()];
    amps[basis.index_of_occupations(&[2, 0, 0]).unwrap()] = Complex64::new(s, 0.0);
    amps[basis.index_of_occupations(&[0, 2, 0]).unwrap()] = Complex64::from_polar(s, alpha1);
    amps[basis.index_of_occupations(&[0, 0, 2]).unwrap()] = Complex64::from_polar(s, alpha2);
    PureState::new(basis, amps).expect("length matches")
}

#[derive(Serialize, Deserialize)]
struct PureStateJson {
    n_photons: u32,
    n_modes: usize,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    n_photons: u32,
    n_modes: usize,
    matrix: MatrixJson,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PureStateJson {
            n_photons: self.basis.n_photons(),
            n_modes: self.basis.n_modes(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = PureStateJson::deserialize(deserializer)?;
        let basis = FockBasis::new(raw.n_photons, raw.n_modes).map_err(serde::de::Error::custom)?;
        let amps = raw.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        PureState::new(basis, amps).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DensityMatrixJson {
            n_photons: self.basis.n_photons(),
            n_modes: self.basis.n_modes(),
            matrix: MatrixJson::from_matrix(&self.matrix),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = DensityMatrixJson::deserialize(deserializer)?;
        let basis = FockBasis::new(raw.n_photons, raw.n_modes).map_err(serde::de::Error::custom)?;
        let matrix = raw.matrix.to_matrix().map_err(serde::de::Error::custom)?;
        DensityMatrix::new(basis, matrix).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn balanced_mixer() -> ModeUnitary {
        let s = 1.0 / 2f64.sqrt();
        ModeUnitary::from_rows(&[vec![c(s, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(s, 0.0)]]).unwrap()
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let psi = noon_state(0.3, 1.1);
        let out = psi.evolve(&ModeUnitary::identity(3)).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn two_photon_bunching_on_balanced_mixer() {
        let out = PureState::basis_state(&[1, 1]).unwrap().evolve(&balanced_mixer()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((out.amplitude(&[2, 0]).unwrap() - c(0.0, -s)).norm() < 1e-15);
        assert!((out.amplitude(&[0, 2]).unwrap() - c(0.0, -s)).norm() < 1e-15);
        assert!(out.amplitude(&[1, 1]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let psi = PureState::basis_state(&[1, 1, 1, 0]).unwrap();
        assert!(matches!(psi.evolve(&balanced_mixer()), Err(FockError::DimensionMismatch { .. })));
        assert!(matches!(psi.to_density().evolve(&balanced_mixer()), Err(FockError::DimensionMismatch { .. })));
    }

    #[test]
    fn heralding_an_empty_mode_has_zero_probability() {
        let psi = PureState::basis_state(&[1, 1, 1, 0]).unwrap();
        let out = psi.herald(ModeLabel::Herald, 1).unwrap();
        assert_eq!(out.probability, 0.0);
        assert_eq!(out.state.basis().n_photons(), 2);
        assert_eq!(out.state.basis().n_modes(), 3);
        assert_eq!(out.state.norm_sqr(), 0.0);
    }

    #[test]
    fn herald_count_above_photon_number_rejected() {
        let psi = PureState::basis_state(&[1, 1, 1, 0]).unwrap();
        assert!(matches!(
            psi.herald(ModeLabel::Herald, 4),
            Err(FockError::PhotonCountExceeded { count: 4, photons: 3 })
        ));
        let two_mode = PureState::basis_state(&[1, 1]).unwrap();
        assert!(matches!(two_mode.herald(ModeLabel::C, 0), Err(FockError::ModeOutOfRange { .. })));
    }

    #[test]
    fn vacuum_projection_of_noon_density() {
        let rho = noon_state(0.0, 0.0).to_density();
        let out = rho.herald(ModeLabel::C, 0).unwrap();
        assert!((out.probability - 2.0 / 3.0).abs() < 1e-15);
        let r = &out.state;
        for (row, col) in [([2, 0], [2, 0]), ([0, 2], [0, 2]), ([2, 0], [0, 2]), ([0, 2], [2, 0])] {
            assert!((r.element(&row, &col).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        }
        assert!(r.population(&[1, 1]).unwrap().abs() < 1e-15);
        let unnorm = out.unnormalized();
        assert!((unnorm.trace() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn noon_overlaps() {
        let a = noon_state(0.0, 0.0);
        let b = noon_state(PI, PI);
        assert!((a.fidelity(&a).unwrap() - 1.0).abs() < 1e-15);
        assert!((a.fidelity(&b).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((a.to_density().fidelity(&b).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        let s = 1.0 / 3f64.sqrt();
        assert!((a.amplitude(&[2, 0, 0]).unwrap() - c(s, 0.0)).norm() < 1e-15);
        assert_eq!(a.amplitude(&[1, 1, 0]).unwrap(), ZERO);
    }

    #[test]
    fn maximally_mixed_fidelity_is_inverse_dimension() {
        let rho = DensityMatrix::maximally_mixed(FockBasis::new(2, 3).unwrap());
        assert!((rho.fidelity(&noon_state(0.0, 0.0)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_basis_mismatch() {
        let psi = PureState::basis_state(&[1, 1]).unwrap();
        assert!(matches!(psi.fidelity(&noon_state(0.0, 0.0)), Err(FockError::BasisMismatch)));
    }

    #[test]
    fn density_validation() {
        let basis = FockBasis::new(1, 2).unwrap();
        let not_hermitian = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(basis.clone(), not_hermitian), Err(FockError::NotHermitian { .. })));
        let negative = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(basis, negative), Err(FockError::NotPositive { .. })));
    }

    #[test]
    fn state_json_format() {
        let psi = PureState::basis_state(&[1, 0]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&psi).unwrap();
        assert_eq!(v, serde_json::json!({"n_photons": 1, "n_modes": 2, "amplitudes": [[1.0, 0.0], [0.0, 0.0]]}));
        let back: PureState = serde_json::from_value(v).unwrap();
        assert_eq!(back.amplitudes(), psi.amplitudes());
        let rho: DensityMatrix =
            serde_json::from_str(&serde_json::to_string(&noon_state(0.2, 0.4).to_density()).unwrap()).unwrap();
        assert!(rho.is_normalized());
        assert!(serde_json::from_value::<PureState>(
            serde_json::json!({"n_photons": 1, "n_modes": 2, "amplitudes": [[1.0, 0.0]]})
        )
        .is_err());
    }
}

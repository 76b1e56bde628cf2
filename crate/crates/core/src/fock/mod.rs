//! Fock-basis bookkeeping and multi-photon evolution through mode unitaries.

mod basis;
mod permanent;
mod state;
mod unitary;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub use basis::{fock_basis, FockBasis, FockState, ModeLabel, Polarization};
pub use permanent::{permanent, permanent_ryser};
pub use state::{
    evolve, evolve_density, fidelity, fock_lift, herald, noon_state, transition_amplitude, DensityMatrix,
    FockSpaceState, HeraldOutcome, PureState, HERMITIAN_TOL, NORM_TOL, PSD_FLOOR,
};
pub use unitary::{unitarity_deviation, MatrixJson, ModeUnitary, UNITARITY_TOL};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("a Fock basis needs at least one mode")]
    ZeroModes,
    #[error("matrix is not square ({rows}×{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("permanent of a {0}×{0} matrix is out of range")]
    TooLarge(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("matrix is not unitary (max |U†U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("cannot herald {count} photons from a {photons}-photon state")]
    PhotonCountExceeded { count: u32, photons: u32 },
    #[error("mode {mode} is out of range for a {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("states live on different Fock bases")]
    BasisMismatch,
    #[error("malformed input: {0}")]
    Malformed(String),
}

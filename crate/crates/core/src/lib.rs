//! Simulation and analysis of heralded three-mode two-photon NOON state
//! generation in a four-mode path-polarization interferometer.
//!
//! * [`fock`]: Fock bases, permanents, evolution and heralding.
//! * [`optics`]: wave plates, polarizing beam splitter, mirrors, circuits.
//! * [`synth`]: search for heralding unitaries and circuit-angle fitting.
//! * [`measurement`]: vacuum projection, coincidence fringes, count sampling, noise.
//! * [`analysis`]: fringe fits, fidelity estimates, coherence-only bounds, GME.
//! * [`io`]: CSV and JSON file formats.

pub mod analysis;
pub mod fock;
pub mod io;
pub mod measurement;
pub mod optics;
pub mod optim;
pub mod synth;

pub use fock::{CMatrix, DensityMatrix, FockBasis, FockSpaceState, FockState, ModeLabel, ModeUnitary, PureState};

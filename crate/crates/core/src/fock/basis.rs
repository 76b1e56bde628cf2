use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::FockError;

/// The four hybrid path-polarization modes of the state-generation circuit.
///
/// The index order `A, B, C, Herald` is also the row/column order of every
/// 4×4 mode unitary: `(H,1), (V,1), (H,2), (V,2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeLabel {
    A,
    B,
    C,
    Herald,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 4] = [ModeLabel::A, ModeLabel::B, ModeLabel::C, ModeLabel::Herald];
    pub const TARGETS: [ModeLabel; 3] = [ModeLabel::A, ModeLabel::B, ModeLabel::C];

    pub fn index(self) -> usize {
        match self {
            ModeLabel::A => 0,
            ModeLabel::B => 1,
            ModeLabel::C => 2,
            ModeLabel::Herald => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn polarization(self) -> Polarization {
        match self {
            ModeLabel::A | ModeLabel::C => Polarization::H,
            ModeLabel::B | ModeLabel::Herald => Polarization::V,
        }
    }

    /// Spatial path, 1 or 2.
    pub fn path(self) -> u8 {
        match self {
            ModeLabel::A | ModeLabel::B => 1,
            ModeLabel::C | ModeLabel::Herald => 2,
        }
    }

    pub fn is_target(self) -> bool {
        self != ModeLabel::Herald
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::A => f.write_str("A"),
            ModeLabel::B => f.write_str("B"),
            ModeLabel::C => f.write_str("C"),
            ModeLabel::Herald => f.write_str("herald"),
        }
    }
}

/// Occupation numbers of a multi-mode Fock basis state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState(Vec<u32>);

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Self {
        FockState(occupations)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }

    pub fn photon_number(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Mode indices repeated by occupation, e.g. `(2,0,1)` gives `[0,0,2]`.
    pub fn mode_indices(&self) -> Vec<usize> {
        self.0.iter().enumerate().flat_map(|(mode, &n)| std::iter::repeat_n(mode, n as usize)).collect()
    }

    /// Product of the occupation factorials.
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| (1..=n).map(f64::from).product::<f64>()).product()
    }

    /// The same state with one mode removed.
    pub fn without_mode(&self, mode: usize) -> FockState {
        let mut occ = self.0.clone();
        occ.remove(mode);
        FockState(occ)
    }
}

impl From<&[u32]> for FockState {
    fn from(occ: &[u32]) -> Self {
        FockState(occ.to_vec())
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&n| n < 10) {
            for n in &self.0 {
                write!(f, "{n}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

/// All Fock states with a fixed photon number over a fixed number of modes,
/// in descending lexicographic order of the occupation tuples.
#[derive(Clone, Debug)]
pub struct FockBasis {
    n_photons: u32,
    n_modes: usize,
    states: Vec<FockState>,
    lookup: HashMap<FockState, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n_photons == other.n_photons && self.n_modes == other.n_modes
    }
}

impl Eq for FockBasis {}

impl FockBasis {
    pub fn new(n_photons: u32, n_modes: usize) -> Result<Self, FockError> {
        if n_modes == 0 {
            return Err(FockError::ZeroModes);
        }
        let mut states = Vec::new();
        let mut current = vec![0u32; n_modes];
        enumerate_descending(n_photons, 0, &mut current, &mut states);
        let lookup = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(FockBasis { n_photons, n_modes, states, lookup })
    }

    pub fn n_photons(&self) -> u32 {
        self.n_photons
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &FockState {
        &self.states[index]
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.lookup.get(state).copied()
    }

    /// Index of the state with the given occupations.
    pub fn index_of_occupations(&self, occ: &[u32]) -> Option<usize> {
        self.lookup.get(&FockState::from(occ)).copied()
    }
}

fn enumerate_descending(remaining: u32, mode: usize, current: &mut [u32], out: &mut Vec<FockState>) {
    if mode + 1 == current.len() {
        current[mode] = remaining;
        out.push(FockState(current.to_vec()));
        return;
    }
    for n in (0..=remaining).rev() {
        current[mode] = n;
        enumerate_descending(remaining - n, mode + 1, current, out);
    }
}

/// Enumerates the `n_photons`-photon Fock basis over `n_modes` modes.
pub fn fock_basis(n_photons: u32, n_modes: usize) -> Result<FockBasis, FockError> {
    FockBasis::new(n_photons, n_modes)
}

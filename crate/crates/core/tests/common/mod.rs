//! Independent oracles and random generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::DMatrix;
use noonforge_core::analysis::CoherenceSet;
use noonforge_core::fock::{fock_basis, noon_state};
use noonforge_core::measurement::{apply_noise_chain, fringe_params_from_rho, vacuum_project, NoiseModel};
use noonforge_core::{CMatrix, DensityMatrix, FockSpaceState, ModeLabel, ModeUnitary};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Sum over all permutations, no cleverness.
pub fn naive_permanent(m: &CMatrix) -> Complex64 {
    fn go(m: &CMatrix, row: usize, used: &mut Vec<bool>) -> Complex64 {
        if row == m.nrows() {
            return c(1.0, 0.0);
        }
        let mut total = c(0.0, 0.0);
        for col in 0..m.ncols() {
            if !used[col] {
                used[col] = true;
                total += m[(row, col)] * go(m, row + 1, used);
                used[col] = false;
            }
        }
        total
    }
    go(m, 0, &mut vec![false; m.ncols()])
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Output amplitudes of `|input⟩` under `u` by expanding
/// `Π_j (Σ_i U_ij a†_i)^{n_j}` as a polynomial in creation operators and
/// reading off `coefficient · √(Π m_i!) / √(Π n_j!)`.
pub fn creation_operator_evolve(u: &CMatrix, input: &[u32]) -> HashMap<Vec<u32>, Complex64> {
    let m = u.nrows();
    let mut poly: HashMap<Vec<u32>, Complex64> = HashMap::from([(vec![0; m], c(1.0, 0.0))]);
    for (j, &n) in input.iter().enumerate() {
        for _ in 0..n {
            let mut next = HashMap::new();
            for (mono, coeff) in &poly {
                for i in 0..m {
                    let mut k = mono.clone();
                    k[i] += 1;
                    *next.entry(k).or_insert(c(0.0, 0.0)) += coeff * u[(i, j)];
                }
            }
            poly = next;
        }
    }
    let norm_in: f64 = input.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
    poly.into_iter()
        .map(|(mono, coeff)| {
            let norm_out: f64 = mono.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
            (mono, coeff * norm_out / norm_in)
        })
        .collect()
}

pub fn random_complex_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Haar-like unitary from the QR decomposition of a complex Gaussian-ish matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ModeUnitary {
    let g = random_complex_matrix(rng, n, n);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_diagonal(&r.diagonal().map(|d| if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) }));
    ModeUnitary::new(q * phases).expect("QR gives a unitary")
}

/// Random full-rank density matrix on two photons in three modes.
pub fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let basis = fock_basis(2, 3).unwrap();
    let g = random_complex_matrix(rng, 6, 6);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    let rho = (&m + m.adjoint()) * c(0.5 / t, 0.0);
    DensityMatrix::new(basis, rho).unwrap()
}

/// A NOON state with random phases degraded by a random mix of the noise channels.
pub fn random_noisy_noon(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let rho = noon_state(rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.0..std::f64::consts::TAU))
        .to_density();
    let models = [
        NoiseModel::Dephase { d: rng.random_range(0.0..0.8) },
        NoiseModel::BadEvent { q: rng.random_range(0.0..0.4) },
        NoiseModel::White { p: rng.random_range(0.0..0.3) },
    ];
    apply_noise_chain(&rho, &models).unwrap()
}

/// Exact fringe parameters of the three pairs of `rho`.
pub fn exact_coherences(rho: &DensityMatrix) -> CoherenceSet {
    let f = |k| fringe_params_from_rho(&vacuum_project(rho, k).unwrap());
    CoherenceSet { ab: f(ModeLabel::C), ac: f(ModeLabel::B), bc: f(ModeLabel::A) }
}

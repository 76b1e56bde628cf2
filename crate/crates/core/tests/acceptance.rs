//! Acceptance criteria, one pass/fail line each. Every tolerance is pinned
//! here; the process exits non-zero if any criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_4, TAU};
use std::time::{Duration, Instant};

use noonforge_core::analysis::{
    analyze, certify_gme, fidelity_bounds, gme_threshold, max_fidelity_over_phases, AnalysisConfig, AnalysisInput,
    BoundsConfig, CoherenceSet, NoonCoherences, PopulationSet,
};
use noonforge_core::fock::{herald, noon_state, permanent_ryser, PureState};
use noonforge_core::measurement::{
    apply_noise_chain, coincidence_prob, default_thetas, fringe_params_from_rho, fringe_scan, sample_counts,
    sample_population_counts, vacuum_project, FringeParams, NoiseModel,
};
use noonforge_core::optics::SagnacSettings;
use noonforge_core::synth::{fit_mirror_phase, heralded_objective, reference_unitary, synthesize, SynthConfig};
use noonforge_core::{FockSpaceState, ModeLabel};
use rand::Rng;

use common::exact_coherences;

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &str, started: Instant, outcome: Outcome, failures: &mut Vec<u32>) {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {name} ({:.2}s) {}", started.elapsed().as_secs_f64(), outcome.detail);
    if !outcome.pass {
        failures.push(id);
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

/// Heralded three-photon input through the reference unitary.
fn criterion_1() -> Outcome {
    const P_TOL: f64 = 1e-9;
    const F_TOL: f64 = 1e-9;
    const LIMIT_S: f64 = 1.0;
    let t = Instant::now();
    let input = PureState::basis_state(&[1, 1, 1, 0]).unwrap();
    let out = input.evolve(&reference_unitary()).unwrap();
    let heralded = herald(&out, ModeLabel::Herald, 1).unwrap();
    let amps: [_; 6] = std::array::from_fn(|i| heralded.state.amplitudes()[i]);
    let (f, _, _) = noonforge_core::synth::max_noon_overlap(&amps);
    let elapsed = t.elapsed();
    let pass = (heralded.probability - 0.25).abs() <= P_TOL && f >= 1.0 - F_TOL && within(elapsed, LIMIT_S);
    Outcome { pass, detail: format!("p = {:.12}, F = {:.12}", heralded.probability, f) }
}

/// Wave-plate circuit with the reported angles and a fitted mirror phase.
fn criterion_2() -> Outcome {
    const TOL: f64 = 1e-6;
    const LIMIT_S: f64 = 10.0;
    let t = Instant::now();
    let fit = fit_mirror_phase(&SagnacSettings::reported(0.0)).unwrap();
    let elapsed = t.elapsed();
    let s = fit.score;
    let pass = (s.success_probability - 0.25).abs() <= TOL && s.fidelity >= 1.0 - TOL && within(elapsed, LIMIT_S);
    Outcome {
        pass,
        detail: format!(
            "mirror phase = {:.6} rad, p = {:.10}, F = {:.10}",
            fit.settings.mirror_phase, s.success_probability, s.fidelity
        ),
    }
}

/// Gradient-descent synthesis from 20 seeded restarts.
fn criterion_3() -> Outcome {
    const F_TOL: f64 = 1e-6;
    const P_FLOOR: f64 = 0.249;
    const LIMIT_S: f64 = 300.0;
    let t = Instant::now();
    let config = SynthConfig { n_restarts: 20, rng_seed: SEED, ..SynthConfig::default() };
    let results = synthesize(&config).unwrap();
    let elapsed = t.elapsed();
    let hits = results.iter().filter(|r| r.fidelity >= 1.0 - F_TOL && r.success_probability >= P_FLOOR).count();
    let best = &results[0];
    // the reported numbers must be those of the returned unitary
    let recomputed = heralded_objective(&best.unitary).unwrap();
    let consistent = recomputed.fidelity == best.fidelity && recomputed.success_probability == best.success_probability;
    Outcome {
        pass: hits >= 1 && consistent && within(elapsed, LIMIT_S),
        detail: format!(
            "{hits}/20 restarts reach the target; best F = {:.12}, p = {:.10}",
            best.fidelity, best.success_probability
        ),
    }
}

/// Coincidence curves against the closed-form fringe on random states.
fn criterion_4() -> Outcome {
    const TOL: f64 = 1e-9;
    const STATES: usize = 500;
    let mut rng = common::rng(SEED);
    let thetas: Vec<f64> = (0..64).map(|k| FRAC_PI_4 * k as f64 / 64.0).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..STATES {
        let rho = common::random_density(&mut rng);
        for k in [ModeLabel::A, ModeLabel::B, ModeLabel::C] {
            let state = vacuum_project(&rho, k).unwrap();
            let p = fringe_params_from_rho(&state);
            for &theta in &thetas {
                worst = worst.max((coincidence_prob(&state, theta) - p.evaluate(theta)).abs());
            }
        }
    }
    let noon = noon_state(0.0, 0.0).to_density();
    let contrasts: Vec<f64> = [ModeLabel::A, ModeLabel::B, ModeLabel::C]
        .into_iter()
        .map(|k| fringe_params_from_rho(&vacuum_project(&noon, k).unwrap()).contrast())
        .collect();
    let ideal = contrasts.iter().all(|c| (c - 1.0).abs() <= TOL);
    Outcome {
        pass: worst <= TOL && ideal,
        detail: format!("max deviation {worst:.2e} over {STATES} states; NOON contrasts {contrasts:?}"),
    }
}

fn uniform(a: f64, v: f64) -> CoherenceSet {
    let p = FringeParams::exact(a, v, 0.0);
    CoherenceSet { ab: p, ac: p, bc: p }
}

/// Coherence-only bounds: limiting cases, sandwich, reported fringes.
fn criterion_5() -> Outcome {
    const TOL: f64 = 1e-6;
    const SANDWICH_STATES: usize = 100;
    const PUBLISHED_TOL: f64 = 0.02;
    let config = BoundsConfig::default();
    let ideal = fidelity_bounds(&uniform(1.0, 1.0), &config).unwrap();
    let ideal_ok = (ideal.lower - 1.0).abs() <= TOL && (ideal.upper - 1.0).abs() <= TOL;
    let flat = fidelity_bounds(&uniform(1.0, 0.0), &config).unwrap();
    let flat_ok = (flat.lower - 1.0 / 3.0).abs() <= TOL && (flat.upper - 1.0 / 3.0).abs() <= TOL;

    let mut rng = common::rng(SEED + 5);
    let mut violations = 0;
    let mut worst_gap = f64::INFINITY;
    for _ in 0..SANDWICH_STATES {
        let rho = common::random_noisy_noon(&mut rng);
        let bounds = fidelity_bounds(&exact_coherences(&rho), &config).unwrap();
        let pops = PopulationSet::from_density(&rho).unwrap();
        let f = max_fidelity_over_phases(&pops, &NoonCoherences::from_density(&rho).unwrap()).unwrap().fidelity;
        let gap = (f - bounds.lower).min(bounds.upper - f);
        worst_gap = worst_gap.min(gap);
        if f < bounds.lower - TOL || f > bounds.upper + TOL {
            violations += 1;
        }
    }

    // contrasts read as V/A, offsets as twice the fringe centers, phases with
    // φ_AB − φ_AC + φ_BC = 0
    let fringe = |c: f64, center: f64| FringeParams::exact(2.0 * center, c * 2.0 * center, 0.0);
    let reported = CoherenceSet { ab: fringe(0.819, 0.467), ac: fringe(0.812, 0.480), bc: fringe(0.920, 0.478) };
    let published = fidelity_bounds(&reported, &config).unwrap();
    let published_ok =
        (published.lower - 0.818).abs() <= PUBLISHED_TOL && (published.upper - 0.836).abs() <= PUBLISHED_TOL;

    Outcome {
        pass: ideal_ok && flat_ok && violations == 0 && published_ok,
        detail: format!(
            "ideal [{:.9}, {:.9}], flat [{:.9}, {:.9}], sandwich violations {violations}/{SANDWICH_STATES} \
             (min margin {worst_gap:.2e}), reported fringes [{:.4}, {:.4}] vs [0.818, 0.836]",
            ideal.lower, ideal.upper, flat.lower, flat.upper, published.lower, published.upper
        ),
    }
}

/// Product-state threshold of the NOON family and the reported certification.
fn criterion_6() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = common::rng(SEED + 6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let target = noon_state(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        worst = worst.max((gme_threshold(&target).unwrap().threshold - 2.0 / 3.0).abs());
    }
    let z = certify_gme(0.823, 0.018, 2.0 / 3.0).unwrap();
    Outcome { pass: worst <= TOL && z > 8.0, detail: format!("max |F_bs − 2/3| = {worst:.2e}, z = {z:.3}") }
}

/// Ryser against the permutation expansion.
fn criterion_7() -> Outcome {
    const TOL: f64 = 1e-10;
    const CASES: usize = 1000;
    const LIMIT_S: f64 = 10.0;
    let t = Instant::now();
    let mut rng = common::rng(SEED + 7);
    let mut worst: f64 = 0.0;
    for case in 0..CASES {
        let n = 1 + case % 5;
        let m = common::random_complex_matrix(&mut rng, n, n);
        let diff = (permanent_ryser(&m).unwrap() - common::naive_permanent(&m)).norm();
        worst = worst.max(diff);
    }
    let elapsed = t.elapsed();
    Outcome {
        pass: worst <= TOL && within(elapsed, LIMIT_S),
        detail: format!("max deviation {worst:.2e} over {CASES} matrices"),
    }
}

/// Sampled pipeline on a degraded circuit output.
fn criterion_8() -> Outcome {
    const EVENTS: u64 = 1000;
    const SIGMAS: f64 = 3.0;
    let circuit = fit_mirror_phase(&SagnacSettings::reported(0.0)).unwrap().settings.unitary();
    let input = PureState::basis_state(&[1, 1, 1, 0]).unwrap();
    let heralded = herald(&input.evolve(&circuit).unwrap(), ModeLabel::Herald, 1).unwrap().state.to_density();
    let rho =
        apply_noise_chain(&heralded, &[NoiseModel::BadEvent { q: 0.15 }, NoiseModel::Dephase { d: 0.1 }]).unwrap();

    let truth = max_fidelity_over_phases(
        &PopulationSet::from_density(&rho).unwrap(),
        &NoonCoherences::from_density(&rho).unwrap(),
    )
    .unwrap()
    .fidelity;

    let thetas = default_thetas(16);
    let scan = |pair, k: u64| sample_counts(&fringe_scan(&rho, pair, &thetas).unwrap(), EVENTS, SEED + 80 + k).unwrap();
    let populations = PopulationSet::from_counts(sample_population_counts(&rho, EVENTS, SEED + 89).unwrap()).unwrap();
    let input = AnalysisInput {
        ab: scan((ModeLabel::A, ModeLabel::B), 0),
        ac: scan((ModeLabel::A, ModeLabel::C), 1),
        bc: scan((ModeLabel::B, ModeLabel::C), 2),
        populations: Some(populations),
    };
    let report = analyze(&input, &AnalysisConfig { seed: SEED, ..AnalysisConfig::default() }).unwrap();
    let f = report.fidelity.unwrap();
    let sigma = report.fidelity_sigma.unwrap();
    let agrees = (f - truth).abs() <= SIGMAS * sigma;
    let exact = fidelity_bounds(&exact_coherences(&rho), &BoundsConfig::default()).unwrap();
    let exact_brackets = exact.lower <= truth + 1e-9 && truth <= exact.upper + 1e-9;
    let b = &report.bounds;
    let (sl, su) = (b.lower_sigma.unwrap(), b.upper_sigma.unwrap());
    let sampled_brackets = b.lower - SIGMAS * sl <= truth && truth <= b.upper + SIGMAS * su;
    Outcome {
        pass: agrees && exact_brackets && sampled_brackets,
        detail: format!(
            "true F = {truth:.4}, recovered F = {f:.4} ± {sigma:.4}, exact bounds [{:.4}, {:.4}], \
             sampled bounds [{:.4} ± {sl:.4}, {:.4} ± {su:.4}]",
            exact.lower, exact.upper, b.lower, b.upper
        ),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("heralded generation with the reference unitary", criterion_1),
        ("wave-plate circuit with fitted mirror phase", criterion_2),
        ("gradient-descent synthesis", criterion_3),
        ("fringe law", criterion_4),
        ("coherence-only fidelity bounds", criterion_5),
        ("product-state threshold and certification", criterion_6),
        ("Ryser permanent against permutation expansion", criterion_7),
        ("end-to-end sampled pipeline", criterion_8),
    ];
    let mut failures = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        report(i as u32 + 1, name, t, run(), &mut failures);
    }
    if failures.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::exit(1);
    }
}

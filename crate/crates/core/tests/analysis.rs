mod common;

use std::f64::consts::{FRAC_PI_4, TAU};

use noonforge_core::analysis::{
    analyze, certify_gme, fidelity_at_ratios, fidelity_bounds, fidelity_from_measurements, fit_fringe,
    fit_fringe_exact, gme_threshold, max_fidelity_over_phases, noon_fidelity, propagate_uncertainty,
    simulate_herald_counts, success_ratio, AnalysisConfig, AnalysisError, AnalysisInput, BoundsConfig, CoherenceSet,
    FitConfig, NoonCoherences, PopulationSet,
};
use noonforge_core::fock::{fidelity, noon_state};
use noonforge_core::measurement::{
    apply_noise, default_thetas, fringe_scan, sample_counts, wrap_pi, FringeData, FringeParams, NoiseModel,
};
use noonforge_core::{DensityMatrix, FockSpaceState, ModeLabel};
use proptest::prelude::*;
use rand::Rng;

use common::{exact_coherences, random_noisy_noon, rng};

const AB: (ModeLabel, ModeLabel) = (ModeLabel::A, ModeLabel::B);
const AC: (ModeLabel, ModeLabel) = (ModeLabel::A, ModeLabel::C);
const BC: (ModeLabel, ModeLabel) = (ModeLabel::B, ModeLabel::C);

fn coarse() -> BoundsConfig {
    BoundsConfig { grid_points: 120, delta_points: 512, refine_points: 21 }
}

/// Phase-maximized fidelity straight from the density matrix.
fn truth(rho: &DensityMatrix) -> f64 {
    max_fidelity_over_phases(&PopulationSet::from_density(rho).unwrap(), &NoonCoherences::from_density(rho).unwrap())
        .unwrap()
        .fidelity
}

fn shift_phases(coh: &CoherenceSet, a: f64, b: f64) -> CoherenceSet {
    let s = |f: FringeParams, d: f64| FringeParams { phase: wrap_pi(f.phase + d), ..f };
    CoherenceSet { ab: s(coh.ab, a), ac: s(coh.ac, b), bc: s(coh.bc, b - a) }
}

#[test]
fn fidelity_from_fringes_matches_direct_evaluation() {
    let noon = noon_state(0.8, 2.9);
    for model in [NoiseModel::Dephase { d: 0.5 }, NoiseModel::BadEvent { q: 0.15 }] {
        let rho = apply_noise(&noon.to_density(), model).unwrap();
        let est =
            fidelity_from_measurements(&PopulationSet::from_density(&rho).unwrap(), &exact_coherences(&rho)).unwrap();
        let direct = fidelity(&rho, &noon).unwrap();
        assert!((est.fidelity - direct).abs() < 1e-9, "{model:?}: {} vs {direct}", est.fidelity);
        assert!(wrap_pi(est.alpha1 - 0.8).abs() < 1e-6 && wrap_pi(est.alpha2 - 2.9).abs() < 1e-6);
    }
}

#[test]
fn fringe_route_agrees_with_density_route_on_random_states() {
    let mut r = rng(31);
    for _ in 0..50 {
        let rho = random_noisy_noon(&mut r);
        let est =
            fidelity_from_measurements(&PopulationSet::from_density(&rho).unwrap(), &exact_coherences(&rho)).unwrap();
        assert!((est.fidelity - truth(&rho)).abs() < 1e-9);
    }
}

#[test]
fn phase_optimum_dominates_any_fixed_phase() {
    let mut r = rng(32);
    for _ in 0..20 {
        let rho = random_noisy_noon(&mut r);
        let pop = PopulationSet::from_density(&rho).unwrap();
        let coh = NoonCoherences::from_density(&rho).unwrap();
        let best = max_fidelity_over_phases(&pop, &coh).unwrap();
        assert!((noon_fidelity(&pop, &coh, best.alpha1, best.alpha2) - best.fidelity).abs() < 1e-12);
        for _ in 0..50 {
            let (a1, a2) = (r.random_range(0.0..TAU), r.random_range(0.0..TAU));
            assert!(noon_fidelity(&pop, &coh, a1, a2) <= best.fidelity + 1e-12);
        }
    }
}

#[test]
fn exact_fit_recovers_fringe_parameters() {
    let rho = random_noisy_noon(&mut rng(33));
    let exact = exact_coherences(&rho);
    for (pair, want) in [(AB, exact.ab), (AC, exact.ac), (BC, exact.bc)] {
        let got = fit_fringe_exact(&fringe_scan(&rho, pair, &default_thetas(16)).unwrap()).unwrap();
        assert!((got.offset - want.offset).abs() < 1e-12);
        assert!((got.visibility - want.visibility).abs() < 1e-12);
        assert!(wrap_pi(got.phase - want.phase).abs() < 1e-10);
    }
}

#[test]
fn fits_need_a_full_period_of_points() {
    let rho = noon_state(0.0, 0.0).to_density();
    let few = fringe_scan(&rho, AB, &default_thetas(3)).unwrap();
    assert!(matches!(fit_fringe_exact(&few), Err(AnalysisError::InsufficientPoints { .. })));
    let narrow: Vec<f64> = (0..8).map(|k| 0.05 * k as f64 / 8.0).collect();
    let narrow = fringe_scan(&rho, AB, &narrow).unwrap();
    assert!(matches!(fit_fringe_exact(&narrow), Err(AnalysisError::InsufficientCoverage { .. })));
    // Four points a half period apart alias onto the same two values.
    let aliased = fringe_scan(&rho, AB, &[0.0, FRAC_PI_4 / 2.0, FRAC_PI_4, 1.5 * FRAC_PI_4]).unwrap();
    let err = fit_fringe_exact(&aliased).unwrap_err();
    assert!(err.is_numerical(), "{err}");
}

#[test]
fn bootstrap_uncertainty_shrinks_as_one_over_root_n() {
    let rho = random_noisy_noon(&mut rng(34));
    let exact = fringe_scan(&rho, AB, &default_thetas(16)).unwrap();
    let sigma = |n: u64| {
        let data = sample_counts(&exact, n, 7).unwrap();
        propagate_uncertainty(&data, 400, 8, |d: &FringeData| fit_fringe_exact(d).map(|f| f.visibility)).unwrap().sigma
    };
    let ratio = sigma(2_000) / sigma(32_000);
    assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn bootstrap_of_noiseless_data_has_zero_spread() {
    let exact = fringe_scan(&noon_state(0.0, 0.0).to_density(), AB, &default_thetas(16)).unwrap();
    let est = propagate_uncertainty(&exact, 100, 1, |d: &FringeData| fit_fringe_exact(d).map(|f| f.offset)).unwrap();
    assert_eq!(est.sigma, 0.0);
    assert!(matches!(
        propagate_uncertainty(&exact, 10, 1, |d: &FringeData| fit_fringe_exact(d).map(|f| f.offset)),
        Err(AnalysisError::TooFewResamples(10))
    ));
}

#[test]
fn fitted_sigmas_cover_the_truth() {
    let rho = random_noisy_noon(&mut rng(35));
    let exact = fringe_scan(&rho, AC, &default_thetas(16)).unwrap();
    let want = fit_fringe_exact(&exact).unwrap();
    let mut inside = 0;
    for seed in 0..40 {
        let f = fit_fringe(&sample_counts(&exact, 2000, seed).unwrap(), &FitConfig { bootstrap_resamples: 200, seed })
            .unwrap();
        assert!(f.visibility_sigma > 0.0 && f.offset_sigma > 0.0);
        if (f.visibility - want.visibility).abs() <= 2.0 * f.visibility_sigma {
            inside += 1;
        }
    }
    // About 95% expected; allow for the sampling of 40 trials.
    assert!(inside >= 32, "{inside}/40");
}

#[test]
fn success_ratio_estimates_the_herald_probability() {
    const N: u64 = 100_000;
    let k = simulate_herald_counts(0.25, N, 3);
    let est = success_ratio(k, N).unwrap();
    assert!((est.value - 0.25).abs() <= 3.0 * est.sigma, "{} ± {}", est.value, est.sigma);
    let expected_sigma = 0.25 * (1.0 / (0.25 * N as f64) + 1.0 / N as f64).sqrt();
    assert!((est.sigma / expected_sigma - 1.0).abs() < 0.01);
    assert!(matches!(success_ratio(1, 0), Err(AnalysisError::ZeroDenominator)));
}

#[test]
fn product_state_threshold_is_two_thirds_on_every_cut() {
    let report = gme_threshold(&noon_state(0.0, 0.0)).unwrap();
    assert!((report.threshold - 2.0 / 3.0).abs() < 1e-14);
    for s in report.sigma2_max {
        assert!((s - 2.0 / 3.0).abs() < 1e-14);
    }
    assert!((certify_gme(0.8, 0.01, report.threshold).unwrap() - 40.0 / 3.0).abs() < 1e-9);
    assert!(certify_gme(0.8, 0.0, report.threshold).is_err());
}

#[test]
fn bounds_bracket_the_truth_and_are_ordered() {
    let mut r = rng(36);
    for _ in 0..10 {
        let rho = random_noisy_noon(&mut r);
        let b = fidelity_bounds(&exact_coherences(&rho), &BoundsConfig::default()).unwrap();
        let f = truth(&rho);
        assert!(b.lower <= f + 1e-9 && f <= b.upper + 1e-9, "{} ≤ {f} ≤ {}", b.lower, b.upper);
        assert!(b.lower >= 0.0 && b.upper <= 1.0 + 1e-12);
        assert!(b.at_lower.fidelity == b.lower || b.at_upper.fidelity == b.lower);
    }
}

#[test]
fn analysis_of_noiseless_fringes_recovers_the_state() {
    let rho = random_noisy_noon(&mut rng(37));
    let thetas = default_thetas(16);
    let input = AnalysisInput::from_fringes(
        vec![
            fringe_scan(&rho, BC, &thetas).unwrap(),
            fringe_scan(&rho, AB, &thetas).unwrap(),
            fringe_scan(&rho, AC, &thetas).unwrap(),
        ],
        Some(PopulationSet::from_density(&rho).unwrap()),
    )
    .unwrap();
    let config = AnalysisConfig { bounds_resamples: 0, ..AnalysisConfig::default() };
    let report = analyze(&input, &config).unwrap();
    let f = truth(&rho);
    assert!((report.fidelity.unwrap() - f).abs() < 1e-9);
    assert_eq!(report.fidelity_sigma, Some(0.0));
    assert!(report.bounds.lower <= f + 1e-9 && f <= report.bounds.upper + 1e-9);
    assert_eq!(report.bounds.lower_sigma, None);
    assert_eq!(report.gme.certified, f > 2.0 / 3.0);

    let without = analyze(&AnalysisInput { populations: None, ..input.clone() }, &config).unwrap();
    assert_eq!(without.fidelity, None);
    assert_eq!(without.gme.certified, without.bounds.lower > 2.0 / 3.0);
}

#[test]
fn analysis_input_needs_each_pair_once() {
    let rho = noon_state(0.0, 0.0).to_density();
    let scan = |pair| fringe_scan(&rho, pair, &default_thetas(8)).unwrap();
    assert!(AnalysisInput::from_fringes(vec![scan(AB), scan(AC)], None).is_err());
    assert!(AnalysisInput::from_fringes(vec![scan(AB), scan(AB), scan(BC)], None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bounds_ignore_the_noon_phases(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let coh = exact_coherences(&random_noisy_noon(&mut rng(seed)));
        let base = fidelity_bounds(&coh, &coarse()).unwrap();
        let shifted = fidelity_bounds(&shift_phases(&coh, a, b), &coarse()).unwrap();
        prop_assert!((base.lower - shifted.lower).abs() < 1e-6);
        prop_assert!((base.upper - shifted.upper).abs() < 1e-6);
    }

    #[test]
    fn known_ratios_collapse_the_bounds(seed in any::<u64>()) {
        let rho = random_noisy_noon(&mut rng(seed));
        let pop = PopulationSet::from_density(&rho).unwrap();
        let coh = exact_coherences(&rho);
        let at = fidelity_at_ratios(&coh, pop.p020 / pop.p200, pop.p002 / pop.p200, &BoundsConfig::default()).unwrap();
        let full = fidelity_from_measurements(&pop, &coh).unwrap();
        prop_assert!((at.fidelity - full.fidelity).abs() < 1e-9, "{} vs {}", at.fidelity, full.fidelity);
        prop_assert!((at.p_a - pop.p200).abs() < 1e-12);
    }

    #[test]
    fn product_state_threshold_ignores_phases(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        prop_assert!((gme_threshold(&noon_state(a, b)).unwrap().threshold - 2.0 / 3.0).abs() < 1e-14);
    }
}

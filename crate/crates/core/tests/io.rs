use noonforge_core::analysis::PopulationSet;
use noonforge_core::fock::noon_state;
use noonforge_core::io::{read_fringe_files, read_populations, sidecar_path, write_fringe_files, write_json, IoError};
use noonforge_core::measurement::{default_thetas, fringe_scan, sample_counts, FringeValue};
use noonforge_core::{FockSpaceState, ModeLabel};

const AB: (ModeLabel, ModeLabel) = (ModeLabel::A, ModeLabel::B);

#[test]
fn fringe_files_round_trip_through_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let exact = fringe_scan(&noon_state(0.3, 0.0).to_density(), AB, &default_thetas(16)).unwrap();
    let counts = sample_counts(&exact, 1000, 4).unwrap();
    let path = write_fringe_files(dir.path(), "ab", &counts).unwrap();
    assert!(sidecar_path(&path).exists());
    assert_eq!(read_fringe_files(&path, None).unwrap(), counts);
}

#[test]
fn probability_files_keep_the_coincidences() {
    let dir = tempfile::tempdir().unwrap();
    let exact = fringe_scan(&noon_state(0.3, 0.0).to_density(), AB, &default_thetas(8)).unwrap();
    let path = write_fringe_files(dir.path(), "ab", &exact).unwrap();
    let back = read_fringe_files(&path, None).unwrap();
    for (a, b) in exact.samples().iter().zip(back.samples()) {
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.value.p11().unwrap(), b.value.p11().unwrap());
        let FringeValue::Probability { p20, p02, .. } = b.value else { panic!("probability mode") };
        assert_eq!(p20, p02);
    }
}

#[test]
fn a_csv_without_sidecar_needs_an_explicit_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bare.csv");
    std::fs::write(&path, "theta_rad,c11,c20,c02\n0.0,1,2,3\n0.1,2,2,2\n").unwrap();
    assert!(matches!(read_fringe_files(&path, None), Err(IoError::Format(_))));
    assert_eq!(read_fringe_files(&path, Some(AB)).unwrap().samples().len(), 2);
    assert!(matches!(read_fringe_files(&dir.path().join("missing.csv"), Some(AB)), Err(IoError::File { .. })));
}

#[test]
fn populations_use_named_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pop.json");
    let pop = PopulationSet::from_counts([280, 20, 20, 330, 20, 330]).unwrap();
    write_json(&path, &pop).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"P_200\"") && text.ends_with('\n'));
    assert_eq!(read_populations(&path).unwrap(), pop);
    std::fs::write(&path, r#"{"P_200": 0.5, "P_020": 0.5}"#).unwrap();
    assert!(matches!(read_populations(&path), Err(IoError::Json(_))));
}

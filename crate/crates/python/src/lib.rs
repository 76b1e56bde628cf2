//! Python bindings: unitaries, circuits, heralded states, fringes, bounds,
//! entanglement thresholds and the analysis pipeline.
//!
//! Matrices cross the boundary as nested lists of Python `complex`; structured
//! results come back as plain dicts.

use std::path::PathBuf;

use noonforge_core::analysis::{
    analyze, certify_gme, fidelity_bounds, gme_threshold, max_fidelity_over_phases, AnalysisConfig, AnalysisError,
    AnalysisInput, BoundsConfig, CoherenceSet, NoonCoherences, PopulationSet,
};
use noonforge_core::fock::{herald, noon_state, permanent_ryser, FockError};
use noonforge_core::io::{read_fringe_files, read_populations, IoError};
use noonforge_core::measurement::{
    apply_noise, default_thetas, fringe_params_from_rho, fringe_scan, projected_mode, vacuum_project, MeasurementError,
    NoiseModel,
};
use noonforge_core::optics::{compose, unitary_distance, Circuit, OpticsError, SagnacSettings as CoreSagnac};
use noonforge_core::synth::{
    fit_circuit_angles, fit_mirror_phase, heralded_objective, reference_unitary, synthesize, FitOptions, SynthConfig,
    SynthError, HERALD_INPUT,
};
use noonforge_core::{
    CMatrix, DensityMatrix as CoreDensity, FockSpaceState, ModeLabel, ModeUnitary as CoreUnitary, PureState,
};
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn analysis_error(e: AnalysisError) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        value_error(e)
    }
}

macro_rules! to_value_error {
    ($($t:ty),*) => {
        $(impl From<Wrapped<$t>> for PyErr {
            fn from(e: Wrapped<$t>) -> Self {
                value_error(e.0)
            }
        })*
    };
}

/// Routes core errors into Python exceptions without orphan-rule conflicts.
struct Wrapped<E>(E);
to_value_error!(FockError, OpticsError, SynthError, MeasurementError, IoError, serde_json::Error);

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T, E> OrPy<T> for Result<T, E>
where
    PyErr: From<Wrapped<E>>,
{
    fn py(self) -> PyResult<T> {
        self.map_err(|e| Wrapped(e).into())
    }
}

/// Serializes through JSON into Python builtins.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).py()?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = py.import("json")?.call_method1("dumps", (value,))?.extract()?;
    serde_json::from_str(&text).py()
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(value_error("expected a square matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows_of(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn pair_of(label: &str) -> PyResult<(ModeLabel, ModeLabel)> {
    match label.to_ascii_uppercase().as_str() {
        "AB" => Ok((ModeLabel::A, ModeLabel::B)),
        "AC" => Ok((ModeLabel::A, ModeLabel::C)),
        "BC" => Ok((ModeLabel::B, ModeLabel::C)),
        _ => Err(value_error(format!("pair must be AB, AC or BC, got {label:?}"))),
    }
}

/// A unitary on optical modes. Columns are input modes, rows output modes.
#[pyclass(module = "noonforge", frozen, skip_from_py_object)]
#[derive(Clone)]
struct ModeUnitary {
    inner: CoreUnitary,
}

#[pymethods]
impl ModeUnitary {
    /// From a square nested list of complex numbers; rejects non-unitary input.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(ModeUnitary { inner: CoreUnitary::new(matrix_from_rows(rows)?).py()? })
    }

    /// The tabulated reference device.
    #[staticmethod]
    fn reference() -> Self {
        ModeUnitary { inner: reference_unitary() }
    }

    /// Composes an element list given as a dict or JSON string.
    #[staticmethod]
    fn from_circuit(py: Python<'_>, circuit: &Bound<'_, PyAny>) -> PyResult<Self> {
        let circuit: Circuit = match circuit.extract::<String>() {
            Ok(text) => serde_json::from_str(&text).py()?,
            Err(_) => from_py(py, circuit)?,
        };
        Ok(ModeUnitary { inner: compose(&circuit).py()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        rows_of(self.inner.matrix())
    }

    /// `(fidelity, success_probability)` of the heralded state from `|1,1,1,0⟩`.
    fn heralded_objective(&self) -> PyResult<(f64, f64)> {
        let s = heralded_objective(&self.inner).py()?;
        Ok((s.fidelity, s.success_probability))
    }

    /// Heralds one photon in the fourth mode and returns `(state, probability)`.
    fn herald(&self) -> PyResult<(DensityMatrix, f64)> {
        let out = PureState::basis_state(&HERALD_INPUT).py()?.evolve(&self.inner).py()?;
        let h = herald(&out, ModeLabel::Herald, 1).py()?;
        if h.probability <= 0.0 {
            return Err(PyArithmeticError::new_err("the device never heralds"));
        }
        Ok((DensityMatrix { inner: h.state.to_density() }, h.probability))
    }

    /// Global-phase-invariant distance in `[0, 1]`.
    fn distance(&self, other: &ModeUnitary) -> PyResult<f64> {
        unitary_distance(&self.inner, &other.inner).py()
    }

    fn __repr__(&self) -> String {
        format!("ModeUnitary(dim={})", self.inner.dim())
    }
}

/// Wave-plate angles and mirror phase of the Sagnac interferometer, radians.
#[pyclass(module = "noonforge", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct SagnacSettings {
    hwp1: f64,
    hwp2: f64,
    hwp3: f64,
    qwp1: f64,
    mirror_phase: f64,
}

impl SagnacSettings {
    fn core(&self) -> CoreSagnac {
        CoreSagnac::from_vec(&[self.hwp1, self.hwp2, self.hwp3, self.qwp1, self.mirror_phase])
    }

    fn wrap(s: CoreSagnac) -> Self {
        SagnacSettings { hwp1: s.hwp1, hwp2: s.hwp2, hwp3: s.hwp3, qwp1: s.qwp1, mirror_phase: s.mirror_phase }
    }
}

#[pymethods]
impl SagnacSettings {
    #[new]
    #[pyo3(signature = (hwp1, hwp2, hwp3, qwp1, mirror_phase = 0.0))]
    fn new(hwp1: f64, hwp2: f64, hwp3: f64, qwp1: f64, mirror_phase: f64) -> Self {
        SagnacSettings { hwp1, hwp2, hwp3, qwp1, mirror_phase }
    }

    /// The experimental wave-plate angles.
    #[staticmethod]
    #[pyo3(signature = (mirror_phase = 0.0))]
    fn reported(mirror_phase: f64) -> Self {
        Self::wrap(CoreSagnac::reported(mirror_phase))
    }

    fn unitary(&self) -> ModeUnitary {
        ModeUnitary { inner: self.core().unitary() }
    }

    /// The element list as a dict.
    fn circuit<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.core().circuit())
    }

    /// Best common mirror phase for these plate angles; returns
    /// `(settings, fidelity, success_probability)`.
    fn fit_mirror_phase(&self) -> PyResult<(SagnacSettings, f64, f64)> {
        let fit = fit_mirror_phase(&self.core()).py()?;
        Ok((Self::wrap(fit.settings), fit.score.fidelity, fit.score.success_probability))
    }

    fn __repr__(&self) -> String {
        format!(
            "SagnacSettings(hwp1={}, hwp2={}, hwp3={}, qwp1={}, mirror_phase={})",
            self.hwp1, self.hwp2, self.hwp3, self.qwp1, self.mirror_phase
        )
    }
}

/// Two photons in modes A, B, C, basis order `200, 110, 101, 020, 011, 002`.
#[pyclass(module = "noonforge", frozen, skip_from_py_object)]
#[derive(Clone)]
struct DensityMatrix {
    inner: CoreDensity,
}

#[pymethods]
impl DensityMatrix {
    /// The pure NOON state `(|200⟩ + e^{iα₁}|020⟩ + e^{iα₂}|002⟩)/√3`.
    #[staticmethod]
    #[pyo3(signature = (alpha1 = 0.0, alpha2 = 0.0))]
    fn noon(alpha1: f64, alpha2: f64) -> Self {
        DensityMatrix { inner: noon_state(alpha1, alpha2).to_density() }
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        rows_of(self.inner.matrix())
    }

    fn populations(&self) -> PyResult<[f64; 6]> {
        Ok(PopulationSet::from_density(&self.inner).map_err(analysis_error)?.as_array())
    }

    /// Largest NOON fidelity over the two phases: `(fidelity, alpha1, alpha2)`.
    fn noon_fidelity(&self) -> PyResult<(f64, f64, f64)> {
        let pop = PopulationSet::from_density(&self.inner).map_err(analysis_error)?;
        let coh = NoonCoherences::from_density(&self.inner).map_err(analysis_error)?;
        let e = max_fidelity_over_phases(&pop, &coh).map_err(analysis_error)?;
        Ok((e.fidelity, e.alpha1, e.alpha2))
    }

    /// Applies `white`, `dephase` or `bad_event` noise of the given strength.
    fn with_noise(&self, kind: &str, strength: f64) -> PyResult<DensityMatrix> {
        let model = match kind {
            "white" => NoiseModel::White { p: strength },
            "dephase" => NoiseModel::Dephase { d: strength },
            "bad_event" => NoiseModel::BadEvent { q: strength },
            _ => return Err(value_error(format!("unknown noise kind {kind:?}"))),
        };
        Ok(DensityMatrix { inner: apply_noise(&self.inner, model).py()? })
    }

    /// Fringe offset, visibility and phase of a pair after vacuum projection
    /// of the third mode.
    fn fringe_params<'py>(&self, py: Python<'py>, pair: &str) -> PyResult<Bound<'py, PyAny>> {
        let state = vacuum_project(&self.inner, projected_mode(pair_of(pair)?).py()?).py()?;
        to_py(py, &fringe_params_from_rho(&state))
    }

    /// `(theta, P11)` over one period at `points` analyzer angles.
    #[pyo3(signature = (pair, points = 16))]
    fn fringe(&self, pair: &str, points: usize) -> PyResult<Vec<(f64, f64)>> {
        let data = fringe_scan(&self.inner, pair_of(pair)?, &default_thetas(points)).py()?;
        data.samples().iter().map(|s| Ok((s.theta, s.value.p11().py()?))).collect()
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(trace={:.6})", self.inner.trace())
    }
}

/// Permanent of a square complex matrix.
#[pyfunction]
fn permanent(rows: Vec<Vec<Complex64>>) -> PyResult<Complex64> {
    permanent_ryser(&matrix_from_rows(rows)?).py()
}

/// Seeded multi-restart search; results best first, as dicts.
#[pyfunction]
#[pyo3(signature = (n_restarts = 20, seed = 0, max_iters = None, fit_circuits = true))]
fn synthesize_unitaries<'py>(
    py: Python<'py>,
    n_restarts: usize,
    seed: u64,
    max_iters: Option<usize>,
    fit_circuits: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = SynthConfig { n_restarts, rng_seed: seed, fit_circuits, ..SynthConfig::default() };
    if let Some(n) = max_iters {
        config.max_iters = n;
    }
    let results = py.detach(|| synthesize(&config)).py()?;
    to_py(py, &results)
}

/// Fits the Sagnac settings to a unitary: `(settings, residual)`.
#[pyfunction]
#[pyo3(signature = (target, n_starts = 64, seed = 0))]
fn fit_circuit(target: &ModeUnitary, n_starts: usize, seed: u64) -> PyResult<(SagnacSettings, f64)> {
    let fit = fit_circuit_angles(&target.inner, &FitOptions { n_starts, seed }).py()?;
    Ok((SagnacSettings::wrap(fit.settings), fit.residual))
}

/// Coherence-only fidelity bounds `(lower, upper)` from fringe offsets,
/// contrasts `V/A` and phases of AB, AC, BC.
#[pyfunction]
#[pyo3(signature = (contrasts, offsets = [1.0; 3], phases = [0.0; 3]))]
fn fidelity_bounds_from(contrasts: [f64; 3], offsets: [f64; 3], phases: [f64; 3]) -> PyResult<(f64, f64)> {
    let f =
        |k: usize| noonforge_core::measurement::FringeParams::exact(offsets[k], contrasts[k] * offsets[k], phases[k]);
    let coh = CoherenceSet { ab: f(0), ac: f(1), bc: f(2) };
    let b = fidelity_bounds(&coh, &BoundsConfig::default()).map_err(analysis_error)?;
    Ok((b.lower, b.upper))
}

/// Largest product-state overlap of the NOON state with the given phases.
#[pyfunction]
#[pyo3(signature = (alpha1 = 0.0, alpha2 = 0.0))]
fn product_state_threshold(alpha1: f64, alpha2: f64) -> PyResult<f64> {
    Ok(gme_threshold(&noon_state(alpha1, alpha2)).map_err(analysis_error)?.threshold)
}

/// Standard deviations by which `fidelity` exceeds `threshold`.
#[pyfunction]
#[pyo3(signature = (fidelity, sigma, threshold = 2.0 / 3.0))]
fn z_score(fidelity: f64, sigma: f64, threshold: f64) -> PyResult<f64> {
    certify_gme(fidelity, sigma, threshold).map_err(analysis_error)
}

/// Full analysis of three fringe CSVs (AB, AC, BC) and optional populations.
#[pyfunction]
#[pyo3(signature = (ab, ac, bc, populations = None, seed = 0))]
fn analyze_files<'py>(
    py: Python<'py>,
    ab: PathBuf,
    ac: PathBuf,
    bc: PathBuf,
    populations: Option<PathBuf>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let pairs = [(ModeLabel::A, ModeLabel::B), (ModeLabel::A, ModeLabel::C), (ModeLabel::B, ModeLabel::C)];
    let fringes = [ab, ac, bc]
        .iter()
        .zip(pairs)
        .map(|(path, pair)| read_fringe_files(path, Some(pair)).py())
        .collect::<PyResult<Vec<_>>>()?;
    let pops = populations.map(|p| read_populations(&p).py()).transpose()?;
    let input = AnalysisInput::from_fringes(fringes, pops).map_err(analysis_error)?;
    let config = AnalysisConfig { seed, ..AnalysisConfig::default() };
    let report = py.detach(|| analyze(&input, &config)).map_err(analysis_error)?;
    to_py(py, &report)
}

#[pymodule]
fn noonforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ModeUnitary>()?;
    m.add_class::<SagnacSettings>()?;
    m.add_class::<DensityMatrix>()?;
    m.add_function(wrap_pyfunction!(permanent, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_unitaries, m)?)?;
    m.add_function(wrap_pyfunction!(fit_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_bounds_from, m)?)?;
    m.add_function(wrap_pyfunction!(product_state_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(z_score, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_files, m)?)?;
    Ok(())
}

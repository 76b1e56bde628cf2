use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMatrix, FockError};

pub const UNITARITY_TOL: f64 = 1e-10;

/// An m×m unitary acting on mode creation operators.
///
/// Column convention: `a†_j → Σ_i U[i][j] a†_i`, so column `j` is the image of
/// input mode `j`. Composition of optical elements is then ordinary matrix
/// multiplication, later elements on the left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ModeUnitary {
    matrix: CMatrix,
}

impl ModeUnitary {
    pub fn new(matrix: CMatrix) -> Result<Self, FockError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FockError::NonSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOL {
            return Err(FockError::NotUnitary { deviation });
        }
        Ok(ModeUnitary { matrix })
    }

    /// Skips the unitarity check; for products and closed forms that are
    /// unitary by construction.
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(unitarity_deviation(&matrix) < 1e-8);
        ModeUnitary { matrix }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, FockError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(FockError::NonSquare { rows: n, cols: bad.len() });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        ModeUnitary { matrix: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        ModeUnitary { matrix: self.matrix.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        ModeUnitary { matrix: self.matrix.transpose() }
    }

    /// `self · other`: apply `other` first.
    pub fn then_after(&self, other: &ModeUnitary) -> Result<Self, FockError> {
        if self.dim() != other.dim() {
            return Err(FockError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(ModeUnitary::new_unchecked(&self.matrix * &other.matrix))
    }

    /// Multiplies by a global phase `e^{iχ}`.
    pub fn with_global_phase(&self, chi: f64) -> Self {
        ModeUnitary { matrix: self.matrix.map(|z| z * Complex64::from_polar(1.0, chi)) }
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim()).map(|i| self.matrix.row(i).iter().copied().collect()).collect()
    }
}

/// Largest elementwise deviation of `U†U` from the identity.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(expected, 0.0)).norm());
        }
    }
    worst
}

/// Row-major complex matrix as `[[[re, im], …], …]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixJson((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn to_matrix(&self) -> Result<CMatrix, FockError> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(FockError::Malformed("ragged matrix rows".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| Complex64::new(self.0[i][j][0], self.0[i][j][1])))
    }
}

impl TryFrom<MatrixJson> for ModeUnitary {
    type Error = FockError;

    fn try_from(value: MatrixJson) -> Result<Self, Self::Error> {
        ModeUnitary::new(value.to_matrix()?)
    }
}

impl From<ModeUnitary> for MatrixJson {
    fn from(u: ModeUnitary) -> Self {
        MatrixJson::from_matrix(&u.matrix)
    }
}

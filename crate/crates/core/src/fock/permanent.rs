//! Matrix permanents.
//!
//! Multi-photon transition amplitudes through a linear-optical network are
//! permanents of submatrices of the mode unitary. Small matrices (n ≤ 3) are
//! expanded directly; larger ones use Ryser's formula with Gray-code ordering
//! of the column subsets, which costs O(2ⁿ·n).

use num_complex::Complex64;

use super::{CMatrix, FockError};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn permanent(m: &CMatrix) -> Result<Complex64, FockError> {
    check_square(m)?;
    Ok(match m.nrows() {
        0 => ONE,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] + m[(1, 2)] * m[(2, 1)])
                + m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] + m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] + m[(1, 1)] * m[(2, 0)])
        }
        _ => ryser(m),
    })
}

/// Ryser evaluation for any size, exposed separately so it can be checked
/// against an independent expansion on small matrices too.
pub fn permanent_ryser(m: &CMatrix) -> Result<Complex64, FockError> {
    check_square(m)?;
    Ok(ryser(m))
}

fn check_square(m: &CMatrix) -> Result<(), FockError> {
    if m.nrows() != m.ncols() {
        return Err(FockError::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() > 30 {
        return Err(FockError::TooLarge(m.nrows()));
    }
    Ok(())
}

// per(M) = (-1)^n Σ_{S ≠ ∅} (-1)^{|S|} Π_i Σ_{j∈S} m_ij
fn ryser(m: &CMatrix) -> Complex64 {
    let n = m.nrows();
    if n == 0 {
        return ONE;
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        gray ^= 1 << col;
        if gray & (1 << col) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, col)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_all_ones() {
        let id = CMatrix::identity(3, 3);
        assert!((permanent(&id).unwrap() - ONE).norm() < 1e-15);
        let ones = CMatrix::from_element(3, 3, ONE);
        assert!((permanent(&ones).unwrap() - Complex64::new(6.0, 0.0)).norm() < 1e-14);
        let ones5 = CMatrix::from_element(5, 5, ONE);
        assert!((permanent(&ones5).unwrap() - Complex64::new(120.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn empty_matrix_has_unit_permanent() {
        let empty = CMatrix::zeros(0, 0);
        assert_eq!(permanent(&empty).unwrap(), ONE);
        assert_eq!(permanent_ryser(&empty).unwrap(), ONE);
    }

    #[test]
    fn non_square_rejected() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(permanent(&m), Err(FockError::NonSquare { rows: 2, cols: 3 })));
    }

    #[test]
    fn ryser_agrees_with_direct_small_cases() {
        let m = CMatrix::from_fn(3, 3, |i, j| Complex64::new(i as f64 + 0.5, j as f64 - 0.25));
        let a = permanent(&m).unwrap();
        let b = permanent_ryser(&m).unwrap();
        assert!((a - b).norm() < 1e-12);
    }
}

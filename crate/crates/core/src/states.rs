//! Validation of states and observables, plus random generators used by the
//! verification suite and the tests.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Dims, HERMITIAN_TOL};

/// Threshold for "is a state": minimum eigenvalue and trace deviation.
pub const STATE_TOL: f64 = 1e-9;

/// Checks that `rho` is a `d × d` density matrix (Hermitian, PSD, unit trace).
pub fn validate_state(rho: &ComplexMatrix, d: usize) -> Result<()> {
    if rho.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {d}x{d} state, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let defect = rho.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!(
            "not Hermitian (relative defect {defect:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
    }
    let min = rho.min_eigenvalue()?;
    if min < -STATE_TOL {
        return Err(Error::InvalidState(format!(
            "not positive semidefinite (minimum eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}

/// Checks that `a` is a Hermitian `d × d` observable.
pub fn validate_observable(a: &ComplexMatrix, d: usize) -> Result<()> {
    if a.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {d}x{d} observable, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn random_rect_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, data).expect("finite gaussian entries")
}

pub fn random_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_rect_matrix(d, d, rng)
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_matrix(d, rng).hermitian_part()
}

/// Full-rank random state `GG†/Tr[GG†]`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    w.scale_real(1.0 / tr)
}

/// Haar-random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let v = random_pure_vector(d, rng);
    ComplexMatrix::outer(&v, &v)
}

/// Choi operator of a random hermiticity-preserving map (a random Hermitian
/// matrix on `K ⊗ H`).
pub fn random_hp_choi<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> ComplexMatrix {
    random_hermitian(dims.choi_side(), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=5 {
            validate_state(&random_density_matrix(d, &mut rng), d).unwrap();
            validate_state(&random_pure_state(d, &mut rng), d).unwrap();
        }
    }

    #[test]
    fn validate_state_rejects() {
        let bad_trace = ComplexMatrix::identity(2);
        assert!(matches!(validate_state(&bad_trace, 2), Err(Error::InvalidState(_))));
        let negative = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(validate_state(&negative, 2), Err(Error::InvalidState(_))));
        let wrong = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(matches!(validate_state(&wrong, 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn validate_observable_rejects_non_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_matrix(3, &mut rng);
        assert!(matches!(validate_observable(&m, 3), Err(Error::NotHermitian(_))));
        validate_observable(&m.hermitian_part(), 3).unwrap();
    }
}

//! Fixed two-copy operators: swap, symmetric/antisymmetric projectors, the
//! phase-twisted `Q±`, and the maximally entangled state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Sign, ONE, ZERO};

/// Swap `S|φ,χ⟩ = |χ,φ⟩` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let n = d * d;
    ComplexMatrix::from_fn(n, n, |row, col| {
        let (i, j) = (row / d, row % d);
        if col == j * d + i {
            ONE
        } else {
            ZERO
        }
    })
}

/// `P± = (𝟙 ± S)/2`.
pub fn sector_projector(d: usize, sign: Sign) -> ComplexMatrix {
    let s = swap_operator(d).scale_real(sign.value());
    (&ComplexMatrix::identity(d * d) + &s).scale_real(0.5)
}

/// The unit-modulus phase `z = (−1 + i√(d²−1))/d`.
pub fn swap_phase(d: usize) -> Result<Complex64> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "the swap phase needs d >= 2, got {d}"
        )));
    }
    let d = d as f64;
    Ok(Complex64::new(-1.0 / d, (d * d - 1.0).sqrt() / d))
}

/// `Q⁺ = (𝟙 + zS)/2` and `Q⁻ = (Q⁺)†`.
pub fn q_operator(d: usize, sign: Sign) -> Result<ComplexMatrix> {
    let z = swap_phase(d)?;
    let z = match sign {
        Sign::Plus => z,
        Sign::Minus => z.conj(),
    };
    let zs = swap_operator(d).scale(z);
    Ok((&ComplexMatrix::identity(d * d) + &zs).scale_real(0.5))
}

/// `|Φ⁺⟩ = d^{-1/2} Σᵢ |i,i⟩`.
pub fn maximally_entangled_vector(d: usize) -> Vec<Complex64> {
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    (0..d * d).map(|k| if k % (d + 1) == 0 { amp } else { ZERO }).collect()
}

/// `Φ⁺ = |Φ⁺⟩⟨Φ⁺| = d⁻¹ Σ_{i,j} |i,i⟩⟨j,j|`.
pub fn maximally_entangled_projector(d: usize) -> ComplexMatrix {
    let v = maximally_entangled_vector(d);
    ComplexMatrix::outer(&v, &v)
}

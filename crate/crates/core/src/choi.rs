//! The Choi isomorphism. A linear map `L: L(H) -> L(K)` is stored as its
//! Choi operator `J(L) = Σ_{i,j} L(|i⟩⟨j|) ⊗ |i⟩⟨j|` on `K ⊗ H`; there is no
//! separate map type.
//!
//! The map is recovered as `L(M) = Tr_H[J (𝟙_K ⊗ Mᵀ)]`. `L` is CP iff `J` is
//! positive semidefinite, HP iff `J` is Hermitian and TP iff `Tr_K[J] = 𝟙_H`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Dims, ZERO};

/// Eigenvalues of a Choi operator below this fraction of the largest one are
/// treated as zero when extracting Kraus operators.
pub const KRAUS_REL_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiOperator {
    matrix: ComplexMatrix,
    dims: Dims,
}

impl ChoiOperator {
    pub fn new(matrix: ComplexMatrix, dims: Dims) -> Result<Self> {
        let side = dims.choi_side();
        if matrix.shape() != (side, side) {
            return Err(Error::DimensionMismatch(format!(
                "Choi operator for d_in={}, d_out={} must be {side}x{side}, got {}x{}",
                dims.d_in,
                dims.d_out,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Builds `J(L)` from the action of `L` on the matrix units `|i⟩⟨j|`.
    /// `action` must be linear; only its values on the basis are used.
    pub fn from_action<F>(dims: Dims, action: F) -> Result<Self>
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        let (din, dout) = (dims.d_in, dims.d_out);
        let side = dims.choi_side();
        let mut j = ComplexMatrix::zeros(side, side).into_inner();
        for a in 0..din {
            for b in 0..din {
                let out = action(&ComplexMatrix::unit(din, a, b));
                if out.shape() != (dout, dout) {
                    return Err(Error::DimensionMismatch(format!(
                        "map output must be {dout}x{dout}, got {}x{}",
                        out.rows(),
                        out.cols()
                    )));
                }
                for k in 0..dout {
                    for l in 0..dout {
                        j[(k * din + a, l * din + b)] = out.get(k, l);
                    }
                }
            }
        }
        Self::new(ComplexMatrix::from_inner(j), dims)
    }

    /// Choi operator of the channel `ρ ↦ Σ K ρ K†`.
    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus set".into()))?;
        let (dout, din) = first.shape();
        let dims = Dims::new(din, dout)?;
        let side = dims.choi_side();
        let mut j = ComplexMatrix::zeros(side, side);
        for k in kraus {
            if k.shape() != (dout, din) {
                return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
            }
            // |v⟩ = Σᵢ K|i⟩ ⊗ |i⟩, so v[k·d_in + i] = K[k, i].
            let v = k.to_row_major();
            j = &j + &ComplexMatrix::outer(&v, &v);
        }
        Self::new(j, dims)
    }

    /// The identity channel on `C^d`, whose Choi operator is `d·Φ⁺`.
    pub fn identity_channel(d: usize) -> Result<Self> {
        Self::from_action(Dims::new(d, d)?, |m| m.clone())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `L(M)` for a `d_in × d_in` matrix `M`.
    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (din, dout) = (self.dims.d_in, self.dims.d_out);
        if m.shape() != (din, din) {
            return Err(Error::DimensionMismatch(format!(
                "map input must be {din}x{din}, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let j = self.matrix.as_inner();
        let m = m.as_inner();
        Ok(ComplexMatrix::from_fn(dout, dout, |k, l| {
            let mut acc = ZERO;
            for a in 0..din {
                for b in 0..din {
                    acc += j[(k * din + a, l * din + b)] * m[(a, b)];
                }
            }
            acc
        }))
    }

    /// `Tr_K[J]`, the `d_in × d_in` operator that equals `𝟙` for TP maps.
    pub fn output_trace(&self) -> ComplexMatrix {
        self.matrix
            .partial_trace(&[self.dims.d_out, self.dims.d_in], &[1])
            .expect("Choi shape is validated at construction")
    }

    /// `‖Tr_K[J] − 𝟙‖_F`.
    pub fn tp_deviation(&self) -> f64 {
        self.output_trace()
            .distance(&ComplexMatrix::identity(self.dims.d_in))
    }

    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        self.matrix.antihermitian_norm() <= tol * self.matrix.frobenius_norm()
    }

    /// PSD within `tol` (absolute, on both the anti-Hermitian part and the
    /// smallest eigenvalue of the Hermitian part).
    pub fn is_completely_positive(&self, tol: f64) -> bool {
        if self.matrix.antihermitian_norm() > tol {
            return false;
        }
        match self.matrix.hermitian_part().min_eigenvalue() {
            Ok(min) => min >= -tol,
            Err(_) => false,
        }
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.tp_deviation() <= tol
    }

    /// Kraus operators `K_α = √μ_α · reshape(v_α)` from the eigenvectors of
    /// `J`. Fails if `J` is not CP within `tol`.
    pub fn kraus_operators(&self, tol: f64) -> Result<Vec<ComplexMatrix>> {
        if self.matrix.antihermitian_norm() > tol {
            return Err(Error::NotHermitian(self.matrix.hermiticity_defect()));
        }
        let eig = self.matrix.hermitian_part().eigh()?;
        if eig.values[0] < -tol {
            return Err(Error::NotCompletelyPositive(eig.values[0]));
        }
        let max = *eig.values.last().expect("non-empty spectrum");
        if max <= 0.0 {
            return Ok(Vec::new());
        }
        let (din, dout) = (self.dims.d_in, self.dims.d_out);
        Ok(eig
            .values
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &mu)| mu > KRAUS_REL_CUTOFF * max)
            .map(|(k, &mu)| {
                let v = eig.vector(k);
                let s = mu.sqrt();
                ComplexMatrix::from_fn(dout, din, |r, c| v[r * din + c] * s)
            })
            .collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s),
            dims: self.dims,
        }
    }

    /// `Σ cᵢ Jᵢ`; all operators must share the same dimensions.
    pub fn linear_combination(terms: &[(f64, &ChoiOperator)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty linear combination".into()))?;
        let dims = first.dims;
        let side = dims.choi_side();
        let mut acc = ComplexMatrix::zeros(side, side);
        for (c, j) in terms {
            if j.dims != dims {
                return Err(Error::DimensionMismatch(
                    "Choi operators have different dimensions".into(),
                ));
            }
            acc = &acc + &j.matrix.scale(Complex64::new(*c, 0.0));
        }
        Self::new(acc, dims)
    }
}

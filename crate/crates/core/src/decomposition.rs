//! Statistical decompositions `L = Σᵢ λᵢ Eᵢ` of hermiticity-preserving maps
//! into quantum instruments, the cost `Σᵢ |λᵢ| p(i)` they incur, the
//! state-independent lower bound on that cost, and the dilation that writes
//! `L(ρ)` as a partial expectation value `Tr_{K'}[VρV† (𝟙 ⊗ Z)]`.

use num_complex::Complex64;

use crate::choi::ChoiOperator;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Dims, HERMITIAN_TOL, ZERO};
use crate::states::validate_state;

/// Tolerance for the CP and TP checks on instruments and dilations.
pub const INSTRUMENT_TOL: f64 = 1e-9;

/// One branch of an instrument: CP effect `Eᵢ` with real weight `λᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub lambda: f64,
    pub effect: ChoiOperator,
}

/// Real-weighted instrument whose effects are CP and sum to a TP map.
#[derive(Clone, Debug, PartialEq)]
pub struct StatisticalDecomposition {
    terms: Vec<Term>,
    dims: Dims,
}

impl StatisticalDecomposition {
    /// Validates that every effect is CP and that the effects sum to a TP
    /// map, both within `tol`.
    pub fn new(terms: Vec<Term>, tol: f64) -> Result<Self> {
        let dims = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("a decomposition needs at least one term".into()))?
            .effect
            .dims();
        if terms.iter().any(|t| t.effect.dims() != dims) {
            return Err(Error::DimensionMismatch("effects have different dimensions".into()));
        }
        if terms.iter().any(|t| !t.lambda.is_finite()) {
            return Err(Error::NonFinite);
        }
        for t in &terms {
            if !t.effect.is_completely_positive(tol) {
                let min = t.effect.matrix().hermitian_part().min_eigenvalue().unwrap_or(f64::NAN);
                return Err(Error::NotCompletelyPositive(min));
            }
        }
        Self::with_checked_sum(terms, dims, tol)
    }

    /// Skips the per-effect CP check; callers guarantee each effect is CP.
    fn with_checked_sum(terms: Vec<Term>, dims: Dims, tol: f64) -> Result<Self> {
        let decomp = Self { terms, dims };
        let dev = decomp.instrument().tp_deviation();
        if dev > tol {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(decomp)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.lambda).collect()
    }

    /// The TP map `Σᵢ Eᵢ`.
    pub fn instrument(&self) -> ChoiOperator {
        let parts: Vec<_> = self.terms.iter().map(|t| (1.0, &t.effect)).collect();
        ChoiOperator::linear_combination(&parts).expect("dimensions checked at construction")
    }

    /// `Σᵢ λᵢ Eᵢ`.
    pub fn recombine(&self) -> ChoiOperator {
        let parts: Vec<_> = self.terms.iter().map(|t| (t.lambda, &t.effect)).collect();
        ChoiOperator::linear_combination(&parts).expect("dimensions checked at construction")
    }

    /// Branch probabilities `p(i) = Tr[Eᵢ(ρ)]` (no state validation).
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        let d = self.dims.d_in;
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "instrument input must be {d}x{d}, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(self
            .terms
            .iter()
            .map(|t| {
                // Tr[E(ρ)] = Σ_{a,b} (Tr_K J)[a,b] ρ[a,b]
                let reduced = t.effect.output_trace();
                let mut p = ZERO;
                for a in 0..d {
                    for b in 0..d {
                        p += reduced.get(a, b) * rho.get(a, b);
                    }
                }
                p.re
            })
            .collect())
    }
}

/// Free-function form of [`StatisticalDecomposition::recombine`].
pub fn recombine(decomp: &StatisticalDecomposition) -> ChoiOperator {
    decomp.recombine()
}

/// Eigen-decomposes `J = Σ μᵢ |vᵢ⟩⟨vᵢ|` and returns `λᵢ = d_K μᵢ` with
/// effects `|vᵢ⟩⟨vᵢ| / d_K`. Zero eigenvalues are kept (with `λ = 0`) so the
/// effects always sum to `𝟙/d_K`, a TP map.
pub fn statistical_decompose(j: &ChoiOperator) -> Result<StatisticalDecomposition> {
    if !j.is_hermiticity_preserving(HERMITIAN_TOL) {
        return Err(Error::NotHermitian(j.matrix().hermiticity_defect()));
    }
    let dims = j.dims();
    let d_out = dims.d_out as f64;
    let eig = j.matrix().hermitian_part().eigh()?;
    let terms = eig
        .values
        .iter()
        .enumerate()
        .map(|(k, &mu)| {
            Ok(Term {
                lambda: d_out * mu,
                effect: ChoiOperator::new(eig.projector(k).scale_real(1.0 / d_out), dims)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // rank-one projectors are CP by construction
    StatisticalDecomposition::with_checked_sum(terms, dims, INSTRUMENT_TOL)
}

/// `min_σ Tr[|J| (𝟙_K ⊗ σ)]`, evaluated as the smallest eigenvalue of
/// `Tr_K |J|`.
pub fn error_lower_bound(j: &ChoiOperator) -> Result<f64> {
    if !j.is_hermiticity_preserving(HERMITIAN_TOL) {
        return Err(Error::NotHermitian(j.matrix().hermiticity_defect()));
    }
    let dims = j.dims();
    let abs = j.matrix().hermitian_part().abs()?;
    let reduced = abs.partial_trace(&[dims.d_out, dims.d_in], &[1])?;
    Ok(reduced.min_eigenvalue()?.max(0.0))
}

/// Cost of a decomposition on a given state against the universal bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    /// `Σᵢ |λᵢ| p(i)`.
    pub cost: f64,
    /// [`error_lower_bound`] of the recombined map.
    pub bound: f64,
    pub probabilities: Vec<f64>,
}

pub fn decomposition_cost(
    decomp: &StatisticalDecomposition,
    rho: &ComplexMatrix,
) -> Result<CostReport> {
    validate_state(rho, decomp.dims().d_in)?;
    let probabilities = decomp.probabilities(rho)?;
    let cost = decomp
        .terms()
        .iter()
        .zip(&probabilities)
        .map(|(t, p)| t.lambda.abs() * p)
        .sum();
    let bound = error_lower_bound(&decomp.recombine())?;
    Ok(CostReport {
        cost,
        bound,
        probabilities,
    })
}

/// Isometry `V: H → K ⊗ K'` and ancilla observable `Z` on `K'` with
/// `L(ρ) = Tr_{K'}[VρV† (𝟙 ⊗ Z)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dilation {
    isometry: ComplexMatrix,
    ancilla_observable: ComplexMatrix,
    dims: Dims,
    ancilla_dim: usize,
}

impl Dilation {
    pub fn isometry(&self) -> &ComplexMatrix {
        &self.isometry
    }

    pub fn ancilla_observable(&self) -> &ComplexMatrix {
        &self.ancilla_observable
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    /// `‖V†V − 𝟙‖_F`.
    pub fn isometry_defect(&self) -> f64 {
        (&self.isometry.adjoint() * &self.isometry).distance(&ComplexMatrix::identity(self.dims.d_in))
    }

    /// `Tr[VρV† (A ⊗ Z)]`.
    pub fn expectation(&self, rho: &ComplexMatrix, a: &ComplexMatrix) -> Result<Complex64> {
        let d_out = self.dims.d_out;
        if a.shape() != (d_out, d_out) {
            return Err(Error::DimensionMismatch(format!(
                "observable must be {d_out}x{d_out}, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let out = self.dilated_state(rho)?;
        Ok(out.trace_product(&a.kron(&self.ancilla_observable)))
    }

    fn dilated_state(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dims.d_in;
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "input must be {d}x{d}, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(&(&self.isometry * rho) * &self.isometry.adjoint())
    }
}

/// Stacks the Kraus operators of every effect into one isometry,
/// `V|ψ⟩ = Σ_{i,α} K_{i,α}|ψ⟩ ⊗ |i,α⟩`, with `Z = Σ_{i,α} λᵢ |i,α⟩⟨i,α|`.
pub fn stinespring_dilation(decomp: &StatisticalDecomposition) -> Result<Dilation> {
    let dims = decomp.dims();
    let mut kraus = Vec::new();
    let mut weights = Vec::new();
    for t in decomp.terms() {
        for k in t.effect.kraus_operators(INSTRUMENT_TOL)? {
            kraus.push(k);
            weights.push(t.lambda);
        }
    }
    let anc = kraus.len();
    if anc == 0 {
        return Err(Error::NotTracePreserving(dims.d_in as f64));
    }
    let (din, dout) = (dims.d_in, dims.d_out);
    let isometry = ComplexMatrix::from_fn(dout * anc, din, |row, h| kraus[row % anc].get(row / anc, h));
    let dil = Dilation {
        isometry,
        ancilla_observable: ComplexMatrix::from_real_diagonal(&weights),
        dims,
        ancilla_dim: anc,
    };
    let defect = dil.isometry_defect();
    if defect > INSTRUMENT_TOL {
        return Err(Error::NotTracePreserving(defect));
    }
    Ok(dil)
}

/// `Tr_{K'}[VρV† (𝟙_K ⊗ Z)]`.
pub fn partial_expectation(dil: &Dilation, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let out = dil.dilated_state(rho)?;
    let weighted = &out * &ComplexMatrix::identity(dil.dims.d_out).kron(&dil.ancilla_observable);
    weighted.partial_trace(&[dil.dims.d_out, dil.ancilla_dim], &[0])
}

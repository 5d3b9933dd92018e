//! The ideal two-point correlator `T(ρ) = S(𝟙 ⊗ ρ)`, which satisfies
//! `Tr[T(ρ)(A ⊗ B)] = Tr[A ρ B]`, split as `T = R − iI` into
//! hermiticity-preserving parts
//!
//! ```text
//! R(ρ) = [(𝟙⊗ρ)S + S(𝟙⊗ρ)] / 2        (anticommutator, trace one)
//! I(ρ) = [(𝟙⊗ρ)S − S(𝟙⊗ρ)] / (2i)     (commutator, traceless)
//! ```
//!
//! and the physical maps used to decompose them:
//!
//! ```text
//! R±(ρ) = 2/(d±1)       P±(𝟙⊗ρ)P±      (symmetric / antisymmetric cloners)
//! I±(ρ) = 2d/(d²−1)     Q±(𝟙⊗ρ)Q∓
//! R = (d+1)/2 R₊ − (d−1)/2 R₋,    I = √(d²−1)/2 (I₊ − I₋)
//! ```
//!
//! Output subsystems are ordered (first copy, second copy); Choi operators
//! live on (first copy, second copy, input).

use num_complex::Complex64;

use crate::choi::ChoiOperator;
use crate::decomposition::{StatisticalDecomposition, Term, INSTRUMENT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Dims, Sign, ZERO};
use crate::operators::{
    maximally_entangled_projector, q_operator, sector_projector, swap_operator, swap_phase,
};

/// Which member of the correlator family a Choi operator belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapKind {
    Ideal,
    Real,
    Imag,
    Cloner(Sign),
    RootSwap(Sign),
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Ideal => "T",
            MapKind::Real => "R",
            MapKind::Imag => "I",
            MapKind::Cloner(Sign::Plus) => "R_plus",
            MapKind::Cloner(Sign::Minus) => "R_minus",
            MapKind::RootSwap(Sign::Plus) => "I_plus",
            MapKind::RootSwap(Sign::Minus) => "I_minus",
        }
    }

    pub const ALL: [MapKind; 7] = [
        MapKind::Ideal,
        MapKind::Real,
        MapKind::Imag,
        MapKind::Cloner(Sign::Plus),
        MapKind::Cloner(Sign::Minus),
        MapKind::RootSwap(Sign::Plus),
        MapKind::RootSwap(Sign::Minus),
    ];
}

/// Choi operator of `ρ ↦ c · L (𝟙⊗ρ) R`, i.e. `c·d (L⊗𝟙)(𝟙⊗Φ⁺)(R⊗𝟙)`.
///
/// `(𝟙⊗Φ⁺)` only couples the second output copy to the input, so the triple
/// product reduces to `J[(a,i),(b,j)] = c Σ_p L[a,(p,i)] R[(p,j),b]`.
fn sandwich_choi(left: &ComplexMatrix, right: &ComplexMatrix, d: usize, c: Complex64) -> ChoiOperator {
    let side = d * d * d;
    let l = left.as_inner();
    let r = right.as_inner();
    let m = ComplexMatrix::from_fn(side, side, |row, col| {
        let (a, i) = (row / d, row % d);
        let (b, j) = (col / d, col % d);
        let mut acc = ZERO;
        for p in 0..d {
            acc += l[(a, p * d + i)] * r[(p * d + j, b)];
        }
        acc * c
    });
    ChoiOperator::new(m, Dims { d_in: d, d_out: d * d }).expect("side is d^3")
}

/// The correlator maps for one system dimension `d ≥ 2`, with the fixed
/// operators and Choi operators computed once at construction.
#[derive(Clone, Debug)]
pub struct CorrelatorFamily {
    d: usize,
    phase: Complex64,
    swap: ComplexMatrix,
    p_plus: ComplexMatrix,
    p_minus: ComplexMatrix,
    q_plus: ComplexMatrix,
    q_minus: ComplexMatrix,
    phi: ComplexMatrix,
    j_real: ChoiOperator,
    j_imag: ChoiOperator,
    j_cloner_plus: ChoiOperator,
    j_cloner_minus: ChoiOperator,
    j_rootswap_plus: ChoiOperator,
    j_rootswap_minus: ChoiOperator,
}

impl CorrelatorFamily {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(format!(
                "the correlator family needs d >= 2 (antisymmetric sector and Q± are empty or undefined at d={d})"
            )));
        }
        let df = d as f64;
        let phase = swap_phase(d)?;
        let swap = swap_operator(d);
        let id = ComplexMatrix::identity(d * d);
        let p_plus = sector_projector(d, Sign::Plus);
        let p_minus = sector_projector(d, Sign::Minus);
        let q_plus = q_operator(d, Sign::Plus)?;
        let q_minus = q_operator(d, Sign::Minus)?;

        let half = Complex64::new(0.5, 0.0);
        let left = sandwich_choi(&id, &swap, d, half);
        let right = sandwich_choi(&swap, &id, d, half);
        let j_real = ChoiOperator::linear_combination(&[(1.0, &left), (1.0, &right)])?;
        // [X − Y]/(2i) with X, Y already carrying the factor 1/2
        let j_imag = {
            let x = left.matrix().scale(Complex64::new(0.0, -1.0));
            let y = right.matrix().scale(Complex64::new(0.0, 1.0));
            ChoiOperator::new(&x + &y, left.dims())?
        };

        let cloner = |p: &ComplexMatrix, s: f64| {
            sandwich_choi(p, p, d, Complex64::new(2.0 / (df + s), 0.0))
        };
        let rootswap_coeff = Complex64::new(2.0 * df / (df * df - 1.0), 0.0);
        Ok(Self {
            d,
            phase,
            j_cloner_plus: cloner(&p_plus, 1.0),
            j_cloner_minus: cloner(&p_minus, -1.0),
            j_rootswap_plus: sandwich_choi(&q_plus, &q_minus, d, rootswap_coeff),
            j_rootswap_minus: sandwich_choi(&q_minus, &q_plus, d, rootswap_coeff),
            j_real,
            j_imag,
            phi: maximally_entangled_projector(d),
            swap,
            p_plus,
            p_minus,
            q_plus,
            q_minus,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `z = (−1 + i√(d²−1))/d`.
    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn swap(&self) -> &ComplexMatrix {
        &self.swap
    }

    pub fn sector_projector(&self, sign: Sign) -> &ComplexMatrix {
        match sign {
            Sign::Plus => &self.p_plus,
            Sign::Minus => &self.p_minus,
        }
    }

    pub fn q_operator(&self, sign: Sign) -> &ComplexMatrix {
        match sign {
            Sign::Plus => &self.q_plus,
            Sign::Minus => &self.q_minus,
        }
    }

    pub fn entangled_projector(&self) -> &ComplexMatrix {
        &self.phi
    }

    pub fn dims(&self) -> Dims {
        Dims {
            d_in: self.d,
            d_out: self.d * self.d,
        }
    }

    pub fn choi_real(&self) -> &ChoiOperator {
        &self.j_real
    }

    pub fn choi_imag(&self) -> &ChoiOperator {
        &self.j_imag
    }

    pub fn choi_cloner(&self, sign: Sign) -> &ChoiOperator {
        match sign {
            Sign::Plus => &self.j_cloner_plus,
            Sign::Minus => &self.j_cloner_minus,
        }
    }

    pub fn choi_rootswap(&self, sign: Sign) -> &ChoiOperator {
        match sign {
            Sign::Plus => &self.j_rootswap_plus,
            Sign::Minus => &self.j_rootswap_minus,
        }
    }

    /// `J(T) = d (S⊗𝟙)(𝟙⊗Φ⁺)`. Not cached: it is only needed to show that
    /// `T` itself is unphysical.
    pub fn choi_ideal(&self) -> ChoiOperator {
        let id = ComplexMatrix::identity(self.d * self.d);
        sandwich_choi(&self.swap, &id, self.d, Complex64::new(1.0, 0.0))
    }

    pub fn choi(&self, kind: MapKind) -> ChoiOperator {
        match kind {
            MapKind::Ideal => self.choi_ideal(),
            MapKind::Real => self.j_real.clone(),
            MapKind::Imag => self.j_imag.clone(),
            MapKind::Cloner(s) => self.choi_cloner(s).clone(),
            MapKind::RootSwap(s) => self.choi_rootswap(s).clone(),
        }
    }

    fn lift(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.d;
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "input must be {d}x{d}, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(ComplexMatrix::identity(d).kron(rho))
    }

    /// `T(ρ) = S(𝟙⊗ρ)`.
    pub fn ideal_apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(&self.swap * &self.lift(rho)?)
    }

    /// `R(ρ) = [(𝟙⊗ρ)S + S(𝟙⊗ρ)]/2`.
    pub fn real_apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let lifted = self.lift(rho)?;
        Ok((&(&lifted * &self.swap) + &(&self.swap * &lifted)).scale_real(0.5))
    }

    /// `I(ρ) = [(𝟙⊗ρ)S − S(𝟙⊗ρ)]/(2i)`.
    pub fn imag_apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let lifted = self.lift(rho)?;
        Ok((&(&lifted * &self.swap) - &(&self.swap * &lifted)).scale(Complex64::new(0.0, -0.5)))
    }

    /// `R±(ρ) = 2/(d±1) P±(𝟙⊗ρ)P±`.
    pub fn cloner_apply(&self, sign: Sign, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let p = self.sector_projector(sign);
        let c = 2.0 / (self.d as f64 + sign.value());
        Ok((&(p * &self.lift(rho)?) * p).scale_real(c))
    }

    /// `I±(ρ) = 2d/(d²−1) Q±(𝟙⊗ρ)Q∓`.
    pub fn rootswap_apply(&self, sign: Sign, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let df = self.d as f64;
        let c = 2.0 * df / (df * df - 1.0);
        let q = self.q_operator(sign);
        let q_adj = self.q_operator(sign.flip());
        Ok((&(q * &self.lift(rho)?) * q_adj).scale_real(c))
    }

    pub fn apply(&self, kind: MapKind, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        match kind {
            MapKind::Ideal => self.ideal_apply(rho),
            MapKind::Real => self.real_apply(rho),
            MapKind::Imag => self.imag_apply(rho),
            MapKind::Cloner(s) => self.cloner_apply(s, rho),
            MapKind::RootSwap(s) => self.rootswap_apply(s, rho),
        }
    }

    /// Instrument `{R₊/2, R₋/2}` with weights `λ± = ±(d±1)`.
    pub fn universal_real_decomposition(&self) -> Result<StatisticalDecomposition> {
        let df = self.d as f64;
        StatisticalDecomposition::new(
            vec![
                Term {
                    lambda: df + 1.0,
                    effect: self.j_cloner_plus.scale(0.5),
                },
                Term {
                    lambda: -(df - 1.0),
                    effect: self.j_cloner_minus.scale(0.5),
                },
            ],
            INSTRUMENT_TOL,
        )
    }

    /// Instrument `{I₊/2, I₋/2}` with weights `±√(d²−1)`.
    pub fn universal_imag_decomposition(&self) -> Result<StatisticalDecomposition> {
        let df = self.d as f64;
        let lambda = (df * df - 1.0).sqrt();
        StatisticalDecomposition::new(
            vec![
                Term {
                    lambda,
                    effect: self.j_rootswap_plus.scale(0.5),
                },
                Term {
                    lambda: -lambda,
                    effect: self.j_rootswap_minus.scale(0.5),
                },
            ],
            INSTRUMENT_TOL,
        )
    }
}

/// Free-function form of [`CorrelatorFamily::universal_real_decomposition`].
pub fn universal_real_decomposition(d: usize) -> Result<StatisticalDecomposition> {
    CorrelatorFamily::new(d)?.universal_real_decomposition()
}

/// Free-function form of [`CorrelatorFamily::universal_imag_decomposition`].
pub fn universal_imag_decomposition(d: usize) -> Result<StatisticalDecomposition> {
    CorrelatorFamily::new(d)?.universal_imag_decomposition()
}

/// `Tr[A ρ B]`, computed directly.
pub fn two_point_exact(
    rho: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<Complex64> {
    let d = rho.rows();
    for (name, m) in [("rho", rho), ("A", a), ("B", b)] {
        if m.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "{name} must be {d}x{d}, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
    }
    Ok((a * rho).trace_product(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::states::{random_density_matrix, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket0() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, 0.0])
    }

    #[test]
    fn rejects_d_one() {
        assert!(matches!(CorrelatorFamily::new(1), Err(Error::InvalidDimension(_))));
        assert!(CorrelatorFamily::new(0).is_err());
    }

    #[test]
    fn ideal_on_maximally_mixed() {
        for d in 2..=4 {
            let fam = CorrelatorFamily::new(d).unwrap();
            let rho = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
            let out = fam.ideal_apply(&rho).unwrap();
            assert!(out.distance(&fam.swap().scale_real(1.0 / d as f64)) < 1e-14);
        }
    }

    #[test]
    fn qubit_x_y_correlator() {
        let fam = CorrelatorFamily::new(2).unwrap();
        let (x, y) = (pauli::x(), pauli::y());
        let minus_i = Complex64::new(0.0, -1.0);
        let t = fam.ideal_apply(&ket0()).unwrap().trace_product(&x.kron(&y));
        assert!((t - minus_i).norm() < 1e-14);
        let r = fam.real_apply(&ket0()).unwrap().trace_product(&x.kron(&y));
        assert!(r.norm() < 1e-14);
        let i = fam.imag_apply(&ket0()).unwrap().trace_product(&x.kron(&y));
        assert!((i - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((two_point_exact(&ket0(), &x, &y).unwrap() - minus_i).norm() < 1e-15);
    }

    #[test]
    fn exact_value_simple_cases() {
        let id = ComplexMatrix::identity(2);
        let mixed = id.scale_real(0.5);
        assert!((two_point_exact(&mixed, &id, &id).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(two_point_exact(&mixed, &pauli::x(), &pauli::y()).unwrap().norm() < 1e-15);
        assert!(two_point_exact(&mixed, &ComplexMatrix::identity(3), &id).is_err());
    }

    #[test]
    fn traces_of_real_and_imag_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in 2..=5 {
            let fam = CorrelatorFamily::new(d).unwrap();
            let rho = random_density_matrix(d, &mut rng);
            let r = fam.real_apply(&rho).unwrap();
            let i = fam.imag_apply(&rho).unwrap();
            assert!((r.trace().re - 1.0).abs() < 1e-12 && r.trace().im.abs() < 1e-12);
            assert!(i.trace().norm() < 1e-12);
            assert!(r.is_hermitian(1e-12) && i.is_hermitian(1e-12));
            let t = fam.ideal_apply(&rho).unwrap();
            let recomposed = &r - &i.scale(Complex64::new(0.0, 1.0));
            assert!(t.distance(&recomposed) < 1e-12);
        }
    }

    #[test]
    fn anticommuting_paulis_have_zero_real_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let fam = CorrelatorFamily::new(2).unwrap();
        let xy = pauli::x().kron(&pauli::y());
        for _ in 0..10 {
            let rho = random_density_matrix(2, &mut rng);
            assert!(fam.real_apply(&rho).unwrap().trace_product(&xy).norm() < 1e-13);
        }
    }

    #[test]
    fn cloner_outputs_are_states_on_their_sector() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for d in 2..=5 {
            let fam = CorrelatorFamily::new(d).unwrap();
            let rho = random_density_matrix(d, &mut rng);
            for sign in [Sign::Plus, Sign::Minus] {
                let out = fam.cloner_apply(sign, &rho).unwrap();
                assert!((out.trace().re - 1.0).abs() < 1e-12);
                assert!(out.min_eigenvalue().unwrap() > -1e-12);
                let other = fam.sector_projector(sign.flip());
                assert!((&(other * &out) * other).frobenius_norm() < 1e-13);
            }
        }
    }

    #[test]
    fn symmetric_clone_marginal() {
        // P⁺(𝟙⊗ρ)P⁺ = ¼(𝟙⊗ρ + ρ⊗𝟙 + S(𝟙⊗ρ) + (𝟙⊗ρ)S) for a qubit.
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let fam = CorrelatorFamily::new(2).unwrap();
        let rho = random_density_matrix(2, &mut rng);
        let out = fam.cloner_apply(Sign::Plus, &rho).unwrap();
        let marginal = out.partial_trace(&[2, 2], &[1]).unwrap();
        // Tr₁ of each piece: 2ρ, 𝟙, ρ, ρ  →  (4ρ + 𝟙)/4 · 2/3
        let expected = (&rho.scale_real(4.0) + &ComplexMatrix::identity(2)).scale_real(2.0 / 12.0);
        assert!(marginal.distance(&expected) < 1e-13);
    }

    #[test]
    fn rootswap_outputs_are_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for d in 2..=5 {
            let fam = CorrelatorFamily::new(d).unwrap();
            let rho = random_density_matrix(d, &mut rng);
            let plus = fam.rootswap_apply(Sign::Plus, &rho).unwrap();
            let minus = fam.rootswap_apply(Sign::Minus, &rho).unwrap();
            for out in [&plus, &minus] {
                assert!((out.trace().re - 1.0).abs() < 1e-12);
                assert!(out.min_eigenvalue().unwrap() > -1e-10);
            }
            let lambda = ((d * d - 1) as f64).sqrt() / 2.0;
            let combo = (&plus - &minus).scale_real(lambda);
            assert!(combo.distance(&fam.imag_apply(&rho).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn choi_builders_match_basis_expansion() {
        for d in 2..=3 {
            let fam = CorrelatorFamily::new(d).unwrap();
            for kind in MapKind::ALL {
                let direct = ChoiOperator::from_action(fam.dims(), |m| fam.apply(kind, m).unwrap()).unwrap();
                assert!(
                    fam.choi(kind).matrix().distance(direct.matrix()) < 1e-10,
                    "{} at d={d}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn choi_builders_match_dense_triple_product() {
        // d (X⊗𝟙)(𝟙⊗Φ⁺)(Y⊗𝟙) with every factor materialized.
        let d = 2;
        let fam = CorrelatorFamily::new(d).unwrap();
        let id = ComplexMatrix::identity(d);
        let mid = id.kron(fam.entangled_projector());
        let triple = |x: &ComplexMatrix, y: &ComplexMatrix, c: f64| {
            (&(&x.kron(&id) * &mid) * &y.kron(&id)).scale_real(c * d as f64)
        };
        let p = fam.sector_projector(Sign::Plus);
        let expected = triple(p, p, 2.0 / 3.0);
        assert!(fam.choi_cloner(Sign::Plus).matrix().distance(&expected) < 1e-13);
        let (qp, qm) = (fam.q_operator(Sign::Plus), fam.q_operator(Sign::Minus));
        let expected = triple(qm, qp, 4.0 / 3.0);
        assert!(fam.choi_rootswap(Sign::Minus).matrix().distance(&expected) < 1e-13);
        let id4 = ComplexMatrix::identity(4);
        let s = fam.swap();
        let expected = &triple(&id4, s, 0.5) + &triple(s, &id4, 0.5);
        assert!(fam.choi_real().matrix().distance(&expected) < 1e-13);
    }

    #[test]
    fn real_minus_i_imag_is_ideal_choi() {
        let fam = CorrelatorFamily::new(2).unwrap();
        let combo = fam.choi_real().matrix() - &fam.choi_imag().matrix().scale(Complex64::i());
        assert!(combo.distance(fam.choi_ideal().matrix()) < 1e-13);
    }

    #[test]
    fn universal_decompositions_recombine() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for d in 2..=4 {
            let fam = CorrelatorFamily::new(d).unwrap();
            let re = fam.universal_real_decomposition().unwrap();
            let im = fam.universal_imag_decomposition().unwrap();
            assert!(re.recombine().matrix().distance(fam.choi_real().matrix()) < 1e-10);
            assert!(im.recombine().matrix().distance(fam.choi_imag().matrix()) < 1e-10);
            let rho = random_density_matrix(d, &mut rng);
            for dec in [&re, &im] {
                let p = dec.probabilities(&rho).unwrap();
                assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
            }
        }
        let fam = CorrelatorFamily::new(2).unwrap();
        assert_eq!(fam.universal_real_decomposition().unwrap().lambdas(), vec![3.0, -1.0]);
        let s3 = 3f64.sqrt();
        assert_eq!(fam.universal_imag_decomposition().unwrap().lambdas(), vec![s3, -s3]);
    }

    #[test]
    fn correlator_identity_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for d in 2..=5 {
            let fam = CorrelatorFamily::new(d).unwrap();
            for _ in 0..20 {
                let rho = random_density_matrix(d, &mut rng);
                let a = random_hermitian(d, &mut rng);
                let b = random_hermitian(d, &mut rng);
                let lhs = fam.ideal_apply(&rho).unwrap().trace_product(&a.kron(&b));
                let rhs = two_point_exact(&rho, &a, &b).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }
}

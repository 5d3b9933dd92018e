//! Property tests over randomly generated matrices, maps and states. Inputs
//! are drawn from a seeded generator so that failures shrink to a seed.

use proptest::prelude::*;
use qcorr::choi::ChoiOperator;
use qcorr::correlator::{two_point_exact, CorrelatorFamily};
use qcorr::decomposition::{
    decomposition_cost, error_lower_bound, partial_expectation, statistical_decompose,
    stinespring_dilation,
};
use qcorr::operators::{sector_projector, swap_operator, swap_phase};
use qcorr::photonics::{beamsplitter_action, FockState};
use qcorr::sampler::estimate_two_point;
use qcorr::states::{
    random_density_matrix, random_hermitian, random_hp_choi, random_matrix, random_rect_matrix,
};
use qcorr::{Complex64, ComplexMatrix, Dims, Sign};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let a = random_matrix(da, &mut r);
        let b = random_matrix(db, &mut r);
        let ab = a.kron(&b);
        let left = ab.partial_trace(&[da, db], &[0]).unwrap();
        prop_assert!(left.distance(&a.scale(b.trace())) < 1e-12);
        let right = ab.partial_trace(&[da, db], &[1]).unwrap();
        prop_assert!(right.distance(&b.scale(a.trace())) < 1e-12);
    }

    #[test]
    fn kron_is_bilinear_and_multiplicative(seed in any::<u64>(), d in 1usize..4) {
        let mut r = rng(seed);
        let (a, b, c, e) = (
            random_matrix(d, &mut r),
            random_matrix(d, &mut r),
            random_matrix(d, &mut r),
            random_matrix(d, &mut r),
        );
        let lhs = &a.kron(&b) * &c.kron(&e);
        prop_assert!(lhs.distance(&(&a * &c).kron(&(&b * &e))) < 1e-10);
        prop_assert!((&a + &c).kron(&b).distance(&(&a.kron(&b) + &c.kron(&b))) < 1e-12);
    }

    #[test]
    fn absolute_value_dominates(seed in any::<u64>(), d in 1usize..6) {
        let m = random_hermitian(d, &mut rng(seed));
        let abs = m.abs().unwrap();
        prop_assert!((&abs - &m).min_eigenvalue().unwrap() > -1e-10);
        prop_assert!((&abs + &m).min_eigenvalue().unwrap() > -1e-10);
    }

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), d in 1usize..7) {
        let m = random_hermitian(d, &mut rng(seed));
        let e = m.eigh().unwrap();
        prop_assert!(e.reconstruct().distance(&m) < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = &e.vectors.adjoint() * &e.vectors;
        prop_assert!(gram.distance(&ComplexMatrix::identity(d)) < 1e-10);
    }

    #[test]
    fn fixed_operator_algebra(d in 2usize..8) {
        let s = swap_operator(d);
        prop_assert_eq!(&s * &s, ComplexMatrix::identity(d * d));
        prop_assert_eq!(s.adjoint(), s);
        for sign in [Sign::Plus, Sign::Minus] {
            let p = sector_projector(d, sign);
            prop_assert!((&p * &p).distance(&p) < 1e-12);
            prop_assert!(p.adjoint().distance(&p) < 1e-12);
        }
        let sum = &sector_projector(d, Sign::Plus) + &sector_projector(d, Sign::Minus);
        prop_assert!(sum.distance(&ComplexMatrix::identity(d * d)) < 1e-12);
        prop_assert!((swap_phase(d).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn choi_round_trip(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4) {
        let dims = Dims::new(din, dout).unwrap();
        let j = ChoiOperator::new(random_hp_choi(dims, &mut rng(seed)), dims).unwrap();
        let back = ChoiOperator::from_action(dims, |m| j.apply(m).unwrap()).unwrap();
        prop_assert!(back.matrix().distance(j.matrix()) < 1e-10);
    }

    #[test]
    fn choi_is_linear(seed in any::<u64>(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let mut r = rng(seed);
        let dims = Dims::new(2, 3).unwrap();
        let (k1, k2) = (random_rect_matrix(3, 2, &mut r), random_rect_matrix(3, 2, &mut r));
        let l1 = |m: &ComplexMatrix| &(&k1 * m) * &k1.adjoint();
        let l2 = |m: &ComplexMatrix| &(&k2 * m) * &k2.adjoint();
        let j1 = ChoiOperator::from_action(dims, l1).unwrap();
        let j2 = ChoiOperator::from_action(dims, l2).unwrap();
        let sum = ChoiOperator::from_action(dims, |m| &l1(m).scale_real(x) + &l2(m).scale_real(y)).unwrap();
        let combo = ChoiOperator::linear_combination(&[(x, &j1), (y, &j2)]).unwrap();
        prop_assert!(sum.matrix().distance(combo.matrix()) < 1e-10);
    }

    #[test]
    fn normalized_kraus_channels(seed in any::<u64>(), d in 2usize..4, n_kraus in 2usize..5) {
        let mut r = rng(seed);
        let raw: Vec<ComplexMatrix> = (0..n_kraus).map(|_| random_matrix(d, &mut r)).collect();
        let mut s = ComplexMatrix::zeros(d, d);
        for k in &raw {
            s = &s + &(&k.adjoint() * k);
        }
        let s_inv_sqrt = s.eigh().unwrap().map_spectrum(|x| 1.0 / x.sqrt());
        let kraus: Vec<ComplexMatrix> = raw.iter().map(|k| k * &s_inv_sqrt).collect();
        let j = ChoiOperator::from_kraus(&kraus).unwrap();
        prop_assert!(j.is_completely_positive(1e-10));
        prop_assert!(j.is_trace_preserving(1e-10));
        let extracted = j.kraus_operators(1e-10).unwrap();
        let rho = random_density_matrix(d, &mut r);
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &extracted {
            out = &out + &(&(k * &rho) * &k.adjoint());
        }
        prop_assert!(out.distance(&j.apply(&rho).unwrap()) < 1e-10);
    }

    #[test]
    fn statistical_decomposition_invariants(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4) {
        let mut r = rng(seed);
        let dims = Dims::new(din, dout).unwrap();
        let j = ChoiOperator::new(random_hp_choi(dims, &mut r), dims).unwrap();
        let dec = statistical_decompose(&j).unwrap();
        for t in dec.terms() {
            prop_assert!(t.effect.matrix().min_eigenvalue().unwrap() >= -1e-10);
        }
        prop_assert!(dec.instrument().tp_deviation() <= 1e-10);
        prop_assert!(dec.recombine().matrix().distance(j.matrix()) <= 1e-10);
        let bound = error_lower_bound(&j).unwrap();
        for _ in 0..5 {
            let rho = random_density_matrix(din, &mut r);
            prop_assert!(decomposition_cost(&dec, &rho).unwrap().cost >= bound - 1e-9);
        }
    }

    #[test]
    fn dilation_is_isometric(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4) {
        let mut r = rng(seed);
        let dims = Dims::new(din, dout).unwrap();
        let j = ChoiOperator::new(random_hp_choi(dims, &mut r), dims).unwrap();
        let dil = stinespring_dilation(&statistical_decompose(&j).unwrap()).unwrap();
        prop_assert!(dil.isometry_defect() <= 1e-10);
        let rho = random_density_matrix(din, &mut r);
        prop_assert!(partial_expectation(&dil, &rho).unwrap().distance(&j.apply(&rho).unwrap()) < 1e-10);
    }

    #[test]
    fn correlator_identity(seed in any::<u64>(), d in 2usize..6) {
        let mut r = rng(seed);
        let fam = CorrelatorFamily::new(d).unwrap();
        let rho = random_density_matrix(d, &mut r);
        let a = random_hermitian(d, &mut r);
        let b = random_hermitian(d, &mut r);
        let lhs = fam.ideal_apply(&rho).unwrap().trace_product(&a.kron(&b));
        prop_assert!((lhs - two_point_exact(&rho, &a, &b).unwrap()).norm() <= 1e-10);
        let t = fam.ideal_apply(&rho).unwrap();
        let split = &fam.real_apply(&rho).unwrap() - &fam.imag_apply(&rho).unwrap().scale(Complex64::i());
        prop_assert!(t.distance(&split) <= 1e-10);
    }

    #[test]
    fn beamsplitter_preserves_norm(seed in any::<u64>(), t in 0.0f64..=1.0, p in 0usize..4, q in 0usize..4) {
        prop_assume!(p != q);
        let mut r = rng(seed);
        let mut s = FockState::empty(8);
        let amps = random_rect_matrix(1, 4, &mut r).to_row_major();
        for (modes, a) in [[0, 2, 4], [1, 1, 7], [3, 5, 6], [0, 0, 0]].iter().zip(amps) {
            s.add_term(modes, a).unwrap();
        }
        let out = beamsplitter_action(&s, (p, q), t).unwrap();
        prop_assert!((out.norm_sqr() - s.norm_sqr()).abs() <= 1e-12 * s.norm_sqr().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn estimation_is_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density_matrix(2, &mut r);
        let a = random_hermitian(2, &mut r);
        let b = random_hermitian(2, &mut r);
        let first = estimate_two_point(&rho, &a, &b, 1_000, seed).unwrap();
        let second = estimate_two_point(&rho, &a, &b, 1_000, seed).unwrap();
        prop_assert_eq!(first, second);
    }
}

//! Invariant suite for one dimension `d`: decomposition identities, bound
//! values and saturation, orthogonality, CP/TP flags, and the correlator
//! identity on random triples.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::choi::ChoiOperator;
use crate::correlator::{two_point_exact, CorrelatorFamily, MapKind};
use crate::decomposition::error_lower_bound;
use crate::error::Result;
use crate::linalg::{Sign, HERMITIAN_TOL};
use crate::states::{random_density_matrix, random_hermitian};

pub const MAX_VERIFY_DIM: usize = 16;

/// Outcome of one check: `passed` iff `residual ≤ tolerance`, except for
/// checks that expect a predicate to fail, which pass iff it does.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    fn within(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual <= tolerance,
            residual,
            tolerance,
        }
    }

    /// `residual` is the quantity that must exceed `tolerance`.
    fn beyond(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual > tolerance,
            residual,
            tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Replaces every per-check tolerance when set.
    pub tol: Option<f64>,
    pub random_states: usize,
    pub random_triples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0x2A,
            tol: None,
            random_states: 5,
            random_triples: 20,
        }
    }
}

/// Runs every check for dimension `d` on an already built family.
pub fn run_checks(fam: &CorrelatorFamily, config: &VerifyConfig) -> Result<Vec<Check>> {
    let d = fam.d();
    let df = d as f64;
    let tol = |default: f64| config.tol.unwrap_or(default);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = Vec::new();

    let (rp, rm) = (fam.choi_cloner(Sign::Plus), fam.choi_cloner(Sign::Minus));
    let (ip, im) = (fam.choi_rootswap(Sign::Plus), fam.choi_rootswap(Sign::Minus));
    let root = (df * df - 1.0).sqrt();

    let combo = ChoiOperator::linear_combination(&[((df + 1.0) / 2.0, rp), (-(df - 1.0) / 2.0, rm)])?;
    checks.push(Check::within(
        "real_decomposition_identity",
        combo.matrix().distance(fam.choi_real().matrix()),
        tol(1e-10),
    ));
    let combo = ChoiOperator::linear_combination(&[(root / 2.0, ip), (-root / 2.0, im)])?;
    checks.push(Check::within(
        "imag_decomposition_identity",
        combo.matrix().distance(fam.choi_imag().matrix()),
        tol(1e-10),
    ));

    let real_bound = error_lower_bound(fam.choi_real())?;
    let imag_bound = error_lower_bound(fam.choi_imag())?;
    checks.push(Check::within("real_bound_equals_d", (real_bound - df).abs(), tol(1e-9)));
    checks.push(Check::within(
        "imag_bound_equals_sqrt_d2_minus_1",
        (imag_bound - root).abs(),
        tol(1e-9),
    ));

    // the decompositions recombine to J(R) and J(I) (checked above), so the
    // bounds just computed are the ones their costs must meet
    let decomps = [
        ("real", fam.universal_real_decomposition()?, real_bound),
        ("imag", fam.universal_imag_decomposition()?, imag_bound),
    ];
    for (label, dec, bound) in &decomps {
        let (mut gap, mut fairness) = (f64::NEG_INFINITY, 0.0f64);
        for _ in 0..config.random_states {
            let rho = random_density_matrix(d, &mut rng);
            let probs = dec.probabilities(&rho)?;
            let cost: f64 = dec.lambdas().iter().zip(&probs).map(|(l, p)| l.abs() * p).sum();
            gap = gap.max(cost - bound);
            for p in &probs {
                fairness = fairness.max((p - 0.5).abs());
            }
        }
        checks.push(Check::within(format!("{label}_cost_saturates_bound"), gap.max(0.0), tol(1e-9)));
        checks.push(Check::within(format!("{label}_branches_equiprobable"), fairness, tol(1e-10)));
    }

    checks.push(Check::within(
        "rootswap_orthogonality",
        ip.matrix().trace_product(im.matrix()).norm(),
        tol(1e-10),
    ));
    checks.push(Check::within(
        "cloner_orthogonality",
        rp.matrix().trace_product(rm.matrix()).norm(),
        tol(1e-12),
    ));

    for kind in [
        MapKind::Cloner(Sign::Plus),
        MapKind::Cloner(Sign::Minus),
        MapKind::RootSwap(Sign::Plus),
        MapKind::RootSwap(Sign::Minus),
    ] {
        let j = fam.choi(kind);
        let min = j.matrix().hermitian_part().min_eigenvalue()?;
        checks.push(Check::within(
            format!("{}_completely_positive", kind.name()),
            (-min).max(j.matrix().antihermitian_norm()).max(0.0),
            tol(1e-9),
        ));
        checks.push(Check::within(
            format!("{}_trace_preserving", kind.name()),
            j.tp_deviation(),
            tol(1e-9),
        ));
    }
    checks.push(Check::beyond(
        "T_not_hermiticity_preserving",
        fam.choi_ideal().matrix().hermiticity_defect(),
        HERMITIAN_TOL,
    ));
    checks.push(Check::beyond(
        "I_not_trace_preserving",
        fam.choi_imag().tp_deviation(),
        1e-9,
    ));

    let mut worst = 0.0f64;
    for _ in 0..config.random_triples {
        let rho = random_density_matrix(d, &mut rng);
        let a = random_hermitian(d, &mut rng);
        let b = random_hermitian(d, &mut rng);
        let lhs: Complex64 = fam.ideal_apply(&rho)?.trace_product(&a.kron(&b));
        worst = worst.max((lhs - two_point_exact(&rho, &a, &b)?).norm());
    }
    checks.push(Check::within("correlator_identity", worst, tol(1e-10)));

    Ok(checks)
}

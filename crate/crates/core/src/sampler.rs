//! Shot-by-shot Monte Carlo estimation of `Tr[AρB]`.
//!
//! Each shot draws an instrument branch `i ~ p(i)`, then a joint outcome
//! `(α, β)` of `A ⊗ 𝟙` and `𝟙 ⊗ B` on the conditional state `ρᵢ`, and
//! records `λᵢ α β`. The sample mean is unbiased for `Tr[L(ρ)(A⊗B)]`.
//!
//! Randomness is counter based: shot `k` of pipeline `tag` under seed `s`
//! always reads the same ChaCha8 keystream words, so results do not depend
//! on evaluation order or thread count.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correlator::{two_point_exact, CorrelatorFamily};
use crate::decomposition::StatisticalDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DEGENERACY_TOL};
use crate::states::{validate_observable, validate_state};

/// Branches with `p(i)` below this are never drawn.
const BRANCH_CUTOFF: f64 = 1e-15;

/// Keystream words reserved per shot; each shot consumes at most four.
const WORDS_PER_SHOT: u128 = 16;

pub const TAG_REAL: u64 = 1;
pub const TAG_IMAG: u64 = 2;

/// One simulated run of the pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shot {
    pub branch: usize,
    pub outcome_a: f64,
    pub outcome_b: f64,
    pub weight: f64,
}

impl Shot {
    pub fn value(&self) -> f64 {
        self.weight * self.outcome_a * self.outcome_b
    }
}

fn spectrum(obs: &ComplexMatrix) -> Result<Vec<(f64, ComplexMatrix)>> {
    Ok(obs.hermitian_part().eigh()?.spectral_projectors(DEGENERACY_TOL))
}

/// Born distribution of `(α, β)` on a two-copy state.
#[derive(Clone, Debug)]
struct JointTable {
    outcomes: Vec<(f64, f64)>,
    dist: WeightedIndex<f64>,
    mean_product: f64,
}

impl JointTable {
    fn new(
        state2: &ComplexMatrix,
        a: &[(f64, ComplexMatrix)],
        b: &[(f64, ComplexMatrix)],
    ) -> Result<Self> {
        let mut outcomes = Vec::with_capacity(a.len() * b.len());
        let mut weights = Vec::with_capacity(a.len() * b.len());
        for (alpha, pa) in a {
            for (beta, pb) in b {
                outcomes.push((*alpha, *beta));
                weights.push(state2.trace_product(&pa.kron(pb)).re.max(0.0));
            }
        }
        let total: f64 = weights.iter().sum();
        let mean_product = outcomes
            .iter()
            .zip(&weights)
            .map(|((x, y), w)| x * y * w)
            .sum::<f64>()
            / total;
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidState(format!("Born weights unusable: {e}")))?;
        Ok(Self {
            outcomes,
            dist,
            mean_product,
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        self.outcomes[self.dist.sample(rng)]
    }
}

/// Draws `i` with probability `p(i) = Tr[Eᵢ(ρ)]` and returns it with
/// `ρᵢ = Eᵢ(ρ)/p(i)`.
pub fn sample_instrument_branch<R: Rng + ?Sized>(
    decomp: &StatisticalDecomposition,
    rho: &ComplexMatrix,
    rng: &mut R,
) -> Result<(usize, ComplexMatrix)> {
    validate_state(rho, decomp.dims().d_in)?;
    let probs = branch_weights(decomp, rho)?;
    let i = WeightedIndex::new(&probs)
        .map_err(|_| Error::InvalidParameter("every branch has zero probability".into()))?
        .sample(rng);
    let state = decomp.terms()[i].effect.apply(rho)?.scale_real(1.0 / probs[i]);
    Ok((i, state))
}

fn branch_weights(decomp: &StatisticalDecomposition, rho: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(decomp
        .probabilities(rho)?
        .into_iter()
        .map(|p| if p > BRANCH_CUTOFF { p } else { 0.0 })
        .collect())
}

/// Draws `(α, β)` with probability `Tr[state2 (P_α ⊗ P_β)]`.
pub fn sample_joint_measurement<R: Rng + ?Sized>(
    state2: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let d = a.rows();
    validate_observable(a, d)?;
    validate_observable(b, d)?;
    validate_state(state2, d * d)?;
    Ok(JointTable::new(state2, &spectrum(a)?, &spectrum(b)?)?.sample(rng))
}

/// Everything a shot needs, computed once per `(decomposition, ρ, A, B)`.
#[derive(Clone, Debug)]
pub struct ComponentSampler {
    lambdas: Vec<f64>,
    probabilities: Vec<f64>,
    branch_dist: WeightedIndex<f64>,
    tables: Vec<Option<JointTable>>,
}

impl ComponentSampler {
    pub fn new(
        decomp: &StatisticalDecomposition,
        rho: &ComplexMatrix,
        a: &ComplexMatrix,
        b: &ComplexMatrix,
    ) -> Result<Self> {
        let dims = decomp.dims();
        validate_state(rho, dims.d_in)?;
        let d = a.rows();
        if d * d != dims.d_out {
            return Err(Error::DimensionMismatch(format!(
                "observables act on dimension {d}, but the instrument outputs dimension {}",
                dims.d_out
            )));
        }
        validate_observable(a, d)?;
        validate_observable(b, d)?;
        let (spec_a, spec_b) = (spectrum(a)?, spectrum(b)?);
        let probabilities = branch_weights(decomp, rho)?;
        let branch_dist = WeightedIndex::new(&probabilities)
            .map_err(|_| Error::InvalidParameter("every branch has zero probability".into()))?;
        let tables = decomp
            .terms()
            .iter()
            .zip(&probabilities)
            .map(|(t, &p)| {
                if p == 0.0 {
                    return Ok(None);
                }
                let state = t.effect.apply(rho)?.scale_real(1.0 / p);
                JointTable::new(&state, &spec_a, &spec_b).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambdas: decomp.lambdas(),
            probabilities,
            branch_dist,
            tables,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `Σᵢ λᵢ p(i) ⟨A⊗B⟩ᵢ`, the value the sample mean converges to.
    pub fn expected_value(&self) -> f64 {
        self.tables
            .iter()
            .zip(&self.probabilities)
            .zip(&self.lambdas)
            .filter_map(|((t, p), l)| t.as_ref().map(|t| l * p * t.mean_product))
            .sum()
    }

    /// `Σᵢ |λᵢ| p(i)`.
    pub fn cost(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.probabilities)
            .map(|(l, p)| l.abs() * p)
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Shot {
        let branch = self.branch_dist.sample(rng);
        let table = self.tables[branch]
            .as_ref()
            .expect("zero-probability branches are never drawn");
        let (outcome_a, outcome_b) = table.sample(rng);
        Shot {
            branch,
            outcome_a,
            outcome_b,
            weight: self.lambdas[branch],
        }
    }

    /// Shot `index` of pipeline `tag` under `seed`.
    pub fn shot(&self, seed: u64, tag: u64, index: u64) -> Shot {
        self.sample(&mut shot_rng(seed, tag, index))
    }

    /// Runs `n_shots` counter-indexed shots, optionally on a dedicated pool
    /// of `threads` workers. The result is independent of `threads`.
    pub fn run(&self, n_shots: u64, seed: u64, tag: u64, threads: Option<usize>) -> Result<ComponentEstimate> {
        if n_shots == 0 {
            return Err(Error::InvalidParameter("n_shots must be at least 1".into()));
        }
        let shots: Vec<Shot> = match threads {
            Some(t) if t > 1 => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
                pool.install(|| {
                    (0..n_shots)
                        .into_par_iter()
                        .map(|k| self.shot(seed, tag, k))
                        .collect()
                })
            }
            _ => (0..n_shots).map(|k| self.shot(seed, tag, k)).collect(),
        };
        Ok(ComponentEstimate::from_shots(&shots))
    }
}

fn shot_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng.set_word_pos(u128::from(index) * WORDS_PER_SHOT);
    rng
}

/// Pairwise (cascade) summation; the split points depend only on the length.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Sample statistics of one pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentEstimate {
    pub mean: f64,
    /// Sample standard deviation (`n − 1` normalization) over `√n`; NaN for a
    /// single shot.
    pub std_error: f64,
    pub n_shots: u64,
    /// Empirical `Σᵢ |λᵢ| p(i)`: the mean of `|λ|` over shots.
    pub mean_abs_weight: f64,
}

impl ComponentEstimate {
    pub fn from_shots(shots: &[Shot]) -> Self {
        let n = shots.len();
        let values: Vec<f64> = shots.iter().map(Shot::value).collect();
        let mean = pairwise_sum(&values) / n as f64;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let std_error = if n > 1 {
            (pairwise_sum(&sq) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            f64::NAN
        };
        let weights: Vec<f64> = shots.iter().map(|s| s.weight.abs()).collect();
        Self {
            mean,
            std_error,
            n_shots: n as u64,
            mean_abs_weight: pairwise_sum(&weights) / n as f64,
        }
    }
}

/// Estimates `Tr[L(ρ)(A⊗B)]` with `L = Σ λᵢ Eᵢ`, seeding the counter-based
/// streams from one draw of `rng`.
pub fn estimate_component<R: Rng + ?Sized>(
    decomp: &StatisticalDecomposition,
    rho: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    n_shots: u64,
    rng: &mut R,
) -> Result<ComponentEstimate> {
    let sampler = ComponentSampler::new(decomp, rho, a, b)?;
    sampler.run(n_shots, rng.random(), 0, None)
}

/// Shot allocation and parallelism for [`estimate_two_point_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateConfig {
    /// Share of the budget given to the real-part pipeline.
    pub real_fraction: f64,
    pub threads: Option<usize>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            real_fraction: 0.5,
            threads: None,
        }
    }
}

/// Per-component standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentErrors {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationReport {
    /// `real_mean − i·imag_mean`.
    pub estimate: Complex64,
    pub std_error: ComponentErrors,
    pub n_shots: u64,
    pub exact: Complex64,
    pub seed: u64,
    pub real: ComponentEstimate,
    pub imag: ComponentEstimate,
}

/// [`estimate_two_point_with`] under the default 50/50 split.
pub fn estimate_two_point(
    rho: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    n_shots: u64,
    seed: u64,
) -> Result<EstimationReport> {
    estimate_two_point_with(rho, a, b, n_shots, seed, &EstimateConfig::default())
}

/// Runs the real- and imaginary-part pipelines through the universal
/// instruments and recombines them as `T = R − iI`. Each pipeline needs at
/// least two shots so that it has a standard error.
pub fn estimate_two_point_with(
    rho: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    n_shots: u64,
    seed: u64,
    config: &EstimateConfig,
) -> Result<EstimationReport> {
    if !(0.0..=1.0).contains(&config.real_fraction) {
        return Err(Error::InvalidParameter(format!(
            "real fraction must lie in [0, 1], got {}",
            config.real_fraction
        )));
    }
    let n_real = (n_shots as f64 * config.real_fraction).round() as u64;
    let n_imag = n_shots - n_real.min(n_shots);
    if n_real < 2 || n_imag < 2 {
        return Err(Error::InvalidParameter(format!(
            "{n_shots} shots split as {n_real}/{n_imag}; each part needs at least 2"
        )));
    }
    let d = rho.rows();
    validate_state(rho, d)?;
    validate_observable(a, d)?;
    validate_observable(b, d)?;
    let fam = CorrelatorFamily::new(d)?;
    let real = ComponentSampler::new(&fam.universal_real_decomposition()?, rho, a, b)?
        .run(n_real, seed, TAG_REAL, config.threads)?;
    let imag = ComponentSampler::new(&fam.universal_imag_decomposition()?, rho, a, b)?
        .run(n_imag, seed, TAG_IMAG, config.threads)?;
    Ok(EstimationReport {
        estimate: Complex64::new(real.mean, -imag.mean),
        std_error: ComponentErrors {
            re: real.std_error,
            im: imag.std_error,
        },
        n_shots,
        exact: two_point_exact(rho, a, b)?,
        seed,
        real,
        imag,
    })
}

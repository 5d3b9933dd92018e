//! `qcorr`: decomposition, estimation, verification and optics simulation
//! for the universal two-point correlator.
//!
//! Exit codes: 0 success, 1 verification failure, 2 unreadable or
//! malformed input, 3 semantically invalid input or parameters.

mod matrix_file;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use qcorr::choi::ChoiOperator;
use qcorr::correlator::{CorrelatorFamily, MapKind};
use qcorr::decomposition::{error_lower_bound, statistical_decompose, INSTRUMENT_TOL};
use qcorr::linalg::{pauli, HERMITIAN_TOL};
use qcorr::photonics::simulate_optics;
use qcorr::sampler::{estimate_two_point_with, ComponentEstimate, EstimateConfig};
use qcorr::verification::{run_checks, VerifyConfig, MAX_VERIFY_DIM};
use qcorr::{ComplexMatrix, Dims, Error};

use matrix_file::{complex_value, matrix_value, read_matrix, render};

pub const DEFAULT_SEED: u64 = 0x2A;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Semantic(String),
    VerifyFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Parse(_) => 2,
            CliError::Semantic(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Semantic(e.to_string())
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

#[derive(Parser, Debug)]
#[command(name = "qcorr", version, about = "Universal two-point quantum correlator toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Statistically decompose a Hermitian Choi operator into an instrument.
    Decompose {
        /// MatrixFile holding the Choi operator on output ⊗ input.
        input: PathBuf,
        /// Input dimension; the output dimension is side / d_in.
        /// Defaults to the square root of the side.
        #[arg(long)]
        d_in: Option<usize>,
        /// Relative hermiticity tolerance.
        #[arg(long, default_value_t = HERMITIAN_TOL, allow_negative_numbers = true)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of Tr[A rho B] through the universal instruments.
    Estimate {
        rho: PathBuf,
        a: PathBuf,
        b: PathBuf,
        /// Total shots, split between the real and imaginary pipelines.
        #[arg(long, default_value_t = 200_000)]
        shots: u64,
        /// RNG seed (decimal or 0x-prefixed hex).
        #[arg(long, default_value = "0x2A", value_parser = parse_seed)]
        seed: u64,
        /// Worker threads for shot evaluation; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Share of shots given to the real-part pipeline.
        #[arg(long, default_value_t = 0.5)]
        real_fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite for dimension D (2..=16; D > 8 takes minutes).
    Verify {
        d: usize,
        /// Write every Choi operator of the family into this directory.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// RNG seed for the random states and observables.
        #[arg(long, default_value = "0x2A", value_parser = parse_seed)]
        seed: u64,
        /// Replace every per-check tolerance.
        #[arg(long, allow_negative_numbers = true)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the two-beamsplitter optical setup on a qubit input.
    Experiment {
        rho: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = render(value);
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Semantic(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_decompose(input: &Path, d_in: Option<usize>, tol: f64) -> Result<Value, CliError> {
    let m = read_matrix(input)?;
    if !m.is_square() {
        return Err(CliError::Semantic(format!(
            "a Choi operator must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let side = m.rows();
    let d_in = match d_in {
        Some(d) => d,
        None => {
            let r = (side as f64).sqrt().round() as usize;
            if r * r != side {
                return Err(CliError::Semantic(format!(
                    "side {side} is not a perfect square; pass --d-in"
                )));
            }
            r
        }
    };
    if d_in == 0 || side % d_in != 0 {
        return Err(CliError::Semantic(format!("d_in = {d_in} does not divide side {side}")));
    }
    let dims = Dims::new(d_in, side / d_in)?;
    let defect = m.hermiticity_defect();
    if defect > tol {
        return Err(CliError::Semantic(format!(
            "not hermiticity preserving: relative defect {defect:.3e} exceeds {tol:.3e}"
        )));
    }
    let j = ChoiOperator::new(m.hermitian_part(), dims)?;
    let dec = statistical_decompose(&j)?;
    let terms: Vec<Value> = dec
        .terms()
        .iter()
        .map(|t| json!({"lambda": t.lambda, "effect": matrix_value(t.effect.matrix())}))
        .collect();
    let flags: Vec<bool> = dec
        .terms()
        .iter()
        .map(|t| t.effect.is_completely_positive(INSTRUMENT_TOL))
        .collect();
    Ok(json!({
        "dims": {"d_in": dims.d_in, "d_out": dims.d_out},
        "terms": terms,
        "bound": error_lower_bound(&j)?,
        "is_cp_flags": flags,
        "recombination_residual": dec.recombine().matrix().distance(j.matrix()),
    }))
}

fn component_value(c: &ComponentEstimate) -> Value {
    json!({
        "mean": c.mean,
        "std_error": c.std_error,
        "n_shots": c.n_shots,
        "mean_abs_weight": c.mean_abs_weight,
    })
}

fn cmd_estimate(
    paths: [&Path; 3],
    shots: u64,
    seed: u64,
    config: &EstimateConfig,
) -> Result<Value, CliError> {
    let [rho, a, b] = paths.map(read_matrix);
    let (rho, a, b) = (rho?, a?, b?);
    let report = estimate_two_point_with(&rho, &a, &b, shots, seed, config)?;
    Ok(json!({
        "estimate": complex_value(report.estimate),
        "std_error": {"re": report.std_error.re, "im": report.std_error.im},
        "exact": complex_value(report.exact),
        "n_shots": report.n_shots,
        "seed": report.seed,
        "real": component_value(&report.real),
        "imag": component_value(&report.imag),
    }))
}

fn cmd_verify(d: usize, dump: Option<&Path>, config: &VerifyConfig) -> Result<(Value, bool), CliError> {
    if !(2..=MAX_VERIFY_DIM).contains(&d) {
        return Err(CliError::Semantic(format!(
            "verify supports 2 <= d <= {MAX_VERIFY_DIM}, got {d}"
        )));
    }
    let fam = CorrelatorFamily::new(d)?;
    if let Some(dir) = dump {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Semantic(format!("cannot create {}: {e}", dir.display())))?;
        for kind in MapKind::ALL {
            let path = dir.join(format!("choi_{}.json", kind.name()));
            emit(&matrix_value(fam.choi(kind).matrix()), Some(&path))?;
        }
    }
    let checks = run_checks(&fam, config)?;
    let passed = checks.iter().all(|c| c.passed);
    let list: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "passed": c.passed,
                "residual": c.residual,
                "tolerance": c.tolerance,
            })
        })
        .collect();
    Ok((json!({"d": d, "seed": config.seed, "passed": passed, "checks": list}), passed))
}

fn cmd_experiment(rho: &Path) -> Result<Value, CliError> {
    let rho = read_matrix(rho)?;
    if rho.shape() != (2, 2) {
        return Err(CliError::Semantic(format!(
            "the optical setup takes a qubit, got a {}x{} matrix",
            rho.rows(),
            rho.cols()
        )));
    }
    let stats = simulate_optics(&rho)?;
    // the sixteen Pauli products span all observable pairs
    let basis = [ComplexMatrix::identity(2), pauli::x(), pauli::y(), pauli::z()];
    let mut residual = 0.0f64;
    for a in &basis {
        for b in &basis {
            let anti = &(a * b) + &(b * a);
            let target = rho.trace_product(&anti).re / 2.0;
            residual = residual.max((stats.recombine(a, b)? - target).abs());
        }
    }
    let patterns: serde_json::Map<String, Value> = stats
        .patterns
        .iter()
        .map(|(k, p)| (format!("c{}_e{}_f{}", k[0], k[1], k[2]), json!(p)))
        .collect();
    Ok(json!({
        "p_sym": stats.p_sym,
        "p_anti": stats.p_anti,
        "p_discarded": stats.p_discarded,
        "recombination_residual": residual,
        "patterns": patterns,
        "state_sym": matrix_value(&stats.state_sym),
        "state_anti": matrix_value(&stats.state_anti),
    }))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decompose { input, d_in, tol, out } => emit(&cmd_decompose(&input, d_in, tol)?, out.as_deref()),
        Command::Estimate {
            rho,
            a,
            b,
            shots,
            seed,
            threads,
            real_fraction,
            out,
        } => {
            let config = EstimateConfig { real_fraction, threads };
            let value = cmd_estimate([&rho, &a, &b], shots, seed, &config)?;
            emit(&value, out.as_deref())
        }
        Command::Verify { d, dump, seed, tol, out } => {
            let config = VerifyConfig {
                seed,
                tol,
                ..VerifyConfig::default()
            };
            let (value, passed) = cmd_verify(d, dump.as_deref(), &config)?;
            emit(&value, out.as_deref())?;
            if passed {
                Ok(())
            } else {
                Err(CliError::VerifyFailed)
            }
        }
        Command::Experiment { rho, out } => emit(&cmd_experiment(&rho)?, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Parse(msg) => eprintln!("qcorr: parse error: {msg}"),
                CliError::Semantic(msg) => eprintln!("qcorr: error: {msg}"),
                CliError::VerifyFailed => eprintln!("qcorr: verification failed"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

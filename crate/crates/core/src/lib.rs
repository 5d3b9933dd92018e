//! Construction, verification and Monte Carlo simulation of the universal
//! two-point quantum correlator, which estimates `Tr[A ρ B]` for any state
//! `ρ` and observables `A`, `B` from physically realizable measurements.
//!
//! Linear maps are represented throughout by their Choi operators
//! ([`choi::ChoiOperator`]). The modules build on each other:
//!
//! * [`linalg`] / [`operators`]: dense complex matrices and fixed operators.
//! * [`choi`]: the Choi isomorphism and CP/HP/TP predicates.
//! * [`decomposition`]: statistical decompositions, their cost, the error
//!   lower bound and Stinespring-type dilations.
//! * [`correlator`]: the ideal correlator, its real and imaginary parts and
//!   their universal optimal decompositions.
//! * [`sampler`]: shot-level Monte Carlo estimation.
//! * [`photonics`]: an exact Fock-space model of a linear-optics
//!   implementation of the real part for qubits.
//! * [`verification`]: the per-dimension invariant suite behind `qcorr verify`.

pub mod choi;
pub mod correlator;
pub mod decomposition;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod photonics;
pub mod sampler;
pub mod states;
pub mod verification;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Dims, Sign};
pub use num_complex::Complex64;

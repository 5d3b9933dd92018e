//! Dense complex matrices and the handful of primitives everything else is
//! built from: Kronecker products, partial traces and the Hermitian
//! eigendecomposition.
//!
//! Tensor products use row-major ordering with subsystem 0 as the slowest
//! index: for `a ⊗ b` the entry `(i·d_b + k, j·d_b + l)` equals
//! `a[i,j]·b[k,l]`. Every module in the crate relies on this convention.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative Frobenius tolerance used when a matrix must be Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues closer than this (relative to the spectral radius) are treated
/// as one degenerate cluster when fixing the output order.
pub const DEGENERACY_TOL: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Input and output dimensions of a linear map `L(H) -> L(K)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub d_in: usize,
    pub d_out: usize,
}

impl Dims {
    pub fn new(d_in: usize, d_out: usize) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidDimension(format!(
                "dimensions must be positive, got d_in={d_in}, d_out={d_out}"
            )));
        }
        Ok(Self { d_in, d_out })
    }

    /// Side length of a Choi operator on `K ⊗ H`.
    pub fn choi_side(&self) -> usize {
        self.d_in * self.d_out
    }
}

/// `+` or `−`, used to select symmetric/antisymmetric sectors and the `Q±`
/// operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Dense complex matrix. Values are immutable from the outside; every
/// operation returns a fresh matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major entries, rejecting empty shapes,
    /// length mismatches and non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "matrix shape must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &data)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { ZERO })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// The matrix unit `|i⟩⟨j|` of size `n × n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = ONE;
        Self(m)
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.diagonal().iter().sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`. Panics on shape mismatch.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in distance");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in max_abs_diff");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `Tr[self · other]` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        assert_eq!(self.cols(), other.rows());
        assert_eq!(self.rows(), other.cols());
        let mut acc = ZERO;
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// `‖m − m†‖_F`.
    pub fn antihermitian_norm(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0[(i, j)] - self.0[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Relative Hermiticity defect `‖m − m†‖_F / max(‖m‖_F, 1)`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.antihermitian_norm() / self.frobenius_norm().max(1.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol
    }

    /// `(m + m†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        let (ra, ca) = self.shape();
        let (rb, cb) = other.shape();
        let mut out = DMatrix::zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in 0..ca {
                let a = self.0[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rb {
                    for l in 0..cb {
                        out[(i * rb + k, j * cb + l)] = a * other.0[(k, l)];
                    }
                }
            }
        }
        Self(out)
    }

    /// Traces out every subsystem not listed in `keep`.
    ///
    /// `dims` gives the subsystem dimensions (slowest first); `keep` holds
    /// 0-based subsystem indices in increasing order. The kept subsystems
    /// retain their relative order.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidDimension(format!("bad subsystem dimensions {dims:?}")));
        }
        if !self.is_square() || self.rows() != total {
            return Err(Error::DimensionMismatch(format!(
                "partial trace over {dims:?} needs a {total}x{total} matrix, got {}x{}",
                self.rows(),
                self.cols()
            )));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::InvalidDimension(format!(
                "kept subsystems {keep:?} must be increasing indices below {}",
                dims.len()
            )));
        }

        // Row-major strides of each subsystem inside the full index.
        let mut strides = vec![1usize; dims.len()];
        for s in (0..dims.len() - 1).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
        let offsets = |sel: &[usize]| -> Vec<usize> {
            let n: usize = sel.iter().map(|&s| dims[s]).product();
            (0..n)
                .map(|mut flat| {
                    let mut off = 0;
                    for &s in sel.iter().rev() {
                        off += (flat % dims[s]) * strides[s];
                        flat /= dims[s];
                    }
                    off
                })
                .collect()
        };
        let kept_off = offsets(keep);
        let traced_off = offsets(&traced);

        let n = kept_off.len();
        let out = DMatrix::from_fn(n, n, |i, j| {
            traced_off
                .iter()
                .map(|&t| self.0[(kept_off[i] + t, kept_off[j] + t)])
                .sum()
        });
        Ok(Self(out))
    }

    /// Eigendecomposition of a Hermitian matrix with eigenvalues ascending.
    pub fn eigh(&self) -> Result<HermitianEigen> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                self.rows(),
                self.cols()
            )));
        }
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let n = self.rows();
        let herm = self.hermitian_part();
        let m = faer::Mat::<Complex64>::from_fn(n, n, |i, j| herm.0[(i, j)]);
        // Divide and conquer can fail on large, highly degenerate inputs;
        // the plain tridiagonal QR iteration is slower but always converges.
        let (s, u) = faer_evd(&m, false)
            .or_else(|_| faer_evd(&m, true))
            .map_err(|_| Error::NoConvergence)?;

        let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
            .map(|k| {
                let v = normalize_phase((0..n).map(|i| u[(i, k)]).collect());
                (s[k], v)
            })
            .collect();
        if pairs.iter().any(|p| !p.0.is_finite()) {
            return Err(Error::NoConvergence);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        // Inside degenerate clusters the basis is arbitrary; order it
        // lexicographically so repeated runs agree.
        let scale = pairs.iter().map(|p| p.0.abs()).fold(1.0, f64::max);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && pairs[end].0 - pairs[end - 1].0 <= DEGENERACY_TOL * scale {
                end += 1;
            }
            if end - start > 1 {
                pairs[start..end].sort_by(|a, b| lexicographic(&a.1, &b.1));
            }
            start = end;
        }

        let values = pairs.iter().map(|p| p.0).collect();
        let vectors = DMatrix::from_fn(n, n, |i, k| pairs[k].1[i]);
        Ok(HermitianEigen {
            values,
            vectors: Self(vectors),
        })
    }

    /// Operator absolute value `|m| = Σ |μᵢ| |vᵢ⟩⟨vᵢ|`.
    pub fn abs(&self) -> Result<Self> {
        Ok(self.eigh()?.map_spectrum(f64::abs))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.values[0])
    }
}

fn faer_evd(
    m: &faer::Mat<Complex64>,
    qr_only: bool,
) -> std::result::Result<(Vec<f64>, faer::Mat<Complex64>), faer::linalg::evd::EvdError> {
    use faer::dyn_stack::{MemBuffer, MemStack};
    use faer::linalg::evd::{self, ComputeEigenvectors, SelfAdjointEvdParams};

    let n = m.nrows();
    let par = faer::Par::Seq;
    let mut params: faer::Spec<SelfAdjointEvdParams, Complex64> = Default::default();
    if qr_only {
        params.recursion_threshold = usize::MAX;
    }
    let mut s = faer::diag::Diag::<Complex64>::zeros(n);
    let mut u = faer::Mat::<Complex64>::zeros(n, n);
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<Complex64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        params,
    ));
    evd::self_adjoint_evd(
        m.as_ref(),
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut buf),
        params,
    )?;
    Ok((s.column_vector().iter().map(|z| z.re).collect(), u))
}

/// Rotates a vector so that its first non-negligible entry is real positive.
fn normalize_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-8 * max.max(f64::MIN_POSITIVE)) {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
    v
}

fn lexicographic(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Eigenvalues (ascending) with orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// Rank-one projector onto the `k`-th eigenvector.
    pub fn projector(&self, k: usize) -> ComplexMatrix {
        let v = self.vector(k);
        ComplexMatrix::outer(&v, &v)
    }

    /// `Σ f(μᵢ) |vᵢ⟩⟨vᵢ|`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.vectors.as_inner();
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * f(self.values[k]));
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }

    /// Groups eigenvalues within `tol` of each other and returns each
    /// distinct eigenvalue (cluster mean) with its spectral projector.
    pub fn spectral_projectors(&self, tol: f64) -> Vec<(f64, ComplexMatrix)> {
        let n = self.values.len();
        let mut out = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && self.values[end] - self.values[end - 1] <= tol {
                end += 1;
            }
            let mean = self.values[start..end].iter().sum::<f64>() / (end - start) as f64;
            let mut proj = ComplexMatrix::zeros(n, n);
            for k in start..end {
                proj = &proj + &self.projector(k);
            }
            out.push((mean, proj));
            start = end;
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Pauli matrices, used by tests, the CLI and the optics model.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
    }

    pub fn y() -> ComplexMatrix {
        let i = Complex64::i();
        ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 1) => -i,
            (1, 0) => i,
            _ => ZERO,
        })
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_z_is_diagonal() {
        let zz = pauli::z().kron(&pauli::z());
        assert_eq!(zz, ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_x_y_matches_hand_expansion() {
        // σx ⊗ σy written out entry by entry.
        let i = c(0.0, 1.0);
        let z = ZERO;
        let expected = ComplexMatrix::from_row_major(
            4,
            4,
            vec![
                z, z, z, -i, //
                z, z, i, z, //
                z, -i, z, z, //
                i, z, z, z,
            ],
        )
        .unwrap();
        assert_eq!(pauli::x().kron(&pauli::y()), expected);
    }

    #[test]
    fn from_row_major_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::from_row_major(2, 2, vec![ONE; 3]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            ComplexMatrix::from_row_major(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
        assert!(matches!(
            ComplexMatrix::from_row_major(0, 1, vec![]),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn partial_trace_rejects_mismatch() {
        let m = ComplexMatrix::identity(5);
        assert!(matches!(m.partial_trace(&[2, 2], &[0]), Err(Error::DimensionMismatch(_))));
        let m = ComplexMatrix::identity(4);
        assert!(m.partial_trace(&[2, 2], &[2]).is_err());
        assert!(m.partial_trace(&[2, 2], &[1, 0]).is_err());
    }

    #[test]
    fn partial_trace_of_three_subsystems() {
        let a = pauli::x();
        let b = ComplexMatrix::from_real_diagonal(&[0.25, 0.75]);
        let cm = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let m = a.kron(&b).kron(&cm);
        // keep the middle factor: Tr[a] = 0
        let mid = m.partial_trace(&[2, 2, 3], &[1]).unwrap();
        assert!(mid.frobenius_norm() < 1e-14);
        let outer = m.partial_trace(&[2, 2, 3], &[0, 2]).unwrap();
        assert!(outer.distance(&a.kron(&cm)) < 1e-14);
        let all = m.partial_trace(&[2, 2, 3], &[]).unwrap();
        assert_eq!(all.shape(), (1, 1));
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = pauli::z().eigh().unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn identity_spectrum_is_degenerate() {
        let e = ComplexMatrix::identity(5).eigh().unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let p = e.spectral_projectors(1e-9);
        assert_eq!(p.len(), 1);
        assert!(p[0].1.distance(&ComplexMatrix::identity(5)) < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_major(2, 2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        assert!(matches!(m.eigh(), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn abs_of_pauli_and_negated_projector() {
        assert!(pauli::z().abs().unwrap().distance(&ComplexMatrix::identity(2)) < 1e-14);
        let p = ComplexMatrix::outer(&[c(0.6, 0.0), c(0.0, 0.8)], &[c(0.6, 0.0), c(0.0, 0.8)]);
        assert!((-&p).abs().unwrap().distance(&p) < 1e-14);
    }

    #[test]
    fn eigh_is_deterministic_on_degenerate_input() {
        let s = crate::operators::swap_operator(3);
        let a = s.eigh().unwrap();
        let b = s.clone().eigh().unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }
}

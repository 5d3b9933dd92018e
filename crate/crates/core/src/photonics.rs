//! Exact linear-optics model of the probabilistic real-part correlator on
//! polarization qubits.
//!
//! A photon carrying `ρ` enters port `a`; one photon of a polarization
//! `Φ⁺` pair enters port `b` while its twin stays in the reference port `r`.
//! BS1 mixes `(a, b) → (c, d)` and BS2 mixes `(d, vacuum) → (e, f)`.
//! One photon at each of `e, f` heralds the symmetric cloner `R₊`; one at
//! each of `c, e` heralds the antisymmetric cloner `R₋`.
//!
//! States are stored as polynomials in creation operators acting on the
//! vacuum, so passive elements are linear substitutions on the variables.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::states::validate_state;

pub const H: usize = 0;
pub const V: usize = 1;

/// Spatial ports. Ports 0 and 1 are relabelled by the beamsplitters:
/// `a → c`, `b → d → e`, and the vacuum port becomes `f`.
pub const PORT_C: usize = 0;
pub const PORT_E: usize = 1;
pub const PORT_REF: usize = 2;
pub const PORT_F: usize = 3;
pub const PORT_A: usize = PORT_C;
pub const PORT_B: usize = PORT_E;
pub const N_PORTS: usize = 4;

pub fn mode(port: usize, pol: usize) -> usize {
    2 * port + pol
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// A state of photons in `n_modes` bosonic modes, written as
/// `Σ c_m Π_{k∈m} a†_k |0⟩` over sorted mode multisets `m`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FockState {
    n_modes: usize,
    terms: HashMap<Vec<usize>, Complex64>,
}

impl FockState {
    pub fn vacuum(n_modes: usize) -> Self {
        let mut terms = HashMap::new();
        terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
        Self { n_modes, terms }
    }

    pub fn empty(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: HashMap::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Adds `amp · Π a†_k |0⟩`.
    pub fn add_term(&mut self, modes: &[usize], amp: Complex64) -> Result<()> {
        if let Some(&m) = modes.iter().find(|&&m| m >= self.n_modes) {
            return Err(Error::InvalidParameter(format!(
                "mode {m} out of range for {} modes",
                self.n_modes
            )));
        }
        let mut key = modes.to_vec();
        key.sort_unstable();
        *self.terms.entry(key).or_insert(ZERO) += amp;
        Ok(())
    }

    /// Amplitude of the normalized Fock basis state with the given modes
    /// occupied: `c_m √(Π n_k!)`.
    pub fn amplitude(&self, modes: &[usize]) -> Complex64 {
        let mut key = modes.to_vec();
        key.sort_unstable();
        match self.terms.get(&key) {
            Some(&c) => c * occupation_weight(&key).sqrt(),
            None => ZERO,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c.norm_sqr() * occupation_weight(k))
            .sum()
    }

    /// Probability of each distinct occupation pattern, keyed by the sorted
    /// occupied modes.
    pub fn distribution(&self) -> BTreeMap<Vec<usize>, f64> {
        self.terms
            .iter()
            .map(|(k, c)| (k.clone(), c.norm_sqr() * occupation_weight(k)))
            .filter(|(_, p)| *p > 0.0)
            .collect()
    }

    pub fn photon_number(&self) -> Option<usize> {
        let mut counts = self.terms.keys().map(Vec::len);
        let first = counts.next()?;
        counts.all(|n| n == first).then_some(first)
    }
}

/// `Π n_k!` for a sorted mode multiset.
fn occupation_weight(sorted: &[usize]) -> f64 {
    let mut w = 1.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        w *= factorial(j - i);
        i = j;
    }
    w
}

/// Mixes spatial ports `p` and `q` on both polarizations:
/// `a†_p → t a†_p + r a†_q`, `a†_q → −r a†_p + t a†_q` with
/// `t = √T`, `r = √(1−T)`.
pub fn beamsplitter_action(
    state: &FockState,
    ports: (usize, usize),
    transmissivity: f64,
) -> Result<FockState> {
    let (p, q) = ports;
    let n_ports = state.n_modes / 2;
    if p == q || p >= n_ports || q >= n_ports {
        return Err(Error::InvalidParameter(format!(
            "invalid port pair ({p}, {q}) for {n_ports} ports"
        )));
    }
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::InvalidParameter(format!(
            "transmissivity must lie in [0, 1], got {transmissivity}"
        )));
    }
    let t = transmissivity.sqrt();
    let r = (1.0 - transmissivity).sqrt();
    let image = |m: usize| -> Vec<(usize, f64)> {
        let (port, pol) = (m / 2, m % 2);
        if port == p {
            vec![(mode(p, pol), t), (mode(q, pol), r)]
        } else if port == q {
            vec![(mode(p, pol), -r), (mode(q, pol), t)]
        } else {
            vec![(m, 1.0)]
        }
    };
    let mut out = FockState::empty(state.n_modes);
    for (key, &c) in &state.terms {
        let mut partial: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
        for &m in key {
            partial = partial
                .into_iter()
                .flat_map(|(k, w)| {
                    image(m).into_iter().filter(|(_, x)| *x != 0.0).map(move |(n, x)| {
                        let mut k = k.clone();
                        k.push(n);
                        (k, w * x)
                    })
                })
                .collect();
        }
        for (k, w) in partial {
            out.add_term(&k, c * w)?;
        }
    }
    out.terms.retain(|_, c| c.norm_sqr() > 0.0);
    Ok(out)
}

/// Beamsplitter transmissivities of the two-stage interferometer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpticalConfiguration {
    pub bs1: f64,
    pub bs2: f64,
}

impl Default for OpticalConfiguration {
    fn default() -> Self {
        Self { bs1: 0.5, bs2: 0.5 }
    }
}

/// Photon counts at the detected ports `(c, e, f)`.
pub type DetectionPattern = [usize; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceStats {
    /// One photon at each of `e` and `f`.
    pub p_sym: f64,
    /// One photon at each of `c` and `e`.
    pub p_anti: f64,
    /// Post-selected polarization state on `(e, f, r)`.
    pub state_sym: ComplexMatrix,
    /// Post-selected polarization state on `(c, e, r)`.
    pub state_anti: ComplexMatrix,
    /// Probability of every detection pattern.
    pub patterns: BTreeMap<DetectionPattern, f64>,
    /// `1 − p_sym − p_anti`.
    pub p_discarded: f64,
}

impl CoincidenceStats {
    /// Detected two-qubit state of the symmetric branch, reference traced out.
    pub fn detected_sym(&self) -> ComplexMatrix {
        self.state_sym.partial_trace(&[2, 2, 2], &[0, 1]).expect("8x8")
    }

    pub fn detected_anti(&self) -> ComplexMatrix {
        self.state_anti.partial_trace(&[2, 2, 2], &[0, 1]).expect("8x8")
    }

    /// `(3/2)⟨A⊗B⟩_sym − (1/2)⟨A⊗B⟩_anti`, which should equal
    /// `Tr[ρ{A,B}/2]`.
    pub fn recombine(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
        if a.shape() != (2, 2) || b.shape() != (2, 2) {
            return Err(Error::DimensionMismatch("observables must be 2x2".into()));
        }
        let ab = a.kron(b);
        let sym = self.detected_sym().trace_product(&ab).re;
        let anti = self.detected_anti().trace_product(&ab).re;
        Ok(1.5 * sym - 0.5 * anti)
    }
}

/// Input photon `ψ` in `a`, `(|HH⟩ + |VV⟩)/√2` across `b` and `r`.
fn input_state(psi: &[Complex64]) -> FockState {
    let mut s = FockState::empty(2 * N_PORTS);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (pol_a, amp) in psi.iter().enumerate() {
        for pol in [H, V] {
            s.add_term(
                &[mode(PORT_A, pol_a), mode(PORT_B, pol), mode(PORT_REF, pol)],
                amp * h,
            )
            .expect("modes in range");
        }
    }
    s
}

/// Polarization amplitudes on `(x, y, r)` given one photon in each port.
fn heralded_vector(s: &FockState, x: usize, y: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(8);
    for px in [H, V] {
        for py in [H, V] {
            for pr in [H, V] {
                v.push(s.amplitude(&[mode(x, px), mode(y, py), mode(PORT_REF, pr)]));
            }
        }
    }
    v
}

fn pattern_of(key: &[usize]) -> DetectionPattern {
    let mut counts = [0; 3];
    for &m in key {
        match m / 2 {
            PORT_C => counts[0] += 1,
            PORT_E => counts[1] += 1,
            PORT_F => counts[2] += 1,
            _ => {}
        }
    }
    counts
}

impl OpticalConfiguration {
    pub fn simulate(&self, rho: &ComplexMatrix) -> Result<CoincidenceStats> {
        validate_state(rho, 2)?;
        let eig = rho.eigh()?;
        let mut sym = ComplexMatrix::zeros(8, 8);
        let mut anti = ComplexMatrix::zeros(8, 8);
        let mut patterns: BTreeMap<DetectionPattern, f64> = BTreeMap::new();
        for (k, &w) in eig.values.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let s = input_state(&eig.vector(k));
            let s = beamsplitter_action(&s, (PORT_A, PORT_B), self.bs1)?;
            let s = beamsplitter_action(&s, (PORT_B, PORT_F), self.bs2)?;
            for (key, p) in s.distribution() {
                *patterns.entry(pattern_of(&key)).or_insert(0.0) += w * p;
            }
            let v = heralded_vector(&s, PORT_E, PORT_F);
            sym = &sym + &ComplexMatrix::outer(&v, &v).scale_real(w);
            let v = heralded_vector(&s, PORT_C, PORT_E);
            anti = &anti + &ComplexMatrix::outer(&v, &v).scale_real(w);
        }
        let p_sym = sym.trace().re;
        let p_anti = anti.trace().re;
        let normalize = |m: ComplexMatrix, p: f64| {
            if p > 0.0 {
                m.scale_real(1.0 / p)
            } else {
                m
            }
        };
        Ok(CoincidenceStats {
            p_sym,
            p_anti,
            state_sym: normalize(sym, p_sym),
            state_anti: normalize(anti, p_anti),
            patterns,
            p_discarded: 1.0 - p_sym - p_anti,
        })
    }
}

/// [`OpticalConfiguration::simulate`] with two 50/50 beamsplitters.
pub fn simulate_optics(rho: &ComplexMatrix) -> Result<CoincidenceStats> {
    OpticalConfiguration::default().simulate(rho)
}

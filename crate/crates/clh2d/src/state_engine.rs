//! Quantum state backends: stabilizer tableau and dense statevector.
//!
//! Both backends expose the same three primitives — product-state
//! initialization, projective measurement of a ±1-spectrum observable, and
//! Pauli-string application — which is all the groundstate-synthesis
//! pipelines need.
//!
//! The stabilizer backend is an Aaronson–Gottesman tableau (stabilizer rows
//! plus destabilizer rows) generalized to measure arbitrary phased Pauli
//! strings, not just single-qubit `Z`: commutation of the measured string
//! with each generator is a symplectic product, and the deterministic-case
//! outcome is recovered from the destabilizer bookkeeping exactly as in the
//! single-qubit algorithm. The statevector backend stores `2^n` complex
//! amplitudes (qubit 0 = most significant index bit) and supports arbitrary
//! dense observables on qubit subsets in addition to Pauli strings.
//!
//! # Randomness and cross-backend determinism
//!
//! Each state owns a seeded ChaCha20 stream. Measurements whose outcome is
//! certain consume **no** randomness on either backend; a fair-coin
//! measurement consumes exactly one boolean draw on either backend. The
//! statevector backend snaps Born probabilities within `1e−6` of {0, ½, 1}
//! onto those exact values, so a Pauli-only pipeline runs bit-identically on
//! both backends with the same seed.

use crate::linalg::{self, apply_local, CMat, CVec, C64};
use crate::pauli::PauliString;
use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

/// Default statevector cap: 2^20 amplitudes = 16 MiB of complex doubles.
pub const DEFAULT_SV_CAP: usize = 20;

/// Probability snap tolerance for deterministic-outcome detection.
pub const SNAP_TOL: f64 = 1e-6;

/// Which representation backs a [`QuantumState`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Backend {
    Stabilizer,
    Statevector,
}

/// Errors from state construction and measurement.
#[derive(Debug, Error)]
pub enum StateError {
    #[error("state too large: {n} qubits exceeds the {cap}-qubit cap")]
    TooLarge { n: usize, cap: usize },
    #[error("observable spectrum is not ±1: {what}")]
    BadSpectrum { what: String },
    #[error("operation unsupported on this backend: {what}")]
    BackendUnsupported { what: String },
}

/// A ±1-spectrum observable.
#[derive(Clone, Debug)]
pub enum Observable {
    /// A phased Pauli string (the phase must be ±1).
    Pauli(PauliString),
    /// A dense Hermitian matrix on the listed qubits with spectrum ⊆ {±1},
    /// e.g. `2π_h − I` for a local term `h`. Statevector backend only.
    Dense { matrix: CMat, qubits: Vec<usize> },
}

/// A quantum state of `n` qubits with its private randomness stream and a
/// log of every measurement outcome drawn so far.
pub struct QuantumState {
    n: usize,
    repr: Repr,
    rng: ChaCha20Rng,
    /// Outcomes of all measurements performed on this state, in order.
    pub outcome_log: Vec<i8>,
}

enum Repr {
    Stab(Tableau),
    Vector(CVec),
}

impl QuantumState {
    /// `|0⟩^{⊗n}` on the requested backend with the default statevector cap.
    pub fn init_product(n: usize, backend: Backend, rng: ChaCha20Rng) -> Result<Self, StateError> {
        Self::init_product_with_cap(n, backend, rng, DEFAULT_SV_CAP)
    }

    /// `|0⟩^{⊗n}` with an explicit statevector cap.
    pub fn init_product_with_cap(
        n: usize,
        backend: Backend,
        rng: ChaCha20Rng,
        sv_cap: usize,
    ) -> Result<Self, StateError> {
        if n == 0 {
            return Err(StateError::BadSpectrum {
                what: "zero-qubit state".into(),
            });
        }
        let repr = match backend {
            Backend::Stabilizer => Repr::Stab(Tableau::zero_state(n)),
            Backend::Statevector => {
                if n > sv_cap {
                    return Err(StateError::TooLarge { n, cap: sv_cap });
                }
                let mut amps: CVec = Array1::zeros(1 << n);
                amps[0] = C64::new(1.0, 0.0);
                Repr::Vector(amps)
            }
        };
        Ok(QuantumState {
            n,
            repr,
            rng,
            outcome_log: Vec::new(),
        })
    }

    /// Wrap an explicit amplitude vector as a statevector state.
    ///
    /// The length must be a power of two and the vector must be normalized
    /// to within `1e-6`; it is renormalized exactly on entry so later
    /// probabilities stay well-conditioned.
    pub fn from_amplitudes(amps: CVec, rng: ChaCha20Rng) -> Result<Self, StateError> {
        let dim = amps.len();
        let n = dim.trailing_zeros() as usize;
        if dim < 2 || dim != (1usize << n) {
            return Err(StateError::BadSpectrum {
                what: format!("amplitude vector length {dim} is not a power of two ≥ 2"),
            });
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(StateError::BadSpectrum {
                what: format!("amplitude vector has norm {norm:.9}, expected 1"),
            });
        }
        Ok(QuantumState {
            n,
            repr: Repr::Vector(amps.mapv(|z| z / norm)),
            rng,
            outcome_log: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        match self.repr {
            Repr::Stab(_) => Backend::Stabilizer,
            Repr::Vector(_) => Backend::Statevector,
        }
    }

    /// Measure a ±1 observable; returns the outcome and collapses the state.
    ///
    /// Deterministic outcomes (probability within [`SNAP_TOL`] of 0 or 1)
    /// consume no randomness; a fair coin consumes one boolean draw.
    pub fn measure_observable(&mut self, obs: &Observable) -> Result<i8, StateError> {
        let outcome = match (&mut self.repr, obs) {
            (Repr::Stab(tab), Observable::Pauli(p)) => {
                if p.phase() % 2 != 0 {
                    return Err(StateError::BadSpectrum {
                        what: "pauli string with imaginary phase".into(),
                    });
                }
                tab.measure(p, &mut self.rng)
            }
            (Repr::Stab(_), Observable::Dense { .. }) => {
                return Err(StateError::BackendUnsupported {
                    what: "dense observable on stabilizer backend".into(),
                })
            }
            (Repr::Vector(amps), obs) => {
                let plus = Self::apply_projector(amps, obs, self.n, 1)?;
                let p_plus: f64 = plus.iter().map(|z| z.norm_sqr()).sum();
                let outcome = if p_plus > 1.0 - SNAP_TOL {
                    1
                } else if p_plus < SNAP_TOL {
                    -1
                } else if (p_plus - 0.5).abs() <= SNAP_TOL {
                    if self.rng.gen::<bool>() {
                        1
                    } else {
                        -1
                    }
                } else if self.rng.gen_bool(p_plus.clamp(0.0, 1.0)) {
                    1
                } else {
                    -1
                };
                let collapsed = if outcome == 1 {
                    plus
                } else {
                    Self::apply_projector(amps, obs, self.n, -1)?
                };
                let norm: f64 = collapsed.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                *amps = collapsed.mapv(|z| z / C64::new(norm, 0.0));
                outcome
            }
        };
        self.outcome_log.push(outcome);
        Ok(outcome)
    }

    /// `Π_± ψ` for the observable's ±1 eigenprojector, without normalizing.
    fn apply_projector(
        amps: &CVec,
        obs: &Observable,
        n: usize,
        sign: i8,
    ) -> Result<CVec, StateError> {
        match obs {
            Observable::Pauli(p) => {
                if p.phase() % 2 != 0 {
                    return Err(StateError::BadSpectrum {
                        what: "pauli string with imaginary phase".into(),
                    });
                }
                let p_amps = apply_pauli_to_amps(amps, p, n);
                let s = C64::new(sign as f64, 0.0);
                Ok((amps + &p_amps.mapv(|z| z * s)).mapv(|z| z * C64::new(0.5, 0.0)))
            }
            Observable::Dense { matrix, qubits } => {
                // Spectrum check: O² = I within tolerance.
                let sq = matrix.dot(matrix);
                let defect = linalg::fro_norm(&(&sq - &linalg::eye(matrix.nrows())));
                if defect > 1e-7 || linalg::hermiticity_defect(matrix) > 1e-7 {
                    return Err(StateError::BadSpectrum {
                        what: format!("dense observable with O² ≠ I (defect {defect:.2e})"),
                    });
                }
                let s = C64::new(sign as f64 * 0.5, 0.0);
                let mut proj = matrix.mapv(|z| z * s);
                for i in 0..proj.nrows() {
                    proj[(i, i)] += 0.5;
                }
                Ok(apply_local(&proj, qubits, amps, n))
            }
        }
    }

    /// Expectation value of a Pauli observable without collapsing.
    ///
    /// Stabilizer backend returns exactly −1, 0 or +1.
    pub fn expect_pauli(&self, p: &PauliString) -> f64 {
        match &self.repr {
            Repr::Stab(tab) => tab.expect(p) as f64,
            Repr::Vector(amps) => {
                let p_amps = apply_pauli_to_amps(amps, p, self.n);
                let v: C64 = amps
                    .iter()
                    .zip(p_amps.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                v.re
            }
        }
    }

    /// Expectation value of a dense Hermitian operator on a qubit subset.
    /// Statevector backend only.
    pub fn expect_dense(&self, matrix: &CMat, qubits: &[usize]) -> Result<f64, StateError> {
        match &self.repr {
            Repr::Stab(_) => Err(StateError::BackendUnsupported {
                what: "dense expectation on stabilizer backend".into(),
            }),
            Repr::Vector(amps) => {
                let out = apply_local(matrix, qubits, amps, self.n);
                let v: C64 = amps
                    .iter()
                    .zip(out.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                Ok(v.re)
            }
        }
    }

    /// Apply a phased Pauli string as a unitary.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        match &mut self.repr {
            Repr::Stab(tab) => tab.apply_pauli(p),
            Repr::Vector(amps) => {
                *amps = apply_pauli_to_amps(amps, p, self.n);
            }
        }
    }

    /// Apply a single-qubit unitary. Statevector backend only.
    pub fn apply_unitary1(&mut self, qubit: usize, u: &CMat) -> Result<(), StateError> {
        match &mut self.repr {
            Repr::Stab(_) => Err(StateError::BackendUnsupported {
                what: "dense single-qubit unitary on stabilizer backend".into(),
            }),
            Repr::Vector(amps) => {
                *amps = apply_local(u, &[qubit], amps, self.n);
                Ok(())
            }
        }
    }

    /// Dense amplitudes (statevector backend only).
    pub fn amplitudes(&self) -> Option<&CVec> {
        match &self.repr {
            Repr::Vector(a) => Some(a),
            Repr::Stab(_) => None,
        }
    }

    /// |⟨self|other⟩| between two statevector states.
    pub fn fidelity(&self, other: &QuantumState) -> Option<f64> {
        let (a, b) = (self.amplitudes()?, other.amplitudes()?);
        let v: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
        Some(v.norm())
    }

    /// Human-readable dump: stabilizer rows as sign + letter strings, or the
    /// amplitude list.
    pub fn dump(&self) -> String {
        match &self.repr {
            Repr::Stab(tab) => tab.dump(),
            Repr::Vector(amps) => {
                let mut out = String::new();
                for (i, z) in amps.iter().enumerate() {
                    if z.norm_sqr() > 1e-24 {
                        out.push_str(&format!(
                            "|{:0width$b}⟩: {:+.12e} {:+.12e}i\n",
                            i,
                            z.re,
                            z.im,
                            width = self.n
                        ));
                    }
                }
                out
            }
        }
    }

    /// The stabilizer generators as display strings (stabilizer backend).
    pub fn stabilizer_rows(&self) -> Option<Vec<String>> {
        match &self.repr {
            Repr::Stab(tab) => Some(
                (tab.n..2 * tab.n)
                    .map(|i| format!("{:?}", tab.rows[i]))
                    .collect(),
            ),
            Repr::Vector(_) => None,
        }
    }
}

/// Apply a phased Pauli string to raw amplitudes.
fn apply_pauli_to_amps(amps: &CVec, p: &PauliString, n: usize) -> CVec {
    use crate::pauli::Letter;
    let dim = amps.len();
    let mut xmask = 0usize;
    let mut zmask = 0usize; // bits contributing (−1)^bit (Z and Y letters)
    let mut y_count = 0u32;
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        match p.letter(q) {
            Letter::I => {}
            Letter::X => xmask |= bit,
            Letter::Z => zmask |= bit,
            Letter::Y => {
                xmask |= bit;
                zmask |= bit;
                y_count += 1;
            }
        }
    }
    // Y = i·XZ: each Y contributes a global i on top of its X and Z parts,
    // with the Z part acting before the flip (operator convention P|b⟩).
    let global = C64::new(0.0, 1.0).powu(y_count % 4) * phase_c(p.phase());
    let mut out: CVec = Array1::zeros(dim);
    for idx in 0..dim {
        let parity = ((idx & zmask).count_ones() & 1) as i32;
        let f = if parity == 1 { -1.0 } else { 1.0 };
        out[idx ^ xmask] = amps[idx] * global * C64::new(f, 0.0);
    }
    out
}

fn phase_c(phase: u8) -> C64 {
    match phase % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Aaronson–Gottesman tableau with destabilizers.
struct Tableau {
    n: usize,
    /// Rows 0..n are destabilizers, rows n..2n are stabilizers.
    rows: Vec<PauliString>,
}

impl Tableau {
    fn zero_state(n: usize) -> Self {
        use crate::pauli::Letter;
        let mut rows = Vec::with_capacity(2 * n);
        for i in 0..n {
            rows.push(PauliString::from_letters(n, &[(i, Letter::X)]));
        }
        for i in 0..n {
            rows.push(PauliString::from_letters(n, &[(i, Letter::Z)]));
        }
        Tableau { n, rows }
    }

    /// Measure the phased Pauli `p`; draws one boolean iff the outcome is
    /// random.
    fn measure(&mut self, p: &PauliString, rng: &mut ChaCha20Rng) -> i8 {
        let n = self.n;
        let pivot = (n..2 * n).find(|&i| self.rows[i].anticommutes(p));
        match pivot {
            Some(pivot) => {
                // Random outcome: update all other anticommuting rows by the
                // pivot stabilizer, demote the pivot to a destabilizer, and
                // install ±p as the new stabilizer.
                let pivot_row = self.rows[pivot].clone();
                for i in 0..2 * n {
                    if i != pivot && self.rows[i].anticommutes(p) {
                        self.rows[i].mul_assign(&pivot_row);
                    }
                }
                let outcome: i8 = if rng.gen::<bool>() { 1 } else { -1 };
                self.rows[pivot - n] = pivot_row;
                let mut new_row = p.clone();
                if outcome == -1 {
                    new_row.mul_phase(2);
                }
                self.rows[pivot] = new_row;
                outcome
            }
            None => self.deterministic_outcome(p),
        }
    }

    /// Outcome when `p` commutes with every stabilizer: reconstruct ±p as a
    /// product of stabilizer rows selected by destabilizer anticommutation.
    fn deterministic_outcome(&self, p: &PauliString) -> i8 {
        let n = self.n;
        let mut scratch = PauliString::identity(n);
        for i in 0..n {
            if self.rows[i].anticommutes(p) {
                scratch.mul_assign(&self.rows[n + i]);
            }
        }
        debug_assert!(
            {
                let mut t = scratch.clone();
                t.mul_assign(p);
                t.is_empty()
            },
            "deterministic measurement did not reconstruct the observable"
        );
        if scratch.phase() == p.phase() {
            1
        } else {
            -1
        }
    }

    /// Expectation of `p`: 0 if any stabilizer anticommutes, else ±1.
    fn expect(&self, p: &PauliString) -> i8 {
        if (self.n..2 * self.n).any(|i| self.rows[i].anticommutes(p)) {
            0
        } else {
            self.deterministic_outcome(p)
        }
    }

    /// Conjugate the state by the Pauli unitary `q`: each generator
    /// anticommuting with `q` flips sign.
    fn apply_pauli(&mut self, q: &PauliString) {
        for row in &mut self.rows {
            if row.anticommutes(q) {
                row.mul_phase(2);
            }
        }
    }

    fn dump(&self) -> String {
        let mut out = String::from("Destab\n");
        for i in 0..self.n {
            out.push_str(&format!("{:?}\n", self.rows[i]));
        }
        out.push_str("Stab\n");
        for i in self.n..2 * self.n {
            out.push_str(&format!("{:?}\n", self.rows[i]));
        }
        out
    }
}

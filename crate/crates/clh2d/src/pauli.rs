//! Sparse Pauli strings with phase tracking.
//!
//! An *n*-qubit Pauli string is encoded by two bit vectors `x`, `z` (the
//! string acts as `X` on qubit `q` when only `x` is set, `Z` when only `z`,
//! `Y` when both) plus a global phase `i^phase`. The symplectic form
//!
//! ```text
//! ⟨P, Q⟩ = Σ_q (x_P·z_Q + z_P·x_Q)  mod 2
//! ```
//!
//! is 1 exactly when `P` and `Q` anticommute, which is all the stabilizer
//! backend ever needs. Products track the phase exponent mod 4 so signed
//! stabilizer generators (`±P`) come out exactly.

use crate::linalg::{kron, pauli_i, pauli_x, pauli_y, pauli_z, CMat, C64};
use std::fmt;

const BLOCK: usize = 64;

/// A phased Pauli string on `n` qubits: `i^phase · P_0 ⊗ … ⊗ P_{n−1}`.
#[derive(Clone, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    /// Phase exponent mod 4 (the operator carries a factor `i^phase`).
    phase: u8,
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    /// Dense `2 × 2` matrix of the letter.
    pub fn matrix(self) -> CMat {
        match self {
            Letter::I => pauli_i(),
            Letter::X => pauli_x(),
            Letter::Y => pauli_y(),
            Letter::Z => pauli_z(),
        }
    }
}

impl PauliString {
    /// The identity string on `n` qubits.
    pub fn identity(n: usize) -> Self {
        let blocks = n.div_ceil(BLOCK);
        PauliString {
            n,
            x: vec![0; blocks],
            z: vec![0; blocks],
            phase: 0,
        }
    }

    /// Number of qubits.
    pub fn len(&self) -> usize {
        self.n
    }

    /// True when the string is the identity on every qubit (phase ignored).
    pub fn is_empty(&self) -> bool {
        self.x.iter().all(|&b| b == 0) && self.z.iter().all(|&b| b == 0)
    }

    /// Phase exponent mod 4.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Real sign of the string, assuming the phase is ±1.
    ///
    /// Panics if the phase is ±i — a Hermitian Pauli string at rest always
    /// carries an even exponent, so an odd exponent signals a logic error.
    pub fn sign(&self) -> i8 {
        match self.phase {
            0 => 1,
            2 => -1,
            _ => panic!("pauli string with imaginary phase i^{}", self.phase),
        }
    }

    /// Multiply the global phase by `i^k`.
    pub fn mul_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) % 4;
    }

    /// The letter on qubit `q`.
    pub fn letter(&self, q: usize) -> Letter {
        let (blk, bit) = (q / BLOCK, q % BLOCK);
        let xb = (self.x[blk] >> bit) & 1;
        let zb = (self.z[blk] >> bit) & 1;
        match (xb, zb) {
            (0, 0) => Letter::I,
            (1, 0) => Letter::X,
            (1, 1) => Letter::Y,
            (0, 1) => Letter::Z,
            _ => unreachable!(),
        }
    }

    /// Overwrite the letter on qubit `q`.
    pub fn set_letter(&mut self, q: usize, l: Letter) {
        let (blk, bit) = (q / BLOCK, q % BLOCK);
        let (xb, zb) = match l {
            Letter::I => (0u64, 0u64),
            Letter::X => (1, 0),
            Letter::Y => (1, 1),
            Letter::Z => (0, 1),
        };
        self.x[blk] = (self.x[blk] & !(1 << bit)) | (xb << bit);
        self.z[blk] = (self.z[blk] & !(1 << bit)) | (zb << bit);
    }

    /// Build a string from `(qubit, letter)` pairs on `n` qubits.
    pub fn from_letters(n: usize, letters: &[(usize, Letter)]) -> Self {
        let mut p = Self::identity(n);
        for &(q, l) in letters {
            p.set_letter(q, l);
        }
        p
    }

    /// The set of qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.letter(q) != Letter::I)
            .collect()
    }

    /// True when `self` and `other` anticommute (symplectic form = 1).
    pub fn anticommutes(&self, other: &PauliString) -> bool {
        assert_eq!(self.n, other.n);
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= (self.x[i] & other.z[i]).count_ones() & 1;
            acc ^= (self.z[i] & other.x[i]).count_ones() & 1;
        }
        acc & 1 == 1
    }

    /// In-place product `self ← self · other`, with exact phase tracking.
    pub fn mul_assign(&mut self, other: &PauliString) {
        assert_eq!(self.n, other.n);
        // Per-qubit phase contribution of P·Q written as i^g in terms of the
        // (x, z) bits; accumulate over qubits, then fold in both phases.
        let mut g: i32 = 0;
        for q in 0..self.n {
            let (blk, bit) = (q / BLOCK, q % BLOCK);
            let x1 = ((self.x[blk] >> bit) & 1) as i32;
            let z1 = ((self.z[blk] >> bit) & 1) as i32;
            let x2 = ((other.x[blk] >> bit) & 1) as i32;
            let z2 = ((other.z[blk] >> bit) & 1) as i32;
            g += phase_g(x1, z1, x2, z2);
        }
        self.phase = ((self.phase as i32 + other.phase as i32 + g).rem_euclid(4)) as u8;
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
    }

    /// Dense matrix of the string (phase included); only sensible for small
    /// `n`.
    pub fn to_matrix(&self) -> CMat {
        let mut m = ndarray::Array2::eye(1);
        for q in 0..self.n {
            m = kron(&m, &self.letter(q).matrix());
        }
        let ph = match self.phase {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            3 => C64::new(0.0, -1.0),
            _ => unreachable!(),
        };
        m.mapv(|v| v * ph)
    }

    /// Restriction of the string to the listed qubits (in the given order),
    /// dropping the phase. Useful for computing overlaps with local terms.
    pub fn restrict(&self, qubits: &[usize]) -> Vec<Letter> {
        qubits.iter().map(|&q| self.letter(q)).collect()
    }
}

/// Phase exponent `g` such that `P₁·P₂ = i^g · P₃` per qubit, where `P₃` has
/// bits `(x1⊕x2, z1⊕z2)` (Aaronson–Gottesman rowsum convention).
fn phase_g(x1: i32, z1: i32, x2: i32, z2: i32) -> i32 {
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,             // Y·Q
        (1, 0) => z2 * (2 * x2 - 1),   // X·Q
        (0, 1) => x2 * (1 - 2 * z2),   // Z·Q
        _ => unreachable!(),
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            3 => "-i",
            _ => unreachable!(),
        };
        write!(f, "{} ", sign)?;
        for q in 0..self.n {
            let c = match self.letter(q) {
                Letter::I => '.',
                Letter::X => 'X',
                Letter::Y => 'Y',
                Letter::Z => 'Z',
            };
            write!(f, "{}", c)?;
        }
        Ok(())
    }
}

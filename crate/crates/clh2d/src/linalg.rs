//! Dense complex linear algebra helpers shared across the crate.
//!
//! Everything here works on `ndarray::Array2<Complex64>` matrices. Local
//! Hamiltonian terms live on at most a handful of qubits, so the matrices are
//! small (dimension `2^k` with `k ≤ 8` or so); the only large matrices are
//! the joint-support embeddings used for pairwise commutation checks and the
//! full-Hamiltonian builds used by the dense eigensolver at desk scale.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use rand::Rng;

/// Shorthand for the scalar type used throughout.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMat = Array2<Complex64>;
/// Dense complex vector.
pub type CVec = Array1<Complex64>;

/// `2 × 2` identity matrix.
pub fn eye(dim: usize) -> CMat {
    Array2::eye(dim)
}

/// Complex scalar from a real value.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The four Pauli matrices.
pub fn pauli_i() -> CMat {
    eye(2)
}

pub fn pauli_x() -> CMat {
    ndarray::array![[re(0.0), re(1.0)], [re(1.0), re(0.0)]]
}

pub fn pauli_y() -> CMat {
    ndarray::array![
        [re(0.0), C64::new(0.0, -1.0)],
        [C64::new(0.0, 1.0), re(0.0)]
    ]
}

pub fn pauli_z() -> CMat {
    ndarray::array![[re(1.0), re(0.0)], [re(0.0), re(-1.0)]]
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

/// Kronecker product `a ⊗ b` (row-major convention: the left factor indexes
/// the slow axis, matching the "first listed qubit is most significant"
/// ordering used for term matrices).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    ndarray::linalg::kron(a, b)
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(mats: &[CMat]) -> CMat {
    let mut out = eye(1);
    for m in mats {
        out = kron(&out, m);
    }
    out
}

/// Frobenius norm `‖M‖_F = √Σ|m_ij|²`.
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert–Schmidt inner product `⟨A, B⟩ = tr(A† B) = Σ conj(a_ij)·b_ij`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Conjugated vector dot product `⟨a, b⟩ = Σ conj(a_i)·b_i`.
pub fn vdot(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex vector.
pub fn vnorm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Commutator `[A, B] = AB − BA`.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// Anticommutator `{A, B} = AB + BA`.
pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) + b.dot(a)
}

/// Deviation from Hermiticity, `‖M − M†‖_F`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    fro_norm(&(m - &dagger(m)))
}

/// Deviation from unitarity, `‖U†U − I‖_F`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    fro_norm(&(dagger(u).dot(u) - eye(u.nrows())))
}

/// Trace of a matrix.
pub fn trace(m: &CMat) -> C64 {
    m.diag().sum()
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, eigenvalues
/// ascending; column `j` of the returned matrix is the eigenvector for the
/// `j`-th eigenvalue.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    // The backing LAPACK call sees the row-major buffer as its transpose
    // and therefore diagonalizes conj(M); conjugating the output restores
    // the column-eigenvector convention (verified by the unit test on Y).
    let standard = m.as_standard_layout().into_owned();
    let (vals, vecs) = standard
        .eigh(UPLO::Lower)
        .expect("hermitian eigendecomposition failed");
    (vals.to_vec(), vecs.mapv(|z| z.conj()))
}

/// Operator (spectral) norm of a Hermitian matrix: max |eigenvalue|.
pub fn hermitian_op_norm(m: &CMat) -> f64 {
    let (vals, _) = eigh(m);
    vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Projector onto the eigenspace(s) of a Hermitian matrix whose eigenvalues
/// lie within `tol` of the minimum (the "ground space" of the term).
pub fn ground_projector(m: &CMat, tol: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let dim = m.nrows();
    let mut proj = Array2::zeros((dim, dim));
    for (j, &v) in vals.iter().enumerate() {
        if v - min <= tol {
            let col = vecs.column(j);
            for r in 0..dim {
                for c in 0..dim {
                    proj[(r, c)] += col[r] * col[c].conj();
                }
            }
        }
    }
    proj
}

/// Embed an operator acting on a subset of qubits into a larger qubit
/// register.
///
/// `positions[i]` is the index (within `0..n_total`) that the `i`-th qubit of
/// `local` occupies in the target register. Qubit 0 of the register is the
/// most significant bit of the row/column index, matching [`kron_all`].
pub fn embed(local: &CMat, positions: &[usize], n_total: usize) -> CMat {
    let k = positions.len();
    assert_eq!(local.nrows(), 1 << k, "operator dimension mismatch");
    let dim = 1usize << n_total;
    let mut out: CMat = Array2::zeros((dim, dim));
    // Iterate over the 2^(n-k) configurations of the untouched qubits and
    // scatter the local matrix into each diagonal block.
    let free: Vec<usize> = (0..n_total).filter(|q| !positions.contains(q)).collect();
    let n_free = free.len();
    for f in 0..(1usize << n_free) {
        let mut base = 0usize;
        for (i, &q) in free.iter().enumerate() {
            if (f >> (n_free - 1 - i)) & 1 == 1 {
                base |= 1 << (n_total - 1 - q);
            }
        }
        for a in 0..(1usize << k) {
            let mut row = base;
            for (i, &q) in positions.iter().enumerate() {
                if (a >> (k - 1 - i)) & 1 == 1 {
                    row |= 1 << (n_total - 1 - q);
                }
            }
            for b in 0..(1usize << k) {
                let v = local[(a, b)];
                if v != re(0.0) {
                    let mut col = base;
                    for (i, &q) in positions.iter().enumerate() {
                        if (b >> (k - 1 - i)) & 1 == 1 {
                            col |= 1 << (n_total - 1 - q);
                        }
                    }
                    out[(row, col)] += v;
                }
            }
        }
    }
    out
}

/// Apply an operator on `positions` to a state vector over `n_total` qubits,
/// without materializing the embedded matrix. Qubit 0 is the most significant
/// bit of the amplitude index.
pub fn apply_local(local: &CMat, positions: &[usize], state: &CVec, n_total: usize) -> CVec {
    let k = positions.len();
    assert_eq!(local.nrows(), 1 << k, "operator dimension mismatch");
    let dim = 1usize << n_total;
    assert_eq!(state.len(), dim, "state dimension mismatch");
    let masks: Vec<usize> = positions.iter().map(|&q| 1 << (n_total - 1 - q)).collect();
    let free_bits: Vec<usize> = (0..n_total)
        .filter(|q| !positions.contains(q))
        .map(|q| 1 << (n_total - 1 - q))
        .collect();
    let n_free = free_bits.len();
    let mut out: CVec = Array1::zeros(dim);
    let block = 1usize << k;
    let mut idxs = vec![0usize; block];
    let mut amps = vec![re(0.0); block];
    for f in 0..(1usize << n_free) {
        let mut base = 0usize;
        for (i, &bit) in free_bits.iter().enumerate() {
            if (f >> i) & 1 == 1 {
                base |= bit;
            }
        }
        for b in 0..block {
            let mut idx = base;
            for (i, &bit) in masks.iter().enumerate() {
                if (b >> (k - 1 - i)) & 1 == 1 {
                    idx |= bit;
                }
            }
            idxs[b] = idx;
            amps[b] = state[idx];
        }
        for a in 0..block {
            let mut acc = re(0.0);
            for b in 0..block {
                acc += local[(a, b)] * amps[b];
            }
            out[idxs[a]] = acc;
        }
    }
    out
}

/// Gram–Schmidt over matrices with the Hilbert–Schmidt inner product.
///
/// Returns an orthonormal basis of the span of `mats`; vectors whose residual
/// norm falls below `tol` are dropped (rank cut).
pub fn gram_schmidt(mats: &[CMat], tol: f64) -> Vec<CMat> {
    let mut basis: Vec<CMat> = Vec::new();
    for m in mats {
        let mut v = m.clone();
        for b in &basis {
            let coeff = hs_inner(b, &v);
            v = v - b.mapv(|z| z * coeff);
        }
        let n = fro_norm(&v);
        if n > tol {
            basis.push(v.mapv(|z| z / re(n)));
        }
    }
    basis
}

/// Distance from `m` to the span of an orthonormal basis (Hilbert–Schmidt).
pub fn span_residual(basis: &[CMat], m: &CMat) -> f64 {
    let mut v = m.clone();
    for b in basis {
        let coeff = hs_inner(b, &v);
        v = v - b.mapv(|z| z * coeff);
    }
    fro_norm(&v)
}

/// A random complex unit vector with Gaussian-distributed entries.
pub fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> CVec {
    let mut v: CVec = Array1::zeros(dim);
    for z in v.iter_mut() {
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        *z = C64::new(
            r * (2.0 * std::f64::consts::PI * u2).cos(),
            r * (2.0 * std::f64::consts::PI * u2).sin(),
        );
    }
    let n = vnorm(&v);
    v.mapv(|z| z / re(n))
}

/// Haar-random single-qubit unitary drawn from the given generator.
///
/// Sampled by QR-free Ginibre normalization: two complex Gaussian columns,
/// orthonormalized.
pub fn haar_unitary_2x2<R: Rng>(rng: &mut R) -> CMat {
    let mut g = || {
        // Box–Muller.
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        C64::new(
            r * (2.0 * std::f64::consts::PI * u2).cos(),
            r * (2.0 * std::f64::consts::PI * u2).sin(),
        )
    };
    let a = g();
    let b = g();
    let n1 = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n1, b / n1);
    // Second column orthogonal to (a, b): (−b̄, ā), randomized by a phase.
    let u: f64 = rng.gen();
    let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * u);
    ndarray::array![[a, -b.conj() * phase], [b, a.conj() * phase]]
}

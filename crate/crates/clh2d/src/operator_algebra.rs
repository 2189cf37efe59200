//! Induced operator algebras of local terms.
//!
//! The central object is the algebra a term `h` *induces* on a subset of its
//! qubits: write `h = Σ_i h^i_left ⊗ h^i_right` with linearly independent
//! factor families (an operator Schmidt decomposition across the subset and
//! its complement); the induced algebra on the left subset is the unital
//! *-algebra generated by the left factors. The span does not depend on the
//! chosen decomposition, which makes it a well-defined invariant of the term.
//!
//! On a single qubit the classification is rigid: the algebra is either
//! scalars (`Trivial`), the span of the identity and one traceless Hermitian
//! unitary (`PauliLine`, generator unique up to sign), or all of `M₂`
//! (`Full`). Pairs of anticommuting single-qubit operators admit exactly two
//! normal forms — both traceless (`Regular`, conjugate to `Z`, `X`) or a
//! pair of complementary projectors (`Irregular`, conjugate to `I±Z`) — and
//! the calibration routine uses these to rotate every qubit of an instance
//! into the canonical frame where star lines read `Z` and plaquette lines
//! read `X`.

use crate::clh_instance::{CLHInstance, LocalTerm};
use crate::linalg::{self, CMat, C64};
use crate::surface_complex::Edge;
use ndarray::Array2;
use ndarray_linalg::SVD;
use thiserror::Error;

/// Relative singular-value / rank cut used throughout the algebra machinery.
pub const RANK_TOL: f64 = 1e-8;

/// Errors from algebra classification and calibration.
#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("algebra closure produced dimension 3 on a single qubit (numerical failure)")]
    DimThree,
    #[error("operators do not anticommute (residual {residual:.3e})")]
    NotAnticommuting { residual: f64 },
    #[error("operator is zero or numerically negligible")]
    ZeroOperator,
    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("calibration conflict at edge {edge}: {reason}")]
    CalibrationConflict { edge: String, reason: String },
}

/// An operator Schmidt decomposition of a term across a qubit bipartition.
///
/// `term ≅ Σ_i σ_i · left_i ⊗ right_i` after permuting the term's qubits to
/// the order `left_qubits ++ right_qubits`; both factor families are
/// orthonormal under the Hilbert–Schmidt inner product.
#[derive(Clone, Debug)]
pub struct OperatorSchmidt {
    pub left_qubits: Vec<usize>,
    pub right_qubits: Vec<usize>,
    pub factors: Vec<(f64, CMat, CMat)>,
}

impl OperatorSchmidt {
    /// Schmidt rank after the singular-value cut.
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Rebuild the (qubit-permuted) term from the factors.
    pub fn reconstruct(&self) -> CMat {
        let da = 1usize << self.left_qubits.len();
        let db = 1usize << self.right_qubits.len();
        let mut m: CMat = Array2::zeros((da * db, da * db));
        for (sigma, a, b) in &self.factors {
            m = m + linalg::kron(a, b).mapv(|z| z * linalg::re(*sigma));
        }
        m
    }
}

/// An induced algebra: an orthonormal (Hilbert–Schmidt) basis of a unital
/// *-algebra on `qubits.len()` qubits. `basis[0]` is always the normalized
/// identity and every later element is traceless.
#[derive(Clone, Debug)]
pub struct OperatorAlgebra {
    /// Positions within the term the algebra was computed from.
    pub qubits: Vec<usize>,
    pub basis: Vec<CMat>,
}

impl OperatorAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Hilbert–Schmidt distance from `m` to the span of the algebra.
    pub fn residual(&self, m: &CMat) -> f64 {
        linalg::span_residual(&self.basis, m)
    }
}

/// Single-qubit classification of an induced algebra.
#[derive(Clone, Debug)]
pub enum Classification {
    Trivial,
    /// Generator: traceless, Hermitian, unitary; sign fixed so the first
    /// entry of nonzero modulus has positive real part (positive imaginary
    /// part when the real part vanishes).
    PauliLine(CMat),
    Full,
}

impl Classification {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Classification::Trivial)
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Classification::Full)
    }

    pub fn line_generator(&self) -> Option<&CMat> {
        match self {
            Classification::PauliLine(p) => Some(p),
            _ => None,
        }
    }
}

/// Permute the qubits of a `k`-qubit operator so that position `perm[t]` of
/// the input becomes position `t` of the output.
pub fn permute_qubits(m: &CMat, k: usize, perm: &[usize]) -> CMat {
    assert_eq!(perm.len(), k);
    let dim = 1usize << k;
    let map = |idx: usize| -> usize {
        let mut orig = 0usize;
        for (t, &p) in perm.iter().enumerate() {
            if (idx >> (k - 1 - t)) & 1 == 1 {
                orig |= 1 << (k - 1 - p);
            }
        }
        orig
    };
    let mut out: CMat = Array2::zeros((dim, dim));
    for i in 0..dim {
        let oi = map(i);
        for j in 0..dim {
            out[(i, j)] = m[(oi, map(j))];
        }
    }
    out
}

/// Operator Schmidt decomposition of a `k`-qubit matrix across the
/// bipartition `left_positions` | rest.
///
/// Factors with singular value below [`RANK_TOL`] × σ_max are dropped.
pub fn operator_schmidt_matrix(m: &CMat, k: usize, left_positions: &[usize]) -> OperatorSchmidt {
    let right_positions: Vec<usize> = (0..k).filter(|q| !left_positions.contains(q)).collect();
    let perm: Vec<usize> = left_positions
        .iter()
        .chain(right_positions.iter())
        .cloned()
        .collect();
    let mp = permute_qubits(m, k, &perm);
    let da = 1usize << left_positions.len();
    let db = 1usize << right_positions.len();
    // Reshuffle: R[(a,a'), (b,b')] = M[(a,b), (a',b')].
    let mut r: CMat = Array2::zeros((da * da, db * db));
    for a in 0..da {
        for ap in 0..da {
            for b in 0..db {
                for bp in 0..db {
                    r[(a * da + ap, b * db + bp)] = mp[(a * db + b, ap * db + bp)];
                }
            }
        }
    }
    let (u, s, vt) = r.svd(true, true).expect("SVD failed");
    let (u, vt) = (u.unwrap(), vt.unwrap());
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    let mut factors = Vec::new();
    for (i, &sigma) in s.iter().enumerate() {
        if sigma <= RANK_TOL * smax.max(1.0) {
            continue;
        }
        let mut left: CMat = Array2::zeros((da, da));
        for a in 0..da {
            for ap in 0..da {
                left[(a, ap)] = u[(a * da + ap, i)];
            }
        }
        let mut right: CMat = Array2::zeros((db, db));
        for b in 0..db {
            for bp in 0..db {
                right[(b, bp)] = vt[(i, b * db + bp)];
            }
        }
        factors.push((sigma, left, right));
    }
    OperatorSchmidt {
        left_qubits: left_positions.to_vec(),
        right_qubits: right_positions,
        factors,
    }
}

/// Operator Schmidt decomposition of a term across `left_edges` | rest.
pub fn operator_schmidt(term: &LocalTerm, left_edges: &[Edge]) -> OperatorSchmidt {
    let left_positions: Vec<usize> = left_edges
        .iter()
        .map(|e| {
            term.qubits
                .iter()
                .position(|q| q == e)
                .expect("edge not in term support")
        })
        .collect();
    operator_schmidt_matrix(&term.matrix, term.arity(), &left_positions)
}

/// The unital *-algebra generated by the left Schmidt factors of `m` on
/// `left_positions`: span of identity and factors, closed under adjoints and
/// products by fixed-point iteration.
pub fn induced_algebra_matrix(m: &CMat, k: usize, left_positions: &[usize]) -> OperatorAlgebra {
    let schmidt = operator_schmidt_matrix(m, k, left_positions);
    let da = 1usize << left_positions.len();
    let mut gens: Vec<CMat> = vec![linalg::eye(da)];
    for (_, left, _) in &schmidt.factors {
        gens.push(left.clone());
        gens.push(linalg::dagger(left));
    }
    let mut basis = linalg::gram_schmidt(&gens, RANK_TOL);
    let full_dim = da * da;
    for _ in 0..full_dim {
        if basis.len() == full_dim {
            break;
        }
        let mut extended = basis.clone();
        for a in &basis {
            for b in &basis {
                extended.push(a.dot(b));
            }
        }
        let new_basis = linalg::gram_schmidt(&extended, RANK_TOL);
        let grown = new_basis.len() > basis.len();
        basis = new_basis;
        if !grown {
            break;
        }
    }
    OperatorAlgebra {
        qubits: left_positions.to_vec(),
        basis,
    }
}

/// Induced algebra of a term on a subset of its edges.
pub fn induced_algebra(term: &LocalTerm, edges: &[Edge]) -> OperatorAlgebra {
    let left_positions: Vec<usize> = edges
        .iter()
        .map(|e| {
            term.qubits
                .iter()
                .position(|q| q == e)
                .expect("edge not in term support")
        })
        .collect();
    induced_algebra_matrix(&term.matrix, term.arity(), &left_positions)
}

/// Canonical ± sign for a traceless Hermitian unitary: first entry of
/// nonzero modulus (row-major) gets positive real part, or positive
/// imaginary part when its real part vanishes.
fn fix_generator_sign(p: &mut CMat) {
    for idx in 0..p.len() {
        let (r, c) = (idx / p.ncols(), idx % p.ncols());
        let z = p[(r, c)];
        if z.norm() > 1e-9 {
            let flip = if z.re.abs() > 1e-9 {
                z.re < 0.0
            } else {
                z.im < 0.0
            };
            if flip {
                *p = p.mapv(|w| -w);
            }
            return;
        }
    }
}

/// Classify a single-qubit induced algebra.
pub fn classify_qubit_algebra(algebra: &OperatorAlgebra) -> Result<Classification, AlgebraError> {
    if algebra.qubits.len() != 1 {
        return Err(AlgebraError::ZeroOperator);
    }
    match algebra.dim() {
        1 => Ok(Classification::Trivial),
        2 => {
            // basis[1] is traceless (orthogonal to identity); extract the
            // Hermitian direction without an eigensolver: Hermitize, fall
            // back to the anti-Hermitian part, normalize to unitary.
            let b = &algebra.basis[1];
            let herm = (b + &linalg::dagger(b)).mapv(|z| z * linalg::re(0.5));
            let cand = if linalg::fro_norm(&herm) > 1e-8 {
                herm
            } else {
                (b - &linalg::dagger(b)).mapv(|z| z * C64::new(0.0, -0.5))
            };
            let norm = linalg::fro_norm(&cand);
            if norm < 1e-9 {
                return Err(AlgebraError::ZeroOperator);
            }
            // Traceless Hermitian 2×2 has eigenvalues ±λ with ‖·‖_F = λ√2.
            let lambda = norm / std::f64::consts::SQRT_2;
            let mut p = cand.mapv(|z| z / linalg::re(lambda));
            fix_generator_sign(&mut p);
            Ok(Classification::PauliLine(p))
        }
        4 => Ok(Classification::Full),
        3 => Err(AlgebraError::DimThree),
        _ => Err(AlgebraError::ZeroOperator),
    }
}

/// Convenience: classification of the algebra a term induces on one edge.
pub fn classify_on_edge(term: &LocalTerm, edge: Edge) -> Result<Classification, AlgebraError> {
    if !term.acts_on(edge) {
        return Ok(Classification::Trivial);
    }
    classify_qubit_algebra(&induced_algebra(term, &[edge]))
}

/// Normal form of an anticommuting pair of single-qubit Hermitian operators.
#[derive(Clone, Debug)]
pub enum NormalForm {
    /// Both operators traceless: `U†CU = λ_C·Z`, `U†DU = λ_D·X`.
    Regular { u: CMat },
    /// Complementary projectors: `U†CU ∝ I+Z`, `U†DU ∝ I−Z`.
    Irregular { u: CMat },
}

impl NormalForm {
    pub fn unitary(&self) -> &CMat {
        match self {
            NormalForm::Regular { u } | NormalForm::Irregular { u } => u,
        }
    }
}

/// Phase-fix the columns of a unitary: each column's largest-modulus entry
/// becomes positive real.
fn fix_column_phases(u: &mut CMat) {
    for c in 0..u.ncols() {
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for r in 0..u.nrows() {
            let n = u[(r, c)].norm();
            if n > best_norm {
                best_norm = n;
                best = r;
            }
        }
        let z = u[(best, c)];
        if z.norm() > 1e-15 {
            let phase = z.conj() / linalg::re(z.norm());
            for r in 0..u.nrows() {
                u[(r, c)] *= phase;
            }
        }
    }
}

/// Compute the normal form of nonzero Hermitian `c`, `d` with `{c,d} = 0`.
pub fn anticommute_normal_form(c: &CMat, d: &CMat, tol: f64) -> Result<NormalForm, AlgebraError> {
    for m in [c, d] {
        let defect = linalg::hermiticity_defect(m);
        if defect > tol {
            return Err(AlgebraError::NotHermitian { defect });
        }
        if linalg::fro_norm(m) < tol {
            return Err(AlgebraError::ZeroOperator);
        }
    }
    let residual = linalg::fro_norm(&linalg::anticommutator(c, d));
    if residual > tol.max(1e-12) * 10.0 {
        return Err(AlgebraError::NotAnticommuting { residual });
    }

    let trace_c = linalg::trace(c).re;
    if trace_c.abs() < 1e-8 * linalg::fro_norm(c) {
        // Regular: diagonalize c with the +λ eigenvector first, then absorb
        // the off-diagonal phase of d into the second column so d reads
        // λ_D·X in the new frame.
        let (_, vecs) = linalg::eigh(c);
        // eigh sorts ascending: column 1 is the +λ eigenvector.
        let mut v: CMat = Array2::zeros((2, 2));
        for r in 0..2 {
            v[(r, 0)] = vecs[(r, 1)];
            v[(r, 1)] = vecs[(r, 0)];
        }
        fix_column_phases(&mut v);
        let dv = linalg::dagger(&v).dot(d).dot(&v);
        let w = dv[(1, 0)];
        if w.norm() < 1e-12 {
            return Err(AlgebraError::NotAnticommuting { residual: 0.0 });
        }
        let phase = w / linalg::re(w.norm());
        let mut u = v;
        for r in 0..2 {
            u[(r, 1)] *= phase;
        }
        Ok(NormalForm::Regular { u })
    } else {
        // Irregular: c is proportional to a rank-1 projector; its range
        // eigenvector goes first so c ∝ I+Z and d ∝ I−Z.
        let (vals, vecs) = linalg::eigh(c);
        let big = if vals[1].abs() >= vals[0].abs() { 1 } else { 0 };
        let mut u: CMat = Array2::zeros((2, 2));
        for r in 0..2 {
            u[(r, 0)] = vecs[(r, big)];
            u[(r, 1)] = vecs[(r, 1 - big)];
        }
        fix_column_phases(&mut u);
        Ok(NormalForm::Irregular { u })
    }
}

/// Per-qubit calibration unitaries: conjugating every term by `⊗ W_q` (as in
/// a rotation) puts star line generators on `Z` and plaquette line
/// generators into span{Z, X} with positive X part (exactly `X` at interior
/// qubits).
#[derive(Clone, Debug)]
pub struct QubitCalibration {
    /// One 2×2 unitary per edge, indexed by edge id.
    pub unitaries: Vec<CMat>,
}

/// Collect the (sign-canonical) line generators the star and plaquette terms
/// induce on an edge. Errors on conflicting lines within one side.
fn edge_lines(
    instance: &CLHInstance,
    e: Edge,
) -> Result<(Option<CMat>, Option<CMat>, bool), AlgebraError> {
    let complex = &instance.complex;
    let mut star_line: Option<CMat> = None;
    let mut plaq_line: Option<CMat> = None;
    let mut any_full = false;
    let mut absorb = |slot: &mut Option<CMat>, class: Classification| -> Result<(), AlgebraError> {
        match class {
            Classification::Trivial => Ok(()),
            Classification::Full => {
                any_full = true;
                Ok(())
            }
            Classification::PauliLine(p) => {
                if let Some(prev) = slot {
                    if linalg::fro_norm(&(&p - &*prev)) > 1e-6 {
                        return Err(AlgebraError::CalibrationConflict {
                            edge: complex.edge_name(e).to_string(),
                            reason: "two distinct line generators on one side".into(),
                        });
                    }
                } else {
                    *slot = Some(p);
                }
                Ok(())
            }
        }
    };
    for v in complex.endpoints(e) {
        let class = classify_on_edge(instance.term_for_vertex(v), e)?;
        absorb(&mut star_line, class)?;
    }
    for f in complex.faces_of_edge(e) {
        let class = classify_on_edge(instance.term_for_face(f), e)?;
        absorb(&mut plaq_line, class)?;
    }
    Ok((star_line, plaq_line, any_full))
}

/// Compute the calibration for an instance (classical qubits should already
/// have been removed).
pub fn calibrate(instance: &CLHInstance) -> Result<QubitCalibration, AlgebraError> {
    let complex = &instance.complex;
    let mut unitaries = Vec::with_capacity(complex.n_edges());
    for e in complex.edges() {
        let (star_line, plaq_line, _) = edge_lines(instance, e)?;
        let w = match (star_line, plaq_line) {
            (None, None) => linalg::eye(2),
            (Some(a), None) => linalg::dagger(&diagonalizing_unitary(&a)),
            (None, Some(b)) => {
                // Map b to X: rotate b onto Z, then swap the Z and X axes
                // with a Hadamard.
                let h = hadamard();
                linalg::dagger(&diagonalizing_unitary(&b).dot(&h))
            }
            (Some(a), Some(b)) => {
                let v = diagonalizing_unitary(&a);
                let bv = linalg::dagger(&v).dot(&b).dot(&v);
                let w = bv[(1, 0)];
                if w.norm() < 1e-7 {
                    return Err(AlgebraError::CalibrationConflict {
                        edge: complex.edge_name(e).to_string(),
                        reason: format!(
                            "star and plaquette lines commute (X part {:.2e}); qubit is classical",
                            w.norm()
                        ),
                    });
                }
                let phase = w / linalg::re(w.norm());
                let mut u = v;
                for r in 0..2 {
                    u[(r, 1)] *= phase;
                }
                linalg::dagger(&u)
            }
        };
        unitaries.push(w);
    }
    Ok(QubitCalibration { unitaries })
}

/// Unitary whose columns are the ∓ eigenvectors of a traceless Hermitian
/// unitary `a`, + eigenvector first, column phases canonical: `V†aV = Z`.
fn diagonalizing_unitary(a: &CMat) -> CMat {
    let (_, vecs) = linalg::eigh(a);
    let mut v: CMat = Array2::zeros((2, 2));
    for r in 0..2 {
        v[(r, 0)] = vecs[(r, 1)];
        v[(r, 1)] = vecs[(r, 0)];
    }
    fix_column_phases(&mut v);
    v
}

/// The Hadamard matrix.
pub fn hadamard() -> CMat {
    let s = linalg::re(std::f64::consts::FRAC_1_SQRT_2);
    ndarray::array![[s, s], [s, -s]]
}

/// Outcome of comparing a two-qubit induced algebra against the canonical
/// lines.
#[derive(Clone, Debug)]
pub enum TwoQubitStructure {
    ZZ,
    XX,
    Other(Vec<CMat>),
}

/// Classify the algebra `term` induces on an adjacent pair of its qubits
/// (calibrated instances: star pairs give `ZZ`, plaquette pairs `XX`).
pub fn two_qubit_structure(term: &LocalTerm, q1: Edge, q2: Edge) -> TwoQubitStructure {
    let alg = induced_algebra(term, &[q1, q2]);
    let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z());
    let xx = linalg::kron(&linalg::pauli_x(), &linalg::pauli_x());
    if alg.dim() == 2 {
        if alg.residual(&zz) < 1e-6 {
            return TwoQubitStructure::ZZ;
        }
        if alg.residual(&xx) < 1e-6 {
            return TwoQubitStructure::XX;
        }
    }
    TwoQubitStructure::Other(alg.basis)
}

/// Largest Hilbert–Schmidt distance between the spans of two orthonormal
/// families, in either direction.
pub fn span_distance(a: &[CMat], b: &[CMat]) -> f64 {
    let mut max = 0.0f64;
    for m in a {
        max = max.max(linalg::span_residual(b, m));
    }
    for m in b {
        max = max.max(linalg::span_residual(a, m));
    }
    max
}

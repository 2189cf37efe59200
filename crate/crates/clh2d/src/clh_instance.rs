//! Commuting local Hamiltonian instances on a surface complex.
//!
//! An instance attaches one Hermitian term to every vertex (a *star* term on
//! the edges meeting that vertex) and one to every face (a *plaquette* term
//! on the boundary edges of that face). Attachment validates the defining
//! constraints:
//!
//! * every term is Hermitian and has operator norm at most 1 (a small
//!   overshoot up to `1 + 1e−6` is tolerated with a warning, since rotated
//!   instances accumulate float error),
//! * the qubit set of each term equals the star / boundary of its site,
//! * every pair of terms commutes, checked as a Frobenius-norm residual of
//!   the commutator on the joint support.
//!
//! The Hamiltonian is `H = Σ_s h_s + Σ_p h_p` with the sign convention that
//! the canonical rotation-code terms are `−Z^{⊗deg}` and `−X^{⊗len}`, i.e.
//! any minus sign is folded into the term matrix itself.
//!
//! Ground energies are computed exactly: dense Hermitian diagonalization up
//! to [`DENSE_CAP`] qubits, matrix-free Lanczos with full reorthogonalization
//! up to [`LANCZOS_CAP`]. Commuting Hamiltonians have few distinct
//! eigenvalues, so the Krylov space closes after a few dozen iterations and
//! the Lanczos path is both fast and accurate at desk scale.

use crate::linalg::{self, CMat, CVec};
use crate::pauli::{Letter, PauliString};
use crate::rng::stream;
use crate::state_engine::{QuantumState, StateError};
use crate::surface_complex::{Edge, Face, SurfaceComplex, Vertex};
use ndarray::Array2;
use rand::Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest register diagonalized densely.
pub const DENSE_CAP: usize = 10;
/// Largest register handled by the matrix-free Lanczos ground solver.
pub const LANCZOS_CAP: usize = 20;
/// Default Frobenius tolerance for commutation and Hermiticity checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Operator-norm overshoot tolerated with a warning.
pub const NORM_SLACK: f64 = 1e-6;

/// Where a term lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum TermSite {
    Star(Vertex),
    Plaquette(Face),
}

/// A Hermitian term acting on the listed edge qubits.
///
/// `matrix` is `2^k × 2^k` with `qubits[0]` as the most significant bit of
/// the row/column index.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct LocalTerm {
    pub site: TermSite,
    pub qubits: Vec<Edge>,
    pub matrix: CMat,
}

impl LocalTerm {
    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn acts_on(&self, e: Edge) -> bool {
        self.qubits.contains(&e)
    }

    pub fn is_star(&self) -> bool {
        matches!(self.site, TermSite::Star(_))
    }
}

/// Validation and solver errors for instances.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("term at {site} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { site: String, defect: f64 },
    #[error("term at {site} has operator norm {norm:.9} > 1")]
    NormExceeded { site: String, norm: f64 },
    #[error("term at {site} does not act on the star/boundary of its site")]
    WrongSupport { site: String },
    #[error("term at {site} has matrix dimension {dim}, expected {expected}")]
    WrongDimension {
        site: String,
        dim: usize,
        expected: usize,
    },
    #[error("terms at {a} and {b} do not commute (residual {residual:.3e})")]
    NonCommuting { a: String, b: String, residual: f64 },
    #[error("no term attached at {site}")]
    MissingTerm { site: String },
    #[error("more than one term attached at {site}")]
    DuplicateTerm { site: String },
    #[error("defect coefficients missing entry for {site}")]
    MissingCoefficient { site: String },
    #[error("register of {n} qubits exceeds the {cap}-qubit exact-solver cap")]
    TooLarge { n: usize, cap: usize },
    #[error("state backend cannot evaluate this instance: {0}")]
    State(#[from] StateError),
}

/// Per-site coefficients for a defected instance: star term
/// `u·I + u'·Z^{⊗deg}`, plaquette term `v·I + v'·X^{⊗len}`, keyed by vertex
/// and face name.
#[derive(Clone, Debug, Default, serde::Serialize, serde::Deserialize)]
pub struct DefectCoefficients {
    pub stars: BTreeMap<String, (f64, f64)>,
    pub plaquettes: BTreeMap<String, (f64, f64)>,
}

impl DefectCoefficients {
    /// The canonical coefficients: every `(u, u') = (0, −1)`.
    pub fn canonical(complex: &SurfaceComplex) -> Self {
        let mut c = DefectCoefficients::default();
        for v in complex.vertices() {
            c.stars.insert(complex.vertex_name(v).to_string(), (0.0, -1.0));
        }
        for f in complex.faces() {
            c.plaquettes
                .insert(complex.face_name(f).to_string(), (0.0, -1.0));
        }
        c
    }

    /// Random coefficients with `|u| + |u'| ≤ 0.95` and `|u'| ≥ 0.1`, so
    /// every term stays strictly inside the norm budget and keeps a genuine
    /// interaction part.
    pub fn random(complex: &SurfaceComplex, seed: u64) -> Self {
        let mut rng = stream(seed, "defects");
        let draw = |rng: &mut rand_chacha::ChaCha20Rng| {
            let u: f64 = rng.gen_range(-0.35..0.35);
            let mag: f64 = rng.gen_range(0.1..0.6);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            (u, sign * mag)
        };
        let mut c = DefectCoefficients::default();
        for v in complex.vertices() {
            let val = draw(&mut rng);
            c.stars.insert(complex.vertex_name(v).to_string(), val);
        }
        for f in complex.faces() {
            let val = draw(&mut rng);
            c.plaquettes.insert(complex.face_name(f).to_string(), val);
        }
        c
    }
}

/// A validated commuting local Hamiltonian instance.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct CLHInstance {
    pub complex: SurfaceComplex,
    terms: Vec<LocalTerm>,
    /// Term index per vertex id.
    star_terms: Vec<usize>,
    /// Term index per face id.
    plaq_terms: Vec<usize>,
    /// Commutation tolerance the instance was validated with.
    pub tol: f64,
    /// Non-fatal validation findings (e.g. norm overshoot within slack).
    pub warnings: Vec<String>,
}

/// Attach terms with the default tolerance.
pub fn attach_terms(
    complex: SurfaceComplex,
    terms: Vec<LocalTerm>,
) -> Result<CLHInstance, InstanceError> {
    attach_terms_with_tol(complex, terms, DEFAULT_TOL)
}

/// Attach terms, validating Hermiticity, norm, support and pairwise
/// commutation at the given Frobenius tolerance.
pub fn attach_terms_with_tol(
    complex: SurfaceComplex,
    terms: Vec<LocalTerm>,
    tol: f64,
) -> Result<CLHInstance, InstanceError> {
    let mut star_terms = vec![usize::MAX; complex.n_vertices()];
    let mut plaq_terms = vec![usize::MAX; complex.n_faces()];
    let mut warnings = Vec::new();

    for (idx, term) in terms.iter().enumerate() {
        let site = site_name(&complex, term.site);
        let expected_support: Vec<Edge> = match term.site {
            TermSite::Star(v) => complex.star(v),
            TermSite::Plaquette(f) => complex.face_boundary(f),
        };
        let slot = match term.site {
            TermSite::Star(v) => &mut star_terms[v.0],
            TermSite::Plaquette(f) => &mut plaq_terms[f.0],
        };
        if *slot != usize::MAX {
            return Err(InstanceError::DuplicateTerm { site });
        }
        *slot = idx;

        let mut sorted_given = term.qubits.clone();
        sorted_given.sort();
        sorted_given.dedup();
        let mut sorted_expected = expected_support;
        sorted_expected.sort();
        sorted_expected.dedup();
        if sorted_given != sorted_expected || sorted_given.len() != term.qubits.len() {
            return Err(InstanceError::WrongSupport { site });
        }

        let expected_dim = 1usize << term.arity();
        if term.matrix.nrows() != expected_dim || term.matrix.ncols() != expected_dim {
            return Err(InstanceError::WrongDimension {
                site,
                dim: term.matrix.nrows(),
                expected: expected_dim,
            });
        }

        let defect = linalg::hermiticity_defect(&term.matrix);
        if defect > tol {
            return Err(InstanceError::NotHermitian { site, defect });
        }

        let norm = linalg::hermitian_op_norm(&term.matrix);
        if norm > 1.0 + NORM_SLACK {
            return Err(InstanceError::NormExceeded { site, norm });
        }
        if norm > 1.0 {
            warnings.push(format!(
                "term at {site} has operator norm {norm:.12} (within slack)"
            ));
        }
    }

    for v in complex.vertices() {
        if star_terms[v.0] == usize::MAX {
            return Err(InstanceError::MissingTerm {
                site: format!("star {}", complex.vertex_name(v)),
            });
        }
    }
    for f in complex.faces() {
        if plaq_terms[f.0] == usize::MAX {
            return Err(InstanceError::MissingTerm {
                site: format!("plaquette {}", complex.face_name(f)),
            });
        }
    }

    // Pairwise commutation on joint supports. Only overlapping pairs can
    // fail; disjoint supports commute identically.
    for a in 0..terms.len() {
        for b in (a + 1)..terms.len() {
            if terms[a].qubits.iter().any(|e| terms[b].qubits.contains(e)) {
                let residual = commutation_residual(&terms[a], &terms[b]);
                if residual > tol {
                    return Err(InstanceError::NonCommuting {
                        a: site_name(&complex, terms[a].site),
                        b: site_name(&complex, terms[b].site),
                        residual,
                    });
                }
            }
        }
    }

    Ok(CLHInstance {
        complex,
        terms,
        star_terms,
        plaq_terms,
        tol,
        warnings,
    })
}

/// Human-readable site label used in error messages.
pub fn site_name(complex: &SurfaceComplex, site: TermSite) -> String {
    match site {
        TermSite::Star(v) => format!("star {}", complex.vertex_name(v)),
        TermSite::Plaquette(f) => format!("plaquette {}", complex.face_name(f)),
    }
}

/// `‖[h_a, h_b]‖_F` evaluated on the union of the two supports.
pub fn commutation_residual(a: &LocalTerm, b: &LocalTerm) -> f64 {
    let mut joint: Vec<Edge> = a.qubits.iter().chain(b.qubits.iter()).cloned().collect();
    joint.sort();
    joint.dedup();
    let pos = |qs: &[Edge]| -> Vec<usize> {
        qs.iter()
            .map(|e| joint.iter().position(|j| j == e).unwrap())
            .collect()
    };
    let ea = linalg::embed(&a.matrix, &pos(&a.qubits), joint.len());
    let eb = linalg::embed(&b.matrix, &pos(&b.qubits), joint.len());
    linalg::fro_norm(&linalg::commutator(&ea, &eb))
}

impl CLHInstance {
    pub fn n_qubits(&self) -> usize {
        self.complex.n_edges()
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn term_for_vertex(&self, v: Vertex) -> &LocalTerm {
        &self.terms[self.star_terms[v.0]]
    }

    pub fn term_for_face(&self, f: Face) -> &LocalTerm {
        &self.terms[self.plaq_terms[f.0]]
    }

    /// Qubit index of an edge in the global register (edge ids are the
    /// register order).
    pub fn qubit_of(&self, e: Edge) -> usize {
        e.0
    }

    /// Largest commutator residual over all overlapping term pairs.
    pub fn max_commutation_residual(&self) -> f64 {
        let mut max = 0.0f64;
        for a in 0..self.terms.len() {
            for b in (a + 1)..self.terms.len() {
                if self.terms[a]
                    .qubits
                    .iter()
                    .any(|e| self.terms[b].qubits.contains(e))
                {
                    max = max.max(commutation_residual(&self.terms[a], &self.terms[b]));
                }
            }
        }
        max
    }

    /// Replace the term at a site, revalidating the instance.
    pub fn with_replaced_term(&self, term: LocalTerm) -> Result<CLHInstance, InstanceError> {
        let mut terms = self.terms.clone();
        let idx = match term.site {
            TermSite::Star(v) => self.star_terms[v.0],
            TermSite::Plaquette(f) => self.plaq_terms[f.0],
        };
        terms[idx] = term;
        attach_terms_with_tol(self.complex.clone(), terms, self.tol)
    }

    /// Dense Hamiltonian matrix (small registers only).
    pub fn hamiltonian_dense(&self) -> Result<CMat, InstanceError> {
        let n = self.n_qubits();
        if n > DENSE_CAP {
            return Err(InstanceError::TooLarge { n, cap: DENSE_CAP });
        }
        let dim = 1usize << n;
        let mut h: CMat = Array2::zeros((dim, dim));
        for term in &self.terms {
            let pos: Vec<usize> = term.qubits.iter().map(|e| self.qubit_of(*e)).collect();
            h = h + linalg::embed(&term.matrix, &pos, n);
        }
        Ok(h)
    }

    /// `H|ψ⟩` without materializing the Hamiltonian.
    pub fn apply_hamiltonian(&self, state: &CVec) -> CVec {
        let n = self.n_qubits();
        let mut out: CVec = ndarray::Array1::zeros(state.len());
        for term in &self.terms {
            let pos: Vec<usize> = term.qubits.iter().map(|e| self.qubit_of(*e)).collect();
            out = out + linalg::apply_local(&term.matrix, &pos, state, n);
        }
        out
    }

    /// Exact ground energy: dense diagonalization up to [`DENSE_CAP`]
    /// qubits, Lanczos up to [`LANCZOS_CAP`].
    pub fn exact_ground_energy(&self) -> Result<f64, InstanceError> {
        let n = self.n_qubits();
        if n <= DENSE_CAP {
            let h = self.hamiltonian_dense()?;
            let (vals, _) = linalg::eigh(&h);
            Ok(vals[0])
        } else if n <= LANCZOS_CAP {
            Ok(self.lanczos_ground_energy())
        } else {
            Err(InstanceError::TooLarge {
                n,
                cap: LANCZOS_CAP,
            })
        }
    }

    /// Ground energy and a ground statevector (statevector sizes only).
    pub fn exact_groundstate(&self) -> Result<(f64, CVec), InstanceError> {
        let n = self.n_qubits();
        if n <= DENSE_CAP {
            let h = self.hamiltonian_dense()?;
            let (vals, vecs) = linalg::eigh(&h);
            Ok((vals[0], vecs.column(0).to_owned()))
        } else if n <= LANCZOS_CAP {
            Ok(self.lanczos_groundstate())
        } else {
            Err(InstanceError::TooLarge {
                n,
                cap: LANCZOS_CAP,
            })
        }
    }

    /// Lanczos with full reorthogonalization; deterministic seeded start.
    fn lanczos_iterate(&self) -> (f64, Vec<CVec>, CMat) {
        let n = self.n_qubits();
        let dim = 1usize << n;
        let mut rng = stream(0xC1B2_D00D, "lanczos/start");
        let mut vs: Vec<CVec> = vec![linalg::random_unit_vector(dim, &mut rng)];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let max_iters = dim.min(400);
        let mut best = f64::INFINITY;
        let mut stable_for = 0usize;
        for j in 0..max_iters {
            let mut w = self.apply_hamiltonian(&vs[j]);
            let alpha = linalg::vdot(&vs[j], &w).re;
            alphas.push(alpha);
            // Full reorthogonalization, twice for numerical safety.
            for _ in 0..2 {
                for v in &vs {
                    let c = linalg::vdot(v, &w);
                    w = w - v.mapv(|z| z * c);
                }
            }
            let beta = linalg::vnorm(&w);
            let (tri_vals, _) = tridiag_eig(&alphas, &betas);
            let lam = tri_vals[0];
            if (best - lam).abs() < 1e-13 {
                stable_for += 1;
            } else {
                stable_for = 0;
            }
            best = best.min(lam);
            if beta < 1e-12 {
                // Krylov space closed: the tridiagonal spectrum is exact on
                // the invariant subspace containing the start vector.
                break;
            }
            if stable_for >= 6 && j >= 12 {
                break;
            }
            betas.push(beta);
            vs.push(w.mapv(|z| z / linalg::re(beta)));
        }
        let (_, tri_vecs) = tridiag_eig(&alphas, &betas[..alphas.len() - 1]);
        (best, vs, tri_vecs)
    }

    fn lanczos_ground_energy(&self) -> f64 {
        self.lanczos_iterate().0
    }

    fn lanczos_groundstate(&self) -> (f64, CVec) {
        let (energy, vs, tri_vecs) = self.lanczos_iterate();
        let dim = vs[0].len();
        let mut gs: CVec = ndarray::Array1::zeros(dim);
        for i in 0..tri_vecs.nrows() {
            let c = tri_vecs[(i, 0)];
            gs = gs + vs[i].mapv(|z| z * c);
        }
        let norm = linalg::vnorm(&gs);
        (energy, gs.mapv(|z| z / linalg::re(norm)))
    }

    /// Energy `Σ ⟨ψ|h|ψ⟩` of a state, term by term.
    ///
    /// Statevector states evaluate each dense term directly. Stabilizer
    /// states require every term to be of two-component Pauli form
    /// `u·I + u'·P` (which the canonical and defected instances are).
    pub fn energy(&self, state: &QuantumState) -> Result<f64, InstanceError> {
        let mut total = 0.0;
        for term in &self.terms {
            let pos: Vec<usize> = term.qubits.iter().map(|e| self.qubit_of(*e)).collect();
            if state.amplitudes().is_some() {
                total += state.expect_dense(&term.matrix, &pos)?;
            } else {
                let (u, up, p) = pauli_two_decomposition(&term.matrix).ok_or_else(|| {
                    StateError::BackendUnsupported {
                        what: format!(
                            "term at site {:?} is not of two-component Pauli form",
                            term.site
                        ),
                    }
                })?;
                total += u;
                if let Some(p_local) = p {
                    let global = lift_pauli(&p_local, &pos, state.n_qubits());
                    total += up * state.expect_pauli(&global);
                }
            }
        }
        Ok(total)
    }
}

/// Lift a local Pauli string (over `positions.len()` qubits) to the global
/// register.
pub fn lift_pauli(local: &PauliString, positions: &[usize], n_total: usize) -> PauliString {
    let mut letters: Vec<(usize, Letter)> = Vec::new();
    for (i, &q) in positions.iter().enumerate() {
        let l = local.letter(i);
        if l != Letter::I {
            letters.push((q, l));
        }
    }
    let mut out = PauliString::from_letters(n_total, &letters);
    out.mul_phase(local.phase());
    out
}

/// Decompose a Hermitian matrix as `u·I + u'·P` for a single non-identity
/// Pauli string `P` with real `u, u'`, if it has that form.
///
/// Returns `Some((u, 0, None))` for pure multiples of the identity and
/// `None` when more than one non-identity Pauli component is present.
pub fn pauli_two_decomposition(matrix: &CMat) -> Option<(f64, f64, Option<PauliString>)> {
    let dim = matrix.nrows();
    let k = dim.trailing_zeros() as usize;
    if dim != (1 << k) {
        return None;
    }
    let mut ident = 0.0f64;
    let mut found: Option<(f64, PauliString)> = None;
    for code in 0..(4usize.pow(k as u32)) {
        let mut letters = Vec::new();
        let mut c = code;
        for q in 0..k {
            let l = match c % 4 {
                0 => Letter::I,
                1 => Letter::X,
                2 => Letter::Y,
                _ => Letter::Z,
            };
            c /= 4;
            if l != Letter::I {
                letters.push((q, l));
            }
        }
        let p = PauliString::from_letters(k, &letters);
        let coeff = linalg::hs_inner(&p.to_matrix(), matrix) / linalg::re(dim as f64);
        if coeff.norm() < 1e-12 {
            continue;
        }
        if coeff.im.abs() > 1e-12 {
            return None;
        }
        if code == 0 {
            ident = coeff.re;
        } else if found.is_some() {
            return None;
        } else {
            found = Some((coeff.re, p));
        }
    }
    match found {
        Some((up, p)) => Some((ident, up, Some(p))),
        None => Some((ident, 0.0, None)),
    }
}

/// Eigendecomposition of the symmetric tridiagonal matrix with diagonal
/// `alphas` and off-diagonal `betas`.
fn tridiag_eig(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, CMat) {
    let j = alphas.len();
    let mut t: CMat = Array2::zeros((j, j));
    for (i, &a) in alphas.iter().enumerate() {
        t[(i, i)] = linalg::re(a);
    }
    for (i, &b) in betas.iter().enumerate().take(j.saturating_sub(1)) {
        t[(i, i + 1)] = linalg::re(b);
        t[(i + 1, i)] = linalg::re(b);
    }
    linalg::eigh(&t)
}

/// The canonical rotation-code instance: `−Z^{⊗deg}` stars and `−X^{⊗len}`
/// plaquettes.
pub fn toric_instance(complex: &SurfaceComplex) -> Result<CLHInstance, InstanceError> {
    defected_toric_instance(complex, &DefectCoefficients::canonical(complex))
}

/// A defected instance with per-site coefficients `u·I + u'·Z^{⊗deg}` /
/// `v·I + v'·X^{⊗len}`.
pub fn defected_toric_instance(
    complex: &SurfaceComplex,
    coeffs: &DefectCoefficients,
) -> Result<CLHInstance, InstanceError> {
    let mut terms = Vec::new();
    for v in complex.vertices() {
        let name = complex.vertex_name(v);
        let &(u, up) = coeffs
            .stars
            .get(name)
            .ok_or_else(|| InstanceError::MissingCoefficient {
                site: format!("star {name}"),
            })?;
        let qubits = complex.star(v);
        let k = qubits.len();
        let zs: Vec<CMat> = (0..k).map(|_| linalg::pauli_z()).collect();
        let mut m = linalg::kron_all(&zs).mapv(|z| z * linalg::re(up));
        for i in 0..(1 << k) {
            m[(i, i)] += linalg::re(u);
        }
        terms.push(LocalTerm {
            site: TermSite::Star(v),
            qubits,
            matrix: m,
        });
    }
    for f in complex.faces() {
        let name = complex.face_name(f);
        let &(v_, vp) = coeffs
            .plaquettes
            .get(name)
            .ok_or_else(|| InstanceError::MissingCoefficient {
                site: format!("plaquette {name}"),
            })?;
        let qubits = complex.face_boundary(f);
        let k = qubits.len();
        let xs: Vec<CMat> = (0..k).map(|_| linalg::pauli_x()).collect();
        let mut m = linalg::kron_all(&xs).mapv(|z| z * linalg::re(vp));
        for i in 0..(1 << k) {
            m[(i, i)] += linalg::re(v_);
        }
        terms.push(LocalTerm {
            site: TermSite::Plaquette(f),
            qubits,
            matrix: m,
        });
    }
    attach_terms(complex.clone(), terms)
}

/// The per-edge rotation unitaries a given seed produces, keyed by edge.
pub fn scramble_unitaries(complex: &SurfaceComplex, seed: u64) -> Vec<CMat> {
    complex
        .edges()
        .map(|e| {
            let label = format!("scramble/{}", complex.edge_name(e));
            linalg::haar_unitary_2x2(&mut stream(seed, &label))
        })
        .collect()
}

/// Conjugate every term by the given per-edge single-qubit unitaries:
/// `h ↦ (⊗_q U_q) h (⊗_q U_q)†` with `U_q = unitaries[q]`.
///
/// Rotation preserves Hermiticity, norms, spectra and all commutators, so
/// the result revalidates under the same tolerance. This is how a computed
/// calibration is applied to an instance.
pub fn conjugated(instance: &CLHInstance, unitaries: &[CMat]) -> Result<CLHInstance, InstanceError> {
    let terms = instance
        .terms
        .iter()
        .map(|term| {
            let factors: Vec<CMat> = term.qubits.iter().map(|e| unitaries[e.0].clone()).collect();
            let u = linalg::kron_all(&factors);
            let matrix = u.dot(&term.matrix).dot(&linalg::dagger(&u));
            LocalTerm {
                site: term.site,
                qubits: term.qubits.clone(),
                matrix,
            }
        })
        .collect();
    attach_terms_with_tol(instance.complex.clone(), terms, instance.tol)
}

/// Conjugate every term by an independent Haar-random single-qubit unitary
/// per edge.
pub fn scramble(instance: &CLHInstance, seed: u64) -> Result<CLHInstance, InstanceError> {
    let us = scramble_unitaries(&instance.complex, seed);
    conjugated(instance, &us)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_engine::Backend;
    use crate::surface_complex::torus_grid;

    #[test]
    fn toric_two_by_two_is_valid_with_ground_energy_minus_eight() {
        let complex = torus_grid(2, 2).unwrap();
        let inst = toric_instance(&complex).unwrap();
        assert_eq!(inst.n_qubits(), 8);
        assert_eq!(inst.terms().len(), 8);
        assert!(inst.max_commutation_residual() < 1e-12);
        let e0 = inst.exact_ground_energy().unwrap();
        assert!((e0 + 8.0).abs() < 1e-9, "ground energy {e0}");
    }

    #[test]
    fn replacing_plaquette_with_xxxy_is_rejected_as_noncommuting() {
        let complex = torus_grid(2, 2).unwrap();
        let inst = toric_instance(&complex).unwrap();
        let f = Face(0);
        let qubits = complex.face_boundary(f);
        let factors = [
            linalg::pauli_x(),
            linalg::pauli_x(),
            linalg::pauli_x(),
            linalg::pauli_y(),
        ];
        let term = LocalTerm {
            site: TermSite::Plaquette(f),
            qubits,
            matrix: linalg::kron_all(&factors),
        };
        match inst.with_replaced_term(term) {
            Err(InstanceError::NonCommuting { a, b, residual }) => {
                assert!(residual > 1.0);
                assert!(
                    a.contains("plaquette") && b.contains("plaquette"),
                    "expected a plaquette pair, got {a} / {b}"
                );
            }
            other => panic!("expected NonCommuting, got {other:?}"),
        }
    }

    #[test]
    fn norm_overshoot_within_slack_warns_but_validates() {
        let complex = torus_grid(2, 2).unwrap();
        let inst = toric_instance(&complex).unwrap();
        let f = Face(0);
        let qubits = complex.face_boundary(f);
        let m = linalg::eye(16).mapv(|z| z * linalg::re(1.0 + 5e-7));
        let term = LocalTerm {
            site: TermSite::Plaquette(f),
            qubits: qubits.clone(),
            matrix: m,
        };
        let replaced = inst.with_replaced_term(term).unwrap();
        assert!(!replaced.warnings.is_empty());

        let m = linalg::eye(16).mapv(|z| z * linalg::re(1.1));
        let term = LocalTerm {
            site: TermSite::Plaquette(f),
            qubits,
            matrix: m,
        };
        assert!(matches!(
            inst.with_replaced_term(term),
            Err(InstanceError::NormExceeded { .. })
        ));
    }

    #[test]
    fn scramble_preserves_commutation_and_spectrum() {
        let complex = torus_grid(2, 2).unwrap();
        let inst = toric_instance(&complex).unwrap();
        let rotated = scramble(&inst, 42).unwrap();
        assert!(rotated.max_commutation_residual() < 1e-12);
        let e0 = rotated.exact_ground_energy().unwrap();
        assert!((e0 + 8.0).abs() < 1e-9, "rotated ground energy {e0}");
    }

    #[test]
    fn lanczos_agrees_with_dense_on_defected_instances() {
        let complex = torus_grid(2, 2).unwrap();
        for seed in 0..5u64 {
            let coeffs = DefectCoefficients::random(&complex, seed);
            let inst = defected_toric_instance(&complex, &coeffs).unwrap();
            let dense = inst.exact_ground_energy().unwrap();
            let lanczos = inst.lanczos_ground_energy();
            assert!(
                (dense - lanczos).abs() < 1e-9,
                "seed {seed}: dense {dense} vs lanczos {lanczos}"
            );
        }
    }

    #[test]
    fn energy_of_zero_state_on_both_backends() {
        let complex = torus_grid(2, 2).unwrap();
        let inst = toric_instance(&complex).unwrap();
        // |0^8⟩: stars give −1 each, plaquettes average to zero.
        for backend in [Backend::Stabilizer, Backend::Statevector] {
            let st =
                QuantumState::init_product(8, backend, stream(0, "energy-test")).unwrap();
            let e = inst.energy(&st).unwrap();
            assert!((e + 4.0).abs() < 1e-12, "{backend:?} energy {e}");
        }
    }

    #[test]
    fn two_component_decomposition_recognizes_defected_terms() {
        let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z());
        let m = zz.mapv(|z| z * linalg::re(-0.5));
        let mut m2 = m.clone();
        for i in 0..4 {
            m2[(i, i)] += linalg::re(0.25);
        }
        let (u, up, p) = pauli_two_decomposition(&m2).unwrap();
        assert!((u - 0.25).abs() < 1e-12);
        assert!((up + 0.5).abs() < 1e-12);
        let p = p.unwrap();
        assert_eq!(p.letter(0), Letter::Z);
        assert_eq!(p.letter(1), Letter::Z);

        // Pure identity.
        let (u, up, p) = pauli_two_decomposition(&linalg::eye(4)).unwrap();
        assert!((u - 1.0).abs() < 1e-12 && up == 0.0 && p.is_none());

        // A three-component matrix is rejected.
        let mut m3 = zz;
        m3 = m3 + linalg::kron(&linalg::pauli_x(), &linalg::pauli_x());
        m3 = m3 + linalg::kron(&linalg::pauli_y(), &linalg::pauli_y());
        assert!(pauli_two_decomposition(&m3).is_none());
    }

    #[test]
    fn missing_term_is_rejected() {
        let complex = torus_grid(2, 2).unwrap();
        let inst = toric_instance(&complex).unwrap();
        let mut terms: Vec<LocalTerm> = inst.terms().to_vec();
        terms.pop();
        assert!(matches!(
            attach_terms(complex, terms),
            Err(InstanceError::MissingTerm { .. })
        ));
    }
}

//! Classical-qubit detection and removal.
//!
//! A qubit is *classical* when every term admits a common invariant
//! one-dimensional decomposition on it: there are orthogonal rank-1
//! projectors `π₀, π₁` with `[h, π_b ⊗ I] = 0` for every term `h`. In
//! algebra language this happens exactly when no term induces a full matrix
//! algebra on the qubit and all induced line generators commute pairwise —
//! traceless 2×2 operators commute only when parallel, so all the lines
//! coincide and the shared eigenprojectors work for every term at once.
//!
//! Removing a classical qubit replaces each term by its compression onto a
//! chosen branch, `h ↦ I_q ⊗ ⟨φ|h|φ⟩`, which keeps the complex, preserves
//! pairwise commutation, and never enlarges the spectrum: every eigenvalue
//! of the reduced Hamiltonian is an eigenvalue of the original (extend any
//! eigenvector by `|φ⟩` on the removed qubit). Choosing the branch of lower
//! exact ground energy keeps the ground energy itself equal — that choice is
//! the prover's job, and the recorded projector sequence is the NP-witness
//! fragment that lets a verifier replay the reduction deterministically.

use crate::clh_instance::{
    attach_terms_with_tol, CLHInstance, InstanceError, LocalTerm,
};
use crate::linalg::{self, CMat};
use crate::operator_algebra::{classify_on_edge, AlgebraError, Classification};
use crate::surface_complex::Edge;
use ndarray::Array2;
use thiserror::Error;

/// Frobenius tolerance for projector invariance, `‖[h, π⊗I]‖_F`.
pub const INVARIANCE_TOL: f64 = 1e-9;

/// Errors from the reduction loop.
#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("projector is not invariant for the term at {site} (residual {residual:.3e})")]
    NotInvariant { site: String, residual: f64 },
    #[error(
        "branch selection needs exact ground energies beyond the solver cap \
         ({n} qubits): supply an external witness"
    )]
    TooLargeForProver { n: usize },
    #[error("witness step {step} names edge {edge} which is not classical at that point")]
    BadWitnessStep { step: usize, edge: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// One recorded removal: the qubit, the branch index, and the rank-1
/// projector whose range is the kept branch state.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct WitnessStep {
    pub edge: Edge,
    pub branch: usize,
    pub projector: CMat,
}

/// The ordered projector sequence collected while removing classical qubits.
#[derive(Clone, Debug, Default, serde::Serialize, serde::Deserialize)]
pub struct ReductionWitness {
    pub steps: Vec<WitnessStep>,
}

/// Search for a classical qubit; returns the first one in edge order
/// together with its pair of invariant rank-1 projectors `(π₀, π₁)`,
/// ordered as the ±1 eigenprojectors of the shared line generator.
///
/// Qubits on which no term acts non-trivially are already classical *and*
/// trivial, and are skipped.
pub fn find_classical_qubit(
    instance: &CLHInstance,
) -> Result<Option<(Edge, [CMat; 2])>, ReductionError> {
    'edges: for e in instance.complex.edges() {
        let mut shared_line: Option<CMat> = None;
        for term in instance.terms() {
            if !term.acts_on(e) {
                continue;
            }
            match classify_on_edge(term, e)? {
                Classification::Trivial => {}
                Classification::Full => continue 'edges,
                Classification::PauliLine(p) => match &shared_line {
                    None => shared_line = Some(p),
                    Some(prev) => {
                        // Sign-canonical generators: parallel lines agree
                        // exactly, anything else fails to commute.
                        if linalg::fro_norm(&(&p - prev)) > 1e-6 {
                            continue 'edges;
                        }
                    }
                },
            }
        }
        if let Some(p) = shared_line {
            let half = |sign: f64| -> CMat {
                let mut m = p.mapv(|z| z * linalg::re(sign * 0.5));
                for i in 0..2 {
                    m[(i, i)] += linalg::re(0.5);
                }
                m
            };
            return Ok(Some((e, [half(1.0), half(-1.0)])));
        }
    }
    Ok(None)
}

/// Compress every term onto the range of `projector` at `qubit`:
/// `h ↦ I_q ⊗ ⟨φ|h|φ⟩` with `|φ⟩` the unit vector spanning the range.
///
/// Fails with `NotInvariant` when some term does not commute with
/// `π ⊗ I` within [`INVARIANCE_TOL`].
pub fn project_out(
    instance: &CLHInstance,
    qubit: Edge,
    projector: &CMat,
) -> Result<CLHInstance, ReductionError> {
    let phi = projector_range_state(projector);
    let mut terms = Vec::with_capacity(instance.terms().len());
    for term in instance.terms() {
        if !term.acts_on(qubit) {
            terms.push(term.clone());
            continue;
        }
        let k = term.arity();
        let slot = term.qubits.iter().position(|q| *q == qubit).unwrap();
        let embedded_pi = linalg::embed(projector, &[slot], k);
        let residual = linalg::fro_norm(&linalg::commutator(&term.matrix, &embedded_pi));
        if residual > INVARIANCE_TOL {
            return Err(ReductionError::NotInvariant {
                site: crate::clh_instance::site_name(&instance.complex, term.site),
                residual,
            });
        }
        terms.push(LocalTerm {
            site: term.site,
            qubits: term.qubits.clone(),
            matrix: compress_at_slot(&term.matrix, k, slot, &phi),
        });
    }
    Ok(attach_terms_with_tol(
        instance.complex.clone(),
        terms,
        instance.tol,
    )?)
}

/// Unit vector spanning the range of a rank-1 projector.
fn projector_range_state(projector: &CMat) -> [linalg::C64; 2] {
    // The larger-norm column of a rank-1 projector spans its range.
    let c0 = projector[(0, 0)].norm_sqr() + projector[(1, 0)].norm_sqr();
    let c1 = projector[(0, 1)].norm_sqr() + projector[(1, 1)].norm_sqr();
    let col = if c0 >= c1 { 0 } else { 1 };
    let (a, b) = (projector[(0, col)], projector[(1, col)]);
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    [a / linalg::re(norm), b / linalg::re(norm)]
}

/// `I ⊗ ⟨φ|h|φ⟩` with the contraction at `slot`, preserving qubit order.
fn compress_at_slot(h: &CMat, k: usize, slot: usize, phi: &[linalg::C64; 2]) -> CMat {
    let dim = 1usize << k;
    let bit = 1usize << (k - 1 - slot);
    let reduced_dim = dim >> 1;
    // Index map for the remaining qubits: r-th reduced index → full index
    // with the slot bit cleared.
    let expand = |r: usize| -> usize {
        let low = r & (bit - 1);
        let high = (r >> (k - 1 - slot)) << (k - slot);
        high | low
    };
    let mut b: CMat = Array2::zeros((reduced_dim, reduced_dim));
    for rr in 0..reduced_dim {
        for cc in 0..reduced_dim {
            let (r0, c0) = (expand(rr), expand(cc));
            let mut acc = linalg::re(0.0);
            for s in 0..2 {
                for t in 0..2 {
                    let r = r0 | if s == 1 { bit } else { 0 };
                    let c = c0 | if t == 1 { bit } else { 0 };
                    acc += phi[s].conj() * phi[t] * h[(r, c)];
                }
            }
            b[(rr, cc)] = acc;
        }
    }
    // Re-embed the identity factor at the original slot.
    let with_leading_identity = linalg::kron(&linalg::eye(2), &b);
    let perm: Vec<usize> = (0..k)
        .map(|t| {
            if t == slot {
                0
            } else if t < slot {
                t + 1
            } else {
                t
            }
        })
        .collect();
    crate::operator_algebra::permute_qubits(&with_leading_identity, k, &perm)
}

/// Remove classical qubits until none remain, choosing each branch by lower
/// exact ground energy (ties keep branch 0).
pub fn remove_all_classical(
    instance: &CLHInstance,
) -> Result<(CLHInstance, ReductionWitness), ReductionError> {
    let mut current = instance.clone();
    let mut witness = ReductionWitness::default();
    for _ in 0..instance.n_qubits() {
        let Some((edge, projectors)) = find_classical_qubit(&current)? else {
            break;
        };
        let mut best: Option<(usize, f64, CLHInstance)> = None;
        for (b, pi) in projectors.iter().enumerate() {
            let candidate = project_out(&current, edge, pi)?;
            let energy = match candidate.exact_ground_energy() {
                Ok(e) => e,
                Err(InstanceError::TooLarge { n, .. }) => {
                    return Err(ReductionError::TooLargeForProver { n })
                }
                Err(e) => return Err(e.into()),
            };
            let better = match &best {
                None => true,
                Some((_, e_best, _)) => energy < *e_best - 1e-12,
            };
            if better {
                best = Some((b, energy, candidate));
            }
        }
        let (branch, _, reduced) = best.expect("two branches evaluated");
        witness.steps.push(WitnessStep {
            edge,
            branch,
            projector: projectors[branch].clone(),
        });
        current = reduced;
    }
    Ok((current, witness))
}

/// Replay a recorded witness against an instance. The same code path as the
/// prover's reduction, so the outcome is bit-identical when the witness is
/// genuine; tampered projectors surface as `NotInvariant` or
/// `BadWitnessStep`.
pub fn apply_witness(
    instance: &CLHInstance,
    witness: &ReductionWitness,
) -> Result<CLHInstance, ReductionError> {
    let mut current = instance.clone();
    for (i, step) in witness.steps.iter().enumerate() {
        // The named edge must still be classical with a matching projector
        // pair: π must be one of the two eigenprojectors of the shared line.
        let found = find_classical_first_matching(&current, step.edge)?;
        let Some(projectors) = found else {
            return Err(ReductionError::BadWitnessStep {
                step: i,
                edge: current.complex.edge_name(step.edge).to_string(),
            });
        };
        let matches_either = projectors
            .iter()
            .any(|pi| linalg::fro_norm(&(pi - &step.projector)) < 1e-7);
        if !matches_either {
            return Err(ReductionError::BadWitnessStep {
                step: i,
                edge: current.complex.edge_name(step.edge).to_string(),
            });
        }
        current = project_out(&current, step.edge, &step.projector)?;
    }
    Ok(current)
}

/// The invariant projector pair at one specific edge, if it is classical.
fn find_classical_first_matching(
    instance: &CLHInstance,
    e: Edge,
) -> Result<Option<[CMat; 2]>, ReductionError> {
    let mut shared_line: Option<CMat> = None;
    for term in instance.terms() {
        if !term.acts_on(e) {
            continue;
        }
        match classify_on_edge(term, e)? {
            Classification::Trivial => {}
            Classification::Full => return Ok(None),
            Classification::PauliLine(p) => match &shared_line {
                None => shared_line = Some(p),
                Some(prev) => {
                    if linalg::fro_norm(&(&p - prev)) > 1e-6 {
                        return Ok(None);
                    }
                }
            },
        }
    }
    Ok(shared_line.map(|p| {
        let half = |sign: f64| -> CMat {
            let mut m = p.mapv(|z| z * linalg::re(sign * 0.5));
            for i in 0..2 {
                m[(i, i)] += linalg::re(0.5);
            }
            m
        };
        [half(1.0), half(-1.0)]
    }))
}

/// True when no term acts non-trivially on the edge.
pub fn edge_is_trivial(instance: &CLHInstance, e: Edge) -> Result<bool, ReductionError> {
    for term in instance.terms() {
        if term.acts_on(e) && !classify_on_edge(term, e)?.is_trivial() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clh_instance::{attach_terms, scramble, toric_instance, TermSite};
    use crate::surface_complex::{triangle, Face};

    /// A triangle whose star terms and plaquette term are all diagonal
    /// (Z-type): every edge is classical.
    fn diagonal_triangle() -> CLHInstance {
        let complex = triangle("t");
        let z = linalg::pauli_z();
        let zz = linalg::kron(&z, &z).mapv(|v| v * linalg::re(-0.5));
        let mut terms = Vec::new();
        for v in complex.vertices() {
            terms.push(LocalTerm {
                site: TermSite::Star(v),
                qubits: complex.star(v),
                matrix: zz.clone(),
            });
        }
        let f = Face(0);
        let zzz = linalg::kron(&linalg::kron(&z, &z), &z).mapv(|v| v * linalg::re(-0.5));
        terms.push(LocalTerm {
            site: TermSite::Plaquette(f),
            qubits: complex.face_boundary(f),
            matrix: zzz,
        });
        attach_terms(complex, terms).unwrap()
    }

    #[test]
    fn toric_instance_has_no_classical_qubits() {
        let inst = toric_instance(&crate::surface_complex::torus_grid(2, 2).unwrap()).unwrap();
        assert!(find_classical_qubit(&inst).unwrap().is_none());
        let (reduced, witness) = remove_all_classical(&inst).unwrap();
        assert!(witness.steps.is_empty());
        assert_eq!(reduced.terms().len(), inst.terms().len());
    }

    #[test]
    fn diagonal_triangle_reduces_to_trivial_with_equal_energy() {
        let inst = diagonal_triangle();
        let original_energy = inst.exact_ground_energy().unwrap();
        let (reduced, witness) = remove_all_classical(&inst).unwrap();
        assert_eq!(witness.steps.len(), 3);
        for e in reduced.complex.edges() {
            assert!(edge_is_trivial(&reduced, e).unwrap());
        }
        let reduced_energy = reduced.exact_ground_energy().unwrap();
        assert!(
            (original_energy - reduced_energy).abs() < 1e-9,
            "{original_energy} vs {reduced_energy}"
        );
    }

    #[test]
    fn scrambled_diagonal_triangle_reduces_identically() {
        let inst = scramble(&diagonal_triangle(), 17).unwrap();
        let original_energy = inst.exact_ground_energy().unwrap();
        let (reduced, witness) = remove_all_classical(&inst).unwrap();
        assert_eq!(witness.steps.len(), 3);
        let reduced_energy = reduced.exact_ground_energy().unwrap();
        assert!((original_energy - reduced_energy).abs() < 1e-9);
        // The recorded projectors are rank-1 within tolerance.
        for step in &witness.steps {
            let p = &step.projector;
            assert!(linalg::fro_norm(&(p.dot(p) - p)) < 1e-9);
            assert!((linalg::trace(p).re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn witness_replay_is_bit_exact() {
        let inst = scramble(&diagonal_triangle(), 23).unwrap();
        let (reduced, witness) = remove_all_classical(&inst).unwrap();
        let replayed = apply_witness(&inst, &witness).unwrap();
        for (a, b) in reduced.terms().iter().zip(replayed.terms().iter()) {
            assert_eq!(a.matrix, b.matrix);
        }
    }

    #[test]
    fn tampered_witness_is_rejected() {
        let inst = scramble(&diagonal_triangle(), 29).unwrap();
        let (_, mut witness) = remove_all_classical(&inst).unwrap();
        // Replace the first projector by one for a different axis.
        witness.steps[0].projector = {
            let mut m = linalg::pauli_x().mapv(|z| z * linalg::re(0.5));
            for i in 0..2 {
                m[(i, i)] += linalg::re(0.5);
            }
            m
        };
        assert!(matches!(
            apply_witness(&inst, &witness),
            Err(ReductionError::BadWitnessStep { .. })
        ));
    }

    #[test]
    fn soundness_spectrum_subset() {
        // Every eigenvalue of the reduced Hamiltonian appears in the
        // original spectrum.
        let inst = scramble(&diagonal_triangle(), 31).unwrap();
        let (reduced, _) = remove_all_classical(&inst).unwrap();
        let (orig_vals, _) = linalg::eigh(&inst.hamiltonian_dense().unwrap());
        let (red_vals, _) = linalg::eigh(&reduced.hamiltonian_dense().unwrap());
        for rv in red_vals {
            let nearest = orig_vals
                .iter()
                .map(|ov| (ov - rv).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "eigenvalue {rv} not in original spectrum");
        }
    }

    #[test]
    fn mixed_triangle_keeps_noncommuting_edges() {
        // Plaquette Z₀X₁X₂; stars act with Z on e0 where they touch it and
        // with Z⊗Z on {e1, e2}. Every pair commutes (the Z⊗Z star meets the
        // plaquette in two anticommuting letters), and only e0 is classical.
        let complex = triangle("m");
        let z = linalg::pauli_z();
        let x = linalg::pauli_x();
        let e = |i: usize| Edge(i);
        let mut terms = Vec::new();
        for v in complex.vertices() {
            let qubits = complex.star(v);
            let m = if qubits.contains(&e(0)) {
                // Z on e0 (the lower-id slot), identity on the other edge.
                linalg::kron(&z, &linalg::eye(2)).mapv(|w| w * linalg::re(-0.5))
            } else {
                linalg::kron(&z, &z).mapv(|w| w * linalg::re(-0.5))
            };
            terms.push(LocalTerm {
                site: TermSite::Star(v),
                qubits,
                matrix: m,
            });
        }
        let f = Face(0);
        let fq = complex.face_boundary(f);
        assert_eq!(fq, vec![e(0), e(1), e(2)]);
        let zxx = linalg::kron(&linalg::kron(&z, &x), &x).mapv(|w| w * linalg::re(-0.5));
        terms.push(LocalTerm {
            site: TermSite::Plaquette(f),
            qubits: fq,
            matrix: zxx,
        });
        let inst = attach_terms(complex, terms).unwrap();
        let (reduced, witness) = remove_all_classical(&inst).unwrap();
        assert_eq!(witness.steps.len(), 1);
        assert_eq!(witness.steps[0].edge, e(0));
        assert!(find_classical_qubit(&reduced).unwrap().is_none());
        // Edges 1 and 2 stay genuinely quantum: star Z-lines against
        // plaquette X-lines.
        assert!(!edge_is_trivial(&reduced, e(1)).unwrap());
        assert!(!edge_is_trivial(&reduced, e(2)).unwrap());
    }
}

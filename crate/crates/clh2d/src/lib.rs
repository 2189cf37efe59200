//! Commuting local Hamiltonians on 2D polygonal complexes.
//!
//! A *commuting local Hamiltonian* (CLH) instance places one qubit on every
//! edge of a finite polygonal complex and one Hermitian term on every vertex
//! (a **star**, acting on the edges attached to the vertex) and every face
//! (a **plaquette**, acting on the edges of the polygon boundary), with all
//! terms pairwise commuting. The toric code
//!
//! ```text
//! H = −Σ_s A_s − Σ_p B_p,    A_s = ⊗_{e∋s} Z_e,    B_p = ⊗_{e∈∂p} X_e
//! ```
//!
//! is the motivating example; this crate treats the general case and verifies
//! on concrete instances that, up to a per-qubit change of basis and removal
//! of classical qubits, every such instance looks like a (possibly defected)
//! toric code with boundaries — and then actually synthesizes groundstates by
//! the measure-and-correct strategy that structure enables.
//!
//! The pipeline, bottom to top:
//!
//! * [`surface_complex`] — combinatorial complexes, paths/copaths/ribbons;
//! * [`clh_instance`] — term storage, validation, generators, exact energies;
//! * [`operator_algebra`] — operator-Schmidt factors, induced *-algebras,
//!   per-qubit classification and basis calibration;
//! * [`reduction`] — detection and removal of classical qubits;
//! * [`structure`] — boundary/coboundary roles, string operators, the
//!   fixable set and the punctured Hamiltonian;
//! * [`partition`] — quasi-Euclidean triangulations and super-particles;
//! * [`state_engine`] — stabilizer-tableau and dense statevector backends;
//! * [`synthesis`] — the end-to-end groundstate algorithms;
//! * [`cli`] — command-line drivers and file formats.

// Force linkage of the system BLAS/LAPACK used by `ndarray` and
// `ndarray-linalg`.
use blas_src as _;
use openblas_src as _;

pub mod cli;
pub mod clh_instance;
pub mod linalg;
pub mod operator_algebra;
pub mod partition;
pub mod pauli;
pub mod reduction;
pub mod rng;
pub mod state_engine;
pub mod structure;
pub mod surface_complex;
pub mod synthesis;

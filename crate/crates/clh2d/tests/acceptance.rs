//! Acceptance suite: one test per release gate, each printing a single
//! `PASS` line with its headline numbers. Tolerances are stated inline and
//! every reference value comes from an independent oracle (dense or sparse
//! diagonalization, closed-form counts, or exhaustive search).

mod common;

use clh2d::clh_instance::{
    conjugated, defected_toric_instance, lift_pauli, pauli_two_decomposition, site_name,
    toric_instance, CLHInstance, DefectCoefficients,
};
use clh2d::linalg;
use clh2d::operator_algebra::{
    calibrate, classify_on_edge, induced_algebra, induced_algebra_matrix, two_qubit_structure,
    Classification, TwoQubitStructure,
};
use clh2d::partition::{
    block_bound, build_superparticles, edge_bound, graph_diameter, graph_max_degree, moore_bound,
    petersen, profile_bound, search_degree_diameter, triangulated_grid, verify_partition,
    verify_quasi_euclidean, verify_two_local,
};
use clh2d::reduction::{apply_witness, remove_all_classical};
use clh2d::state_engine::Backend;
use clh2d::structure::{
    adjacent_interior_pairs, certify, classify_roles, fixable_set, puncture, DEFAULT_RIBBON_BUDGET,
};
use clh2d::surface_complex::Edge;
use clh2d::synthesis::{
    defected_ground_energy, full_pipeline, toric_groundstate, BackendChoice, Branch,
    PipelineOptions,
};
use std::collections::BTreeSet;
use std::time::Instant;

/// Grid toric codes from 2×2 to 6×6, closed and open, validate to machine
/// precision; the full 6×6 torus builds and checks in under five seconds.
#[test]
fn toric_family_validates_at_machine_precision() {
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for closed in [true, false] {
            let complex = if closed {
                common::torus(n, n)
            } else {
                common::planar(n, n)
            };
            let inst = toric_instance(&complex).unwrap();
            let r = inst.max_commutation_residual();
            assert!(r < 1e-12, "{n}x{n} closed={closed}: residual {r}");
            worst = worst.max(r);
        }
    }
    let t = Instant::now();
    let inst = toric_instance(&common::torus(6, 6)).unwrap();
    let r = inst.max_commutation_residual();
    let dt = t.elapsed();
    assert!(r < 1e-12);
    assert!(dt.as_secs_f64() < 5.0, "6x6 validation took {dt:?}");
    println!(
        "PASS — toric 2x2..6x6 validate, worst residual {worst:.2e}; 6x6 build+check in {:.0?}",
        dt
    );
}

fn term_eigenvalue(state: &clh2d::state_engine::QuantumState, inst: &CLHInstance, term_idx: usize) -> (f64, f64) {
    let term = &inst.terms()[term_idx];
    let (_, u_prime, local) = pauli_two_decomposition(&term.matrix).unwrap();
    let local = local.unwrap();
    let positions: Vec<usize> = term.qubits.iter().map(|&e| inst.qubit_of(e)).collect();
    let p = lift_pauli(&local, &positions, inst.n_qubits());
    let target = if u_prime > 0.0 { -1.0 } else { 1.0 };
    (state.expect_pauli(&p), target)
}

/// Two hundred seeded stabilizer syntheses on the 4×4 torus leave every
/// term at its ground eigenvalue with even excitation counts at every
/// intermediate record; the 2×2 statevector synthesis hits −8 exactly.
#[test]
fn toric_synthesis_reaches_the_ground_space() {
    let inst = common::toric_torus(4, 4);
    assert_eq!(inst.terms().len(), 32);
    for seed in 0..200u64 {
        let (state, report) = toric_groundstate(&inst, seed, Backend::Stabilizer, 20).unwrap();
        assert!(report.all_passed(), "seed {seed}: {:?}", report.checks);
        for idx in 0..inst.terms().len() {
            let (e, target) = term_eigenvalue(&state, &inst, idx);
            assert!(
                (e - target).abs() < 1e-9,
                "seed {seed}, term {idx}: eigenvalue {e}, target {target}"
            );
        }
        let (mut star_minus, mut plaq_minus) = (0usize, 0usize);
        for (site, lambda) in &report.measurements {
            if *lambda == -1 {
                if site.starts_with("star") {
                    star_minus += 1;
                } else {
                    plaq_minus += 1;
                }
            }
        }
        assert_eq!(star_minus % 2, 0, "seed {seed}: odd star excitations");
        assert_eq!(plaq_minus % 2, 0, "seed {seed}: odd plaquette excitations");
    }

    let inst2 = common::toric_torus(2, 2);
    let exact = inst2.exact_ground_energy().unwrap();
    assert!((exact + 8.0).abs() <= 1e-9, "2x2 exact {exact}");
    for seed in [0u64, 1, 2] {
        let (state, report) = toric_groundstate(&inst2, seed, Backend::Statevector, 20).unwrap();
        assert!(report.all_passed());
        assert!((report.final_energy - exact).abs() <= 1e-9);
        assert!((inst2.energy(&state).unwrap() - exact).abs() <= 1e-9);
    }
    println!("PASS — 200 stabilizer runs on the 4x4 torus all ground; 2x2 statevector at −8 ± 1e-9");
}

/// The closed-surface ground-energy formula matches dense diagonalization
/// on a hundred random defected 2×2 tori, covering all four parity classes
/// of the (star, plaquette) defect counts.
#[test]
fn defected_energies_match_dense_diagonalization() {
    let complex = common::torus(2, 2);
    let mut parities = BTreeSet::new();
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let coeffs = DefectCoefficients::random(&complex, seed);
        let inst = defected_toric_instance(&complex, &coeffs).unwrap();
        let formula = defected_ground_energy(&inst).unwrap();
        let dense = inst.exact_ground_energy().unwrap();
        let gap = (formula - dense).abs();
        assert!(gap <= 1e-8, "seed {seed}: formula {formula}, dense {dense}");
        worst = worst.max(gap);
        let n_star = coeffs.stars.values().filter(|c| c.1 > 0.0).count();
        let n_plaq = coeffs.plaquettes.values().filter(|c| c.1 > 0.0).count();
        parities.insert((n_star % 2, n_plaq % 2));
    }
    assert_eq!(
        parities.len(),
        4,
        "parity classes seen: {parities:?} — the draw must cover all four"
    );
    println!("PASS — 100 defected tori: formula vs dense worst gap {worst:.2e}, all 4 defect parities covered");
}

/// On a hundred scrambled defected tori every local action is a Pauli
/// line, calibration restores the ZZ/XX pair structure, induced algebras
/// are ∗-closed, algebras of overlapping terms commute elementwise on the
/// shared support (and demonstrably not qubit-by-qubit), and restricting a
/// two-qubit induced algebra lands inside the one-qubit one.
#[test]
fn scrambled_instances_keep_their_line_structure() {
    let sizes = [(2usize, 2usize), (2, 3), (3, 3)];
    let tol = 1e-8;
    let (mut lines, mut pairs, mut shared_checks) = (0usize, 0usize, 0usize);
    let mut single_qubit_clash = false;
    for i in 0..100u64 {
        let (n, m) = sizes[(i as usize) % sizes.len()];
        let base = common::defected_torus(n, m, 200 + i);
        let inst = common::scrambled(&base, 500 + i);

        for term in inst.terms() {
            for &e in &term.qubits {
                match classify_on_edge(term, e).unwrap() {
                    Classification::PauliLine(_) => lines += 1,
                    other => panic!("term {:?} on edge {e:?}: {other:?}", term.site),
                }
            }
        }

        let cal = calibrate(&inst).unwrap();
        let cinst = conjugated(&inst, &cal.unitaries).unwrap();
        for term in cinst.terms() {
            for w in term.qubits.windows(2) {
                let s = two_qubit_structure(term, w[0], w[1]);
                match (term.is_star(), &s) {
                    (true, TwoQubitStructure::ZZ) | (false, TwoQubitStructure::XX) => pairs += 1,
                    _ => panic!("term {:?}: unexpected pair structure {s:?}", term.site),
                }
            }
        }

        // ∗-closure of every single-edge induced algebra.
        for term in inst.terms() {
            for &e in &term.qubits {
                let alg = induced_algebra(term, &[e]);
                for a in &alg.basis {
                    assert!(alg.residual(&linalg::dagger(a)) < tol);
                    for b in &alg.basis {
                        assert!(alg.residual(&a.dot(b)) < tol);
                    }
                }
            }
        }

        // Overlapping terms: joint induced algebras on the shared support
        // commute elementwise; the single-edge factors need not.
        let terms = inst.terms();
        for a in 0..terms.len() {
            for b in (a + 1)..terms.len() {
                let shared: Vec<Edge> = terms[a]
                    .qubits
                    .iter()
                    .copied()
                    .filter(|e| terms[b].qubits.contains(e))
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                let aa = induced_algebra(&terms[a], &shared);
                let ab = induced_algebra(&terms[b], &shared);
                for x in &aa.basis {
                    for y in &ab.basis {
                        let c = linalg::fro_norm(&linalg::commutator(x, y));
                        assert!(c < tol, "sites {:?}/{:?}: commutator {c}", terms[a].site, terms[b].site);
                        shared_checks += 1;
                    }
                }
                if shared.len() == 2 {
                    let fa = induced_algebra(&terms[a], &shared[..1]);
                    let fb = induced_algebra(&terms[b], &shared[..1]);
                    let clash = fa.basis.iter().any(|x| {
                        fb.basis
                            .iter()
                            .any(|y| linalg::fro_norm(&linalg::commutator(x, y)) > 1e-3)
                    });
                    single_qubit_clash |= clash;
                }
            }
        }

        // Restriction containment: Schmidt factors of the two-qubit induced
        // algebra live inside the single-qubit induced algebra.
        for term in inst.terms() {
            let (e1, e2) = (term.qubits[0], term.qubits[1]);
            let a1 = induced_algebra(term, &[e1]);
            let a12 = induced_algebra(term, &[e1, e2]);
            for mat in &a12.basis {
                let restricted = induced_algebra_matrix(mat, 2, &[0]);
                for r in &restricted.basis {
                    assert!(a1.residual(r) < tol, "restriction escapes the edge algebra");
                }
            }
        }
    }
    // The elementwise-commutation statement is about the *joint* shared
    // support; single-edge factors of star/plaquette pairs anticommute.
    assert!(single_qubit_clash, "expected a qubit-wise clash somewhere");
    println!(
        "PASS — 100 scrambled tori: {lines} line actions, {pairs} calibrated ZZ/XX pairs, {shared_checks} shared-support commutators < 1e-8"
    );
}

/// Fifty instances with one to three injected classical qubits reduce with
/// bit-exact witness replay and unchanged ground energy.
#[test]
fn classical_qubits_reduce_without_energy_shift() {
    let mut by_count = [0usize; 4];
    let mut worst: f64 = 0.0;
    for i in 0..50usize {
        let (inst, expected) = common::classical_family(i % 3, 1000 + i as u64);
        assert!(inst.n_qubits() <= 12);
        let (reduced, witness) = remove_all_classical(&inst).unwrap();
        assert_eq!(witness.steps.len(), expected, "case {i}");
        let replay = apply_witness(&inst, &witness).unwrap();
        assert_eq!(
            serde_json::to_vec(&replay).unwrap(),
            serde_json::to_vec(&reduced).unwrap(),
            "case {i}: witness replay differs from the stored reduction"
        );
        let e0 = inst.exact_ground_energy().unwrap();
        let e1 = reduced.exact_ground_energy().unwrap();
        let gap = (e0 - e1).abs();
        assert!(gap <= 1e-9, "case {i}: original {e0}, reduced {e1}");
        worst = worst.max(gap);
        by_count[expected] += 1;
    }
    assert!(by_count[1] > 0 && by_count[2] > 0 && by_count[3] > 0);
    println!(
        "PASS — 50 classical-qubit reductions (counts 1/2/3 seen {}/{}/{} times), worst energy shift {worst:.2e}, replay bit-exact",
        by_count[1], by_count[2], by_count[3]
    );
}

/// On scrambled open-grid codes up to 5×5, every adjacent interior
/// (star, plaquette) pair owns at least one certified string operator, and
/// every stored operator passes its full commutation table below 1e−10.
#[test]
fn interior_terms_are_reachable_by_certified_strings() {
    let cases: &[(usize, u64, bool)] = &[
        (2, 10, false),
        (3, 11, false),
        (3, 12, true),
        (4, 13, false),
        (5, 14, false),
    ];
    let (mut pair_count, mut table_count) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    for &(k, seed, defected) in cases {
        let base = if defected {
            common::defected_planar(k, k, seed)
        } else {
            common::toric_planar(k, k)
        };
        let inst = common::scrambled(&base, seed);
        let (reduced, _) = remove_all_classical(&inst).unwrap();
        let cal = calibrate(&reduced).unwrap();
        let cinst = conjugated(&reduced, &cal.unitaries).unwrap();
        let roles = classify_roles(&cinst).unwrap();
        let fixable = fixable_set(&cinst, &roles, DEFAULT_RIBBON_BUDGET).unwrap();
        let have: BTreeSet<usize> = fixable.iter().map(|(id, _)| *id).collect();
        for (s, p) in adjacent_interior_pairs(&cinst, &roles) {
            assert!(
                have.contains(&s) || have.contains(&p),
                "{k}x{k}: interior pair ({s}, {p}) has no certified operator"
            );
            pair_count += 1;
        }
        for (_, op) in &fixable {
            let table = certify(&cinst, op);
            assert!(table.passed, "{k}x{k}: {table:?}");
            assert!(table.anticommutator_norm < 1e-10);
            assert!(table.max_commutator_norm < 1e-10);
            worst = worst.max(table.anticommutator_norm.max(table.max_commutator_norm));
            table_count += 1;
        }
    }
    assert!(pair_count > 0 && table_count > 0);
    println!(
        "PASS — {pair_count} interior pairs covered, {table_count} string operators certified, worst table entry {worst:.2e}"
    );
}

/// Generated block triangulations satisfy the quasi-Euclidean conditions,
/// their super-particle partitions are 2-local with blocks below
/// `D·k^(R+2)`, and the degree–diameter bound is reproduced by exhaustive
/// search up to the Petersen graph.
#[test]
fn superparticle_partitions_stay_two_local_and_bounded() {
    let mut max_block_seen = 0usize;
    for &(bn, bm, r) in &[(1usize, 2usize, 2usize), (2, 2, 2), (1, 1, 8)] {
        let (complex, tri) = triangulated_grid(bn, bm, r).unwrap();
        let quasi = verify_quasi_euclidean(&complex, &tri, tri.r, tri.big_r, tri.degree);
        assert!(quasi.ok, "{bn}x{bm} r={r}: {:?}", quasi.violations);
        let inst = toric_instance(&complex).unwrap();
        let roles = classify_roles(&inst).unwrap();
        let fixable = fixable_set(&inst, &roles, DEFAULT_RIBBON_BUDGET).unwrap();
        let punctured = puncture(&inst, &fixable).unwrap();
        let partition = build_superparticles(&punctured.instance, &tri).unwrap();
        assert!(verify_partition(&complex, &partition));
        assert!(verify_two_local(&punctured.instance, &partition).unwrap());
        let bound = block_bound(tri.degree, complex.max_degree(), tri.big_r);
        assert!(
            (partition.max_block() as u128) <= bound,
            "{bn}x{bm} r={r}: block {} over bound {bound}",
            partition.max_block()
        );
        max_block_seen = max_block_seen.max(partition.max_block());
    }

    // Degree–diameter side: the (k, R) = (3, 2) bound is 10, met by the
    // Petersen graph and reproduced both by profile search and by
    // exhaustive enumeration at every feasible smaller size.
    assert_eq!(moore_bound(3, 2).unwrap(), 10);
    assert_eq!(profile_bound(3, 2).unwrap(), 10);
    let p = petersen();
    assert_eq!(p.len() as u128, edge_bound(3, 2).unwrap());
    assert_eq!(graph_max_degree(10, &p), 3);
    assert_eq!(graph_diameter(10, &p), Some(2));
    for n in 1..=8 {
        let g = search_degree_diameter(n, 3, 2).unwrap_or_else(|| panic!("no graph at n = {n}"));
        assert!(graph_max_degree(n, &g) <= 3);
        assert!(n < 2 || graph_diameter(n, &g).unwrap() <= 2);
    }
    // n = 9 admits no such graph: a vertex of degree ≤ 2 reaches at most
    // 1 + 2 + 4 = 7 < 9 vertices in two steps, so the graph would have to
    // be 3-regular — impossible on an odd vertex count.
    assert_eq!((9 * 3) % 2, 1);
    // Exhaustive non-existence at a point the search can cover outright.
    assert!(search_degree_diameter(5, 4, 1).is_some());
    assert!(search_degree_diameter(6, 4, 1).is_none());
    println!(
        "PASS — 3 triangulations verified 2-local (largest block {max_block_seen}); degree-diameter bound 10 met at Petersen, exhaustive to n = 8"
    );
}

fn pipeline_roster() -> Vec<(String, CLHInstance)> {
    let mut out: Vec<(String, CLHInstance)> = Vec::new();
    for s in 0..5u64 {
        out.push((
            format!("scrambled 2x2 grid #{s}"),
            common::scrambled(&common::toric_planar(2, 2), s),
        ));
    }
    for s in 0..4u64 {
        out.push((
            format!("scrambled defected 2x2 grid #{s}"),
            common::scrambled(&common::defected_planar(2, 2, 50 + s), 60 + s),
        ));
    }
    for s in 0..3u64 {
        out.push((
            format!("scrambled 1x4 strip #{s}"),
            common::scrambled(&common::toric_planar(1, 4), 70 + s),
        ));
    }
    for s in 0..2u64 {
        out.push((
            format!("scrambled 1x5 strip #{s}"),
            common::scrambled(&common::toric_planar(1, 5), 80 + s),
        ));
    }
    for s in 0..5u64 {
        out.push((
            format!("defected holed torus 2x3 #{s}"),
            common::defected_holed_torus(2, 3, 90 + s),
        ));
    }
    out.push(("holed torus 2x4".into(), common::holed_torus(2, 4)));
    out.push((
        "defected holed torus 2x4".into(),
        common::defected_holed_torus(2, 4, 99),
    ));
    out.push((
        "grid with a scalar interior star".into(),
        common::scalared(&common::toric_planar(2, 2), "v:1,1", 0.2),
    ));
    out.push((
        "defected grid with a scalar interior star".into(),
        common::scalared(&common::defected_planar(2, 2, 101), "v:1,1", -0.2),
    ));
    for i in 0..4u64 {
        let (inst, _) = common::classical_family(i as usize % 3, 110 + i);
        out.push((format!("classical family #{i}"), inst));
    }
    for s in 0..3u64 {
        out.push((
            format!("scrambled mixed grid #{s}"),
            common::scrambled(
                &common::scalared(&common::defected_planar(2, 2, 120 + s), "v:1,1", 0.15),
                130 + s,
            ),
        ));
    }
    out
}

/// Thirty punctured-branch instances (scrambled grids, holed tori, scalar
/// holes, classical mixes; up to 16 qubits) synthesize to the exact ground
/// energy, and re-measurement differences sit exactly on the corrected
/// sites.
#[test]
fn pipelines_land_on_exact_energies() {
    let roster = pipeline_roster();
    assert_eq!(roster.len(), 30);
    let opts = PipelineOptions::default();
    let mut total_corrections = 0usize;
    let mut worst: f64 = 0.0;
    for (i, (name, inst)) in roster.iter().enumerate() {
        assert!(inst.n_qubits() <= 16, "{name}: {} qubits", inst.n_qubits());
        let (_, report) = full_pipeline(inst, None, 7 + i as u64, &opts)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(report.branch, Branch::Punctured, "{name}");
        assert!(report.all_passed(), "{name}: {:?}", report.checks);
        let exact = inst.exact_ground_energy().unwrap();
        let gap = (report.final_energy - exact).abs();
        assert!(gap <= 1e-6, "{name}: synthesized {}, exact {exact}", report.final_energy);
        worst = worst.max(gap);

        // Support of the before/after re-measurement difference: exactly
        // the sites whose first measurement came out excited.
        let corrected: BTreeSet<String> = report
            .corrections
            .iter()
            .map(|op| site_name(&inst.complex, op.target))
            .collect();
        let excited: BTreeSet<String> = report
            .measurements
            .iter()
            .filter(|(_, l)| **l == -1)
            .map(|(s, _)| s.clone())
            .collect();
        assert_eq!(corrected, excited, "{name}: corrections vs excited sites");
        total_corrections += report.corrections.len();
    }
    assert!(total_corrections > 0, "no correction ever fired across the roster");
    println!(
        "PASS — 30 pipelines within 1e-6 of exact (worst {worst:.2e}); {total_corrections} corrections, support matches excitations"
    );
}

/// Identical seeds give identical measurement sequences on both backends,
/// for the closed-surface synthesis and the full pipeline alike.
#[test]
fn seeded_runs_are_deterministic_across_backends() {
    let mut log_events = 0usize;
    let closed: Vec<(String, CLHInstance)> = vec![
        ("torus 2x2".into(), common::toric_torus(2, 2)),
        ("torus 2x3".into(), common::toric_torus(2, 3)),
        ("defected torus 2x3".into(), common::defected_torus(2, 3, 7)),
    ];
    for (name, inst) in &closed {
        assert!(inst.n_qubits() <= 14);
        for seed in [1u64, 2, 3] {
            let (sa, ra) = toric_groundstate(inst, seed, Backend::Stabilizer, 20).unwrap();
            let (sb, rb) = toric_groundstate(inst, seed, Backend::Statevector, 20).unwrap();
            assert_eq!(sa.outcome_log, sb.outcome_log, "{name} seed {seed}");
            assert_eq!(ra.measurements, rb.measurements, "{name} seed {seed}");
            assert!((ra.final_energy - rb.final_energy).abs() <= 1e-9);
            let (sc, _) = toric_groundstate(inst, seed, Backend::Stabilizer, 20).unwrap();
            assert_eq!(sa.outcome_log, sc.outcome_log, "{name} seed {seed}: rerun");
            log_events += sa.outcome_log.len();
        }
    }

    let punctured: Vec<(String, CLHInstance)> = vec![
        ("holed torus 2x3".into(), common::holed_torus(2, 3)),
        ("defected holed torus 2x3".into(), common::defected_holed_torus(2, 3, 5)),
        ("classical family".into(), common::classical_family(1, 21).0),
    ];
    for (name, inst) in &punctured {
        assert!(inst.n_qubits() <= 14);
        for seed in [0u64, 1, 2] {
            let stab = PipelineOptions {
                backend: BackendChoice::Stabilizer,
                ..PipelineOptions::default()
            };
            let sv = PipelineOptions {
                backend: BackendChoice::Statevector,
                ..PipelineOptions::default()
            };
            let (sa, ra) = full_pipeline(inst, None, seed, &stab).unwrap();
            let (sb, rb) = full_pipeline(inst, None, seed, &sv).unwrap();
            assert_eq!(sa.outcome_log, sb.outcome_log, "{name} seed {seed}");
            assert_eq!(ra.measurements, rb.measurements, "{name} seed {seed}");
            assert_eq!(ra.corrections.len(), rb.corrections.len());
            assert!((ra.final_energy - rb.final_energy).abs() <= 1e-9, "{name} seed {seed}");
            log_events += sa.outcome_log.len();
        }
    }
    println!(
        "PASS — stabilizer and statevector agree on {log_events} logged outcomes across 9 closed + 9 pipeline runs"
    );
}

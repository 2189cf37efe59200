//! Shared instance builders for the integration suites.

#![allow(dead_code)]

use clh2d::clh_instance::{
    defected_toric_instance, scramble, toric_instance, CLHInstance, DefectCoefficients, LocalTerm,
    TermSite,
};
use clh2d::linalg;
use clh2d::surface_complex::{planar_grid, torus_grid, SurfaceComplex};

pub fn torus(n: usize, m: usize) -> SurfaceComplex {
    torus_grid(n, m).unwrap()
}

pub fn planar(n: usize, m: usize) -> SurfaceComplex {
    planar_grid(n, m).unwrap()
}

/// Canonical toric code on a closed `n × m` torus.
pub fn toric_torus(n: usize, m: usize) -> CLHInstance {
    toric_instance(&torus(n, m)).unwrap()
}

/// Canonical toric code on an open `n × m` grid.
pub fn toric_planar(n: usize, m: usize) -> CLHInstance {
    toric_instance(&planar(n, m)).unwrap()
}

/// Defected toric instance on the torus with seeded random coefficients.
pub fn defected_torus(n: usize, m: usize, seed: u64) -> CLHInstance {
    let complex = torus(n, m);
    let coeffs = DefectCoefficients::random(&complex, seed);
    defected_toric_instance(&complex, &coeffs).unwrap()
}

/// Defected instance on the open grid.
pub fn defected_planar(n: usize, m: usize, seed: u64) -> CLHInstance {
    let complex = planar(n, m);
    let coeffs = DefectCoefficients::random(&complex, seed);
    defected_toric_instance(&complex, &coeffs).unwrap()
}

/// Replace the term at the named vertex or face with `c · I`, keeping its
/// qubit list.
pub fn scalared(instance: &CLHInstance, site_name: &str, c: f64) -> CLHInstance {
    let bare = |site: TermSite| match site {
        TermSite::Star(v) => instance.complex.vertex_name(v),
        TermSite::Plaquette(f) => instance.complex.face_name(f),
    };
    let term = instance
        .terms()
        .iter()
        .find(|t| bare(t.site) == site_name)
        .unwrap_or_else(|| panic!("no term at {site_name}"))
        .clone();
    let dim = term.matrix.nrows();
    let scalar = LocalTerm {
        site: term.site,
        qubits: term.qubits,
        matrix: linalg::eye(dim).mapv(|x| x * c),
    };
    instance.with_replaced_term(scalar).unwrap()
}

/// Canonical toric code on the `n × m` torus with one star term replaced by
/// `0.3 · I`, opening a coboundary route to the interior.
pub fn holed_torus(n: usize, m: usize) -> CLHInstance {
    scalared(&toric_torus(n, m), "v:0,0", 0.3)
}

/// Defected variant of [`holed_torus`].
pub fn defected_holed_torus(n: usize, m: usize, seed: u64) -> CLHInstance {
    scalared(&defected_torus(n, m, seed), "v:0,0", 0.3)
}

/// A defected instance with a prescribed number of classical qubits
/// injected by scalaring whole terms. Three families, cycled by `family`:
///
/// * `0` — open 2×2 grid, both stars on the top edge scalared → their
///   shared edge sees only trivial star actions and only one plaquette,
///   which acts along a line: **1** classical qubit;
/// * `1` — open 2×2 grid, the corner plaquette scalared → its two
///   perimeter edges see no other face: **2** classical qubits;
/// * `2` — open 1×2 grid, one end plaquette scalared → its three
///   perimeter edges become classical: **3** classical qubits.
pub fn classical_family(family: usize, seed: u64) -> (CLHInstance, usize) {
    match family % 3 {
        0 => {
            let base = defected_planar(2, 2, seed);
            let one = scalared(&base, "v:0,0", 0.2);
            (scalared(&one, "v:1,0", -0.15), 1)
        }
        1 => {
            let base = defected_planar(2, 2, seed);
            (scalared(&base, "f:0,0", 0.25), 2)
        }
        _ => {
            let base = defected_planar(1, 2, seed);
            (scalared(&base, "f:0,0", -0.1), 3)
        }
    }
}

/// Scramble every edge frame of `instance` with Haar unitaries.
pub fn scrambled(instance: &CLHInstance, seed: u64) -> CLHInstance {
    scramble(instance, seed).unwrap()
}

//! Combinatorial 2D polygonal complexes with qubits on edges.
//!
//! A [`SurfaceComplex`] stores vertices, edges (unordered vertex pairs) and
//! faces (cyclic edge walks). Validation enforces the surface conditions:
//!
//! * every face boundary is a closed simple cycle of length ≥ 3;
//! * every edge lies in exactly one or exactly two faces;
//! * two distinct faces share at most one edge, and two distinct edges share
//!   at most one vertex.
//!
//! On top of the incidence data the module provides the traversal primitives
//! the rest of the crate is built on: shortest **paths** (star sequences in
//! the 1-skeleton), **copaths** (face sequences in the dual graph), and
//! **ribbons** — edge sequences `(e_0, …, e_m)` in which each consecutive
//! pair `e_{i−1}, e_i` shares both a star `s_i` and a plaquette `p_i`. Any
//! simple path or copath can be completed to a ribbon by inserting, around
//! each pivot, the fan of edges between its two incident path edges; the fan
//! is routed through the *link* of the pivot (the cycle or chain formed by
//! the edges and faces around a vertex, dually around a face).
//!
//! All searches are breadth-first with smallest-id tie-breaking, so every
//! traversal is deterministic without a seed.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Vertex handle (dense index into the complex's vertex table).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex(pub usize);

/// Edge handle; edges carry the qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub usize);

/// Face handle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Face(pub usize);

/// Errors from complex construction and traversal.
#[derive(Debug, Error)]
pub enum ComplexError {
    /// An edge belongs to three or more faces.
    #[error("non-surface: edge {edge} lies in {count} faces")]
    NonSurface { edge: String, count: usize },
    /// A face boundary walk is open, too short, or repeats an edge.
    #[error("bad polygon: face {face}: {reason}")]
    BadPolygon { face: String, reason: String },
    /// Two faces share more than one edge, or two edges share more than one
    /// vertex.
    #[error("intersection violation: {what}")]
    IntersectionViolation { what: String },
    /// A referenced id was never declared.
    #[error("unknown id: {what}")]
    UnknownId { what: String },
    /// Duplicate id in a declaration list.
    #[error("duplicate id: {what}")]
    DuplicateId { what: String },
    /// An edge belongs to no face.
    #[error("dangling edge {edge}: belongs to no face")]
    DanglingEdge { edge: String },
    /// Grid generator called with a size that cannot close up.
    #[error("grid size too small: {what}")]
    SizeTooSmall { what: String },
    /// No path/copath exists between the requested endpoints.
    #[error("unreachable: {what}")]
    Unreachable { what: String },
    /// Ribbon completion requires a simple (non-self-intersecting) input.
    #[error("not simple: {what}")]
    NotSimple { what: String },
    /// The link of a pivot is broken, so no fan connects the two edges.
    #[error("ribbon blocked at {what}: link is disconnected there")]
    RibbonBlocked { what: String },
}

/// A finite 2D polygonal complex. Immutable after construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceComplex {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
    face_names: Vec<String>,
    /// Endpoints of each edge (unordered; stored with smaller index first).
    edge_vertices: Vec<[usize; 2]>,
    /// Boundary walk of each face, as edge indices in cyclic order.
    face_edges: Vec<Vec<usize>>,
    /// Derived: faces containing each edge (1 or 2 entries, ascending).
    edge_faces: Vec<Vec<usize>>,
    /// Derived: edges attached to each vertex (the star), ascending.
    vertex_edges: Vec<Vec<usize>>,
}

/// A path in the 1-skeleton: stars `s_0, …, s_r` with shared edges
/// `e_1, …, e_r`, plus an optional trailing edge used when the path ends *on*
/// an edge rather than at a star (the far endpoint is then not listed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub stars: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// When set, the walk continues from the last star across this edge and
    /// stops there (used for walks that terminate on a special edge).
    pub tail: Option<Edge>,
}

/// A path in the dual graph: plaquettes `p_0, …, p_r` with shared edges
/// `e_1, …, e_r`, plus an optional trailing edge for walks that exit through
/// the topological boundary (no face on the far side).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Copath {
    pub faces: Vec<Face>,
    pub edges: Vec<Edge>,
    /// When set, the walk continues from the last face across this edge and
    /// stops there.
    pub tail: Option<Edge>,
}

/// A ribbon: edges `(e_0, …, e_m)` with pivot stars `s_1, …, s_m` and pivot
/// plaquettes `p_1, …, p_m`; `e_{i−1}` and `e_i` share both `s_i` and `p_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ribbon {
    pub edges: Vec<Edge>,
    pub stars: Vec<Vertex>,
    pub faces: Vec<Face>,
}

/// Raw input format for [`build_complex`]: ids are arbitrary strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawComplex {
    pub vertices: Vec<String>,
    /// `[edge id, endpoint id, endpoint id]`.
    pub edges: Vec<(String, String, String)>,
    /// `[face id, boundary edge ids in walk order]`.
    pub faces: Vec<(String, Vec<String>)>,
}

/// Validate raw incidence lists into a [`SurfaceComplex`], enforcing every
/// invariant including the strict intersection conditions.
pub fn build_complex(raw: &RawComplex) -> Result<SurfaceComplex, Vec<ComplexError>> {
    match build_complex_lenient(raw) {
        Ok((_, warnings)) if !warnings.is_empty() => Err(warnings),
        Ok((c, _)) => Ok(c),
        Err(errors) => Err(errors),
    }
}

/// Like [`build_complex`], but the intersection conditions (two faces
/// sharing ≥ 2 edges, two edges sharing both endpoints) are returned as
/// warnings instead of errors.
///
/// Wrap-around grids of circumference 2 — the standard desk-scale toric
/// codes — inevitably contain parallel edges and doubly-adjacent faces while
/// still being perfectly good closed surfaces; every algorithm in this crate
/// handles them, so generators accept them and report the findings.
pub fn build_complex_lenient(
    raw: &RawComplex,
) -> Result<(SurfaceComplex, Vec<ComplexError>), Vec<ComplexError>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    let mut vertex_index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, v) in raw.vertices.iter().enumerate() {
        if vertex_index.insert(v.as_str(), i).is_some() {
            errors.push(ComplexError::DuplicateId {
                what: format!("vertex {v}"),
            });
        }
    }

    let mut edge_index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut edge_vertices: Vec<[usize; 2]> = Vec::new();
    for (i, (id, a, b)) in raw.edges.iter().enumerate() {
        if edge_index.insert(id.as_str(), i).is_some() {
            errors.push(ComplexError::DuplicateId {
                what: format!("edge {id}"),
            });
        }
        let mut pair = [usize::MAX, usize::MAX];
        for (slot, name) in [(0, a), (1, b)] {
            match vertex_index.get(name.as_str()) {
                Some(&vi) => pair[slot] = vi,
                None => errors.push(ComplexError::UnknownId {
                    what: format!("edge {id} endpoint {name}"),
                }),
            }
        }
        if pair[0] == pair[1] && pair[0] != usize::MAX {
            // A loop edge breaks even the lenient structure (its two star
            // slots coincide), so it is always a hard error.
            errors.push(ComplexError::IntersectionViolation {
                what: format!("edge {id} is a loop at vertex {a}"),
            });
        }
        if pair[0] > pair[1] {
            pair.swap(0, 1);
        }
        edge_vertices.push(pair);
    }

    // Two distinct edges may share at most one vertex, i.e. no parallel
    // edges between the same vertex pair.
    let mut seen_pairs: BTreeMap<[usize; 2], &str> = BTreeMap::new();
    for (i, (id, _, _)) in raw.edges.iter().enumerate() {
        let pair = edge_vertices[i];
        if pair[0] == usize::MAX || pair[1] == usize::MAX || pair[0] == pair[1] {
            continue;
        }
        if let Some(prev) = seen_pairs.insert(pair, id.as_str()) {
            warnings.push(ComplexError::IntersectionViolation {
                what: format!("edges {prev} and {id} share both endpoints"),
            });
        }
    }

    let mut face_edges: Vec<Vec<usize>> = Vec::new();
    let mut face_index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, (id, walk)) in raw.faces.iter().enumerate() {
        if face_index.insert(id.as_str(), i).is_some() {
            errors.push(ComplexError::DuplicateId {
                what: format!("face {id}"),
            });
        }
        let mut idxs = Vec::with_capacity(walk.len());
        let mut ok = true;
        for e in walk {
            match edge_index.get(e.as_str()) {
                Some(&ei) => idxs.push(ei),
                None => {
                    errors.push(ComplexError::UnknownId {
                        what: format!("face {id} edge {e}"),
                    });
                    ok = false;
                }
            }
        }
        if ok {
            if idxs.len() < 3 {
                errors.push(ComplexError::BadPolygon {
                    face: id.clone(),
                    reason: format!("boundary has {} edges, need at least 3", idxs.len()),
                });
            }
            let distinct: BTreeSet<usize> = idxs.iter().cloned().collect();
            if distinct.len() != idxs.len() {
                errors.push(ComplexError::BadPolygon {
                    face: id.clone(),
                    reason: "boundary repeats an edge".into(),
                });
            }
            // The walk must be a closed cycle: consecutive edges share a
            // vertex, and the walk returns to its start.
            if idxs.len() >= 3 && distinct.len() == idxs.len() {
                let m = idxs.len();
                let mut closed = true;
                for j in 0..m {
                    let cur = edge_vertices[idxs[j]];
                    let nxt = edge_vertices[idxs[(j + 1) % m]];
                    let share = cur.iter().any(|v| nxt.contains(v));
                    if !share {
                        closed = false;
                    }
                }
                if !closed {
                    errors.push(ComplexError::BadPolygon {
                        face: id.clone(),
                        reason: "boundary walk is not a closed cycle".into(),
                    });
                }
            }
        }
        face_edges.push(idxs);
    }

    // Edge→face incidence and the surface condition.
    let mut edge_faces: Vec<Vec<usize>> = vec![Vec::new(); raw.edges.len()];
    for (fi, idxs) in face_edges.iter().enumerate() {
        for &e in idxs {
            edge_faces[e].push(fi);
        }
    }
    for (ei, fs) in edge_faces.iter().enumerate() {
        if fs.len() > 2 {
            errors.push(ComplexError::NonSurface {
                edge: raw.edges[ei].0.clone(),
                count: fs.len(),
            });
        }
        if fs.is_empty() {
            errors.push(ComplexError::DanglingEdge {
                edge: raw.edges[ei].0.clone(),
            });
        }
    }

    // Two distinct faces share at most one edge.
    let mut pair_shared: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (ei, fs) in edge_faces.iter().enumerate() {
        if fs.len() == 2 {
            pair_shared.entry((fs[0], fs[1])).or_default().push(ei);
        }
    }
    for ((f1, f2), es) in &pair_shared {
        if es.len() > 1 {
            warnings.push(ComplexError::IntersectionViolation {
                what: format!(
                    "faces {} and {} share {} edges",
                    raw.faces[*f1].0,
                    raw.faces[*f2].0,
                    es.len()
                ),
            });
        }
    }

    if !errors.is_empty() {
        errors.extend(warnings);
        return Err(errors);
    }

    let mut vertex_edges: Vec<Vec<usize>> = vec![Vec::new(); raw.vertices.len()];
    for (ei, vs) in edge_vertices.iter().enumerate() {
        vertex_edges[vs[0]].push(ei);
        vertex_edges[vs[1]].push(ei);
    }

    Ok((
        SurfaceComplex {
            vertex_names: raw.vertices.clone(),
            edge_names: raw.edges.iter().map(|(id, _, _)| id.clone()).collect(),
            face_names: raw.faces.iter().map(|(id, _)| id.clone()).collect(),
            edge_vertices,
            face_edges,
            edge_faces,
            vertex_edges,
        },
        warnings,
    ))
}

impl SurfaceComplex {
    pub fn n_vertices(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_names.len()
    }

    pub fn n_faces(&self) -> usize {
        self.face_names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.n_vertices()).map(Vertex)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> {
        (0..self.n_edges()).map(Edge)
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> {
        (0..self.n_faces()).map(Face)
    }

    pub fn vertex_name(&self, v: Vertex) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn edge_name(&self, e: Edge) -> &str {
        &self.edge_names[e.0]
    }

    pub fn face_name(&self, f: Face) -> &str {
        &self.face_names[f.0]
    }

    /// Look up a vertex by name.
    pub fn vertex_by_name(&self, name: &str) -> Option<Vertex> {
        self.vertex_names.iter().position(|n| n == name).map(Vertex)
    }

    /// Look up an edge by name.
    pub fn edge_by_name(&self, name: &str) -> Option<Edge> {
        self.edge_names.iter().position(|n| n == name).map(Edge)
    }

    /// Look up a face by name.
    pub fn face_by_name(&self, name: &str) -> Option<Face> {
        self.face_names.iter().position(|n| n == name).map(Face)
    }

    /// The two endpoints of an edge (smaller index first).
    pub fn endpoints(&self, e: Edge) -> [Vertex; 2] {
        let [a, b] = self.edge_vertices[e.0];
        [Vertex(a), Vertex(b)]
    }

    /// The star of a vertex: attached edges in ascending order.
    pub fn star(&self, v: Vertex) -> Vec<Edge> {
        self.vertex_edges[v.0].iter().map(|&e| Edge(e)).collect()
    }

    /// The boundary walk of a face, in cyclic order.
    pub fn face_boundary(&self, f: Face) -> Vec<Edge> {
        self.face_edges[f.0].iter().map(|&e| Edge(e)).collect()
    }

    /// The faces containing an edge (one or two, ascending).
    pub fn faces_of_edge(&self, e: Edge) -> Vec<Face> {
        self.edge_faces[e.0].iter().map(|&f| Face(f)).collect()
    }

    /// Degree of a vertex.
    pub fn vertex_degree(&self, v: Vertex) -> usize {
        self.vertex_edges[v.0].len()
    }

    /// Degree (boundary length) of a face.
    pub fn face_degree(&self, f: Face) -> usize {
        self.face_edges[f.0].len()
    }

    /// Maximum of all vertex and face degrees — the locality parameter `k`
    /// of any instance on this complex.
    pub fn max_degree(&self) -> usize {
        let dv = (0..self.n_vertices())
            .map(|v| self.vertex_edges[v].len())
            .max()
            .unwrap_or(0);
        let df = (0..self.n_faces())
            .map(|f| self.face_edges[f].len())
            .max()
            .unwrap_or(0);
        dv.max(df)
    }

    /// Edges belonging to exactly one face.
    pub fn topological_boundary(&self) -> Vec<Edge> {
        (0..self.n_edges())
            .filter(|&e| self.edge_faces[e].len() == 1)
            .map(Edge)
            .collect()
    }

    /// True when every edge lies in exactly two faces.
    pub fn is_closed(&self) -> bool {
        self.edge_faces.iter().all(|fs| fs.len() == 2)
    }

    /// The other endpoint of `e` as seen from `v`.
    pub fn other_endpoint(&self, e: Edge, v: Vertex) -> Vertex {
        let [a, b] = self.endpoints(e);
        if a == v {
            b
        } else {
            a
        }
    }

    /// The other face of `e` as seen from `f`, if `e` is interior.
    pub fn other_face(&self, e: Edge, f: Face) -> Option<Face> {
        let fs = self.faces_of_edge(e);
        fs.into_iter().find(|&g| g != f)
    }

    /// Connected components of the complex (edges connected through shared
    /// vertices). Returns one edge set per component, each ascending;
    /// components are ordered by their smallest edge.
    pub fn components(&self) -> Vec<Vec<Edge>> {
        let n = self.n_edges();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = next;
            next += 1;
            let mut queue = VecDeque::from([start]);
            comp[start] = id;
            while let Some(e) = queue.pop_front() {
                for &v in &self.edge_vertices[e] {
                    for &e2 in &self.vertex_edges[v] {
                        if comp[e2] == usize::MAX {
                            comp[e2] = id;
                            queue.push_back(e2);
                        }
                    }
                }
            }
        }
        let mut out = vec![Vec::new(); next];
        for (e, &c) in comp.iter().enumerate() {
            out[c].push(Edge(e));
        }
        out
    }

    /// The link of a vertex: the cyclic (interior vertex) or linear
    /// (boundary vertex) arrangement of its edges, where consecutive edges
    /// are the two sides of a shared face at the vertex.
    ///
    /// Returns the edges in link order plus a flag saying whether the link
    /// closes up into a cycle. For a broken (disconnected) link, returns
    /// `None`.
    pub fn vertex_link(&self, v: Vertex) -> Option<(Vec<Edge>, bool)> {
        let edges = self.star(v);
        if edges.is_empty() {
            return None;
        }
        if edges.len() == 1 {
            return Some((edges, false));
        }
        // Adjacency between edges at v through faces at v: each face
        // containing v pairs up the two boundary edges through v.
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let faces_at_v: BTreeSet<usize> = edges
            .iter()
            .flat_map(|e| self.edge_faces[e.0].iter().cloned())
            .collect();
        for f in faces_at_v {
            let walk = &self.face_edges[f];
            let m = walk.len();
            for j in 0..m {
                let a = walk[j];
                let b = walk[(j + 1) % m];
                // Consecutive boundary edges share a vertex; if it is v,
                // they are neighbors in the link.
                let shared = self.shared_vertex(Edge(a), Edge(b));
                if shared == Some(v) {
                    adj.entry(a).or_default().push(b);
                    adj.entry(b).or_default().push(a);
                }
            }
        }
        // Walk the link starting from a degree-1 node (chain) or from the
        // smallest edge (cycle).
        let start = edges
            .iter()
            .map(|e| e.0)
            .find(|e| adj.get(e).map_or(0, |v| v.len()) <= 1)
            .unwrap_or_else(|| edges.iter().map(|e| e.0).min().unwrap());
        let mut order = vec![start];
        let mut prev = usize::MAX;
        loop {
            let cur = *order.last().unwrap();
            let nbrs = adj.get(&cur).cloned().unwrap_or_default();
            let nxt = nbrs
                .iter()
                .cloned()
                .filter(|&n| n != prev)
                .min_by_key(|&n| n);
            match nxt {
                Some(n) if n == start => return Some((order.into_iter().map(Edge).collect(), true)),
                Some(n) => {
                    prev = cur;
                    order.push(n);
                    if order.len() > edges.len() {
                        return None; // malformed link
                    }
                }
                None => {
                    // Chain ended.
                    if order.len() == edges.len() {
                        return Some((order.into_iter().map(Edge).collect(), false));
                    }
                    return None; // disconnected link
                }
            }
        }
    }

    /// The shared vertex of two edges, if any.
    pub fn shared_vertex(&self, a: Edge, b: Edge) -> Option<Vertex> {
        if a == b {
            return None;
        }
        let av = self.endpoints(a);
        let bv = self.endpoints(b);
        av.into_iter().find(|v| bv.contains(v))
    }

    /// The shared face of two edges, if any.
    pub fn shared_face(&self, a: Edge, b: Edge) -> Option<Face> {
        if a == b {
            return None;
        }
        let af = self.faces_of_edge(a);
        let bf = self.faces_of_edge(b);
        af.into_iter().find(|f| bf.contains(f))
    }
}

/// Endpoint selector for [`find_copath`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CopathTarget {
    /// A specific plaquette.
    Plaquette(Face),
    /// Any topological-boundary edge; the copath then ends with a tail edge.
    TopologicalBoundary,
}

/// Endpoint selector for [`find_path`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathTarget {
    /// A specific star.
    Star(Vertex),
    /// Any of the listed edges; the path then ends with a tail edge into the
    /// first one reached.
    AnyEdge,
}

/// Breadth-first copath from a plaquette to a target, deterministic with
/// smallest-id tie-breaking. Same-face-twice requests yield the empty copath.
pub fn find_copath(
    complex: &SurfaceComplex,
    from: Face,
    to: CopathTarget,
) -> Result<Copath, ComplexError> {
    if let CopathTarget::Plaquette(t) = to {
        if t == from {
            return Ok(Copath {
                faces: vec![from],
                edges: vec![],
                tail: None,
            });
        }
    }
    // BFS over faces; edges tried in ascending order.
    let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new(); // face -> (prev face, via edge)
    let mut queue = VecDeque::from([from.0]);
    let mut seen: BTreeSet<usize> = BTreeSet::from([from.0]);
    while let Some(f) = queue.pop_front() {
        // Check boundary-exit first so a boundary-adjacent start exits
        // immediately through its smallest boundary edge.
        if to == CopathTarget::TopologicalBoundary {
            if let Some(&exit) = complex.face_edges[f]
                .iter()
                .filter(|&&e| complex.edge_faces[e].len() == 1)
                .min()
            {
                let mut faces = vec![Face(f)];
                let mut edges = Vec::new();
                let mut cur = f;
                while let Some(&(pf, pe)) = prev.get(&cur) {
                    faces.push(Face(pf));
                    edges.push(Edge(pe));
                    cur = pf;
                }
                faces.reverse();
                edges.reverse();
                return Ok(Copath {
                    faces,
                    edges,
                    tail: Some(Edge(exit)),
                });
            }
        }
        for &e in &complex.face_edges[f] {
            if let Some(g) = complex.other_face(Edge(e), Face(f)) {
                if seen.insert(g.0) {
                    prev.insert(g.0, (f, e));
                    if to == CopathTarget::Plaquette(g) {
                        let mut faces = vec![g];
                        let mut edges = Vec::new();
                        let mut cur = g.0;
                        while let Some(&(pf, pe)) = prev.get(&cur) {
                            faces.push(Face(pf));
                            edges.push(Edge(pe));
                            cur = pf;
                        }
                        faces.reverse();
                        edges.reverse();
                        return Ok(Copath {
                            faces,
                            edges,
                            tail: None,
                        });
                    }
                    queue.push_back(g.0);
                }
            }
        }
    }
    Err(ComplexError::Unreachable {
        what: match to {
            CopathTarget::Plaquette(t) => format!(
                "no copath from face {} to face {}",
                complex.face_name(from),
                complex.face_name(t)
            ),
            CopathTarget::TopologicalBoundary => format!(
                "no copath from face {} to the topological boundary",
                complex.face_name(from)
            ),
        },
    })
}

/// Breadth-first path between stars in the 1-skeleton, deterministic with
/// smallest-id tie-breaking. Same-star-twice requests yield the empty path.
pub fn find_path(
    complex: &SurfaceComplex,
    from: Vertex,
    to: Vertex,
) -> Result<Path, ComplexError> {
    if from == to {
        return Ok(Path {
            stars: vec![from],
            edges: vec![],
            tail: None,
        });
    }
    let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut queue = VecDeque::from([from.0]);
    let mut seen: BTreeSet<usize> = BTreeSet::from([from.0]);
    while let Some(v) = queue.pop_front() {
        for &e in &complex.vertex_edges[v] {
            let u = complex.other_endpoint(Edge(e), Vertex(v));
            if seen.insert(u.0) {
                prev.insert(u.0, (v, e));
                if u == to {
                    let mut stars = vec![u];
                    let mut edges = Vec::new();
                    let mut cur = u.0;
                    while let Some(&(pv, pe)) = prev.get(&cur) {
                        stars.push(Vertex(pv));
                        edges.push(Edge(pe));
                        cur = pv;
                    }
                    stars.reverse();
                    edges.reverse();
                    return Ok(Path {
                        stars,
                        edges,
                        tail: None,
                    });
                }
                queue.push_back(u.0);
            }
        }
    }
    Err(ComplexError::Unreachable {
        what: format!(
            "no path from vertex {} to vertex {}",
            complex.vertex_name(from),
            complex.vertex_name(to)
        ),
    })
}

impl Path {
    /// All edges of the walk including the tail.
    pub fn walk_edges(&self) -> Vec<Edge> {
        let mut es = self.edges.clone();
        if let Some(t) = self.tail {
            es.push(t);
        }
        es
    }

    /// True when no edge repeats.
    pub fn is_simple(&self) -> bool {
        let es = self.walk_edges();
        let set: BTreeSet<Edge> = es.iter().cloned().collect();
        set.len() == es.len()
    }
}

impl Copath {
    /// All edges of the walk including the tail.
    pub fn walk_edges(&self) -> Vec<Edge> {
        let mut es = self.edges.clone();
        if let Some(t) = self.tail {
            es.push(t);
        }
        es
    }

    /// True when no edge repeats.
    pub fn is_simple(&self) -> bool {
        let es = self.walk_edges();
        let set: BTreeSet<Edge> = es.iter().cloned().collect();
        set.len() == es.len()
    }
}

impl Ribbon {
    /// The derived path `γ`: endpoint stars plus pivot stars with duplicates
    /// collapsed.
    pub fn derived_path(&self, complex: &SurfaceComplex) -> Vec<Vertex> {
        if self.edges.is_empty() {
            return Vec::new();
        }
        let mut out: Vec<Vertex> = Vec::new();
        if let Some(&s1) = self.stars.first() {
            // s_0 = the endpoint of e_0 that is not the first pivot.
            let first = self.edges[0];
            out.push(complex.other_endpoint(first, s1));
        }
        for &s in &self.stars {
            if out.last() != Some(&s) {
                out.push(s);
            }
        }
        if let Some(&sm) = self.stars.last() {
            let last = *self.edges.last().unwrap();
            let far = complex.other_endpoint(last, sm);
            if out.last() != Some(&far) {
                out.push(far);
            }
        }
        out
    }

    /// The derived copath `γ*`: endpoint faces (when they exist) plus pivot
    /// faces with duplicates collapsed.
    pub fn derived_copath(&self, complex: &SurfaceComplex) -> Vec<Face> {
        if self.edges.is_empty() {
            return Vec::new();
        }
        let mut out: Vec<Face> = Vec::new();
        if let Some(&p1) = self.faces.first() {
            if let Some(p0) = complex.other_face(self.edges[0], p1) {
                out.push(p0);
            }
        }
        for &p in &self.faces {
            if out.last() != Some(&p) {
                out.push(p);
            }
        }
        if let Some(&pm) = self.faces.last() {
            if let Some(far) = complex.other_face(*self.edges.last().unwrap(), pm) {
                if out.last() != Some(&far) {
                    out.push(far);
                }
            }
        }
        out
    }

    /// Check the defining invariant: each consecutive edge pair shares the
    /// listed star and plaquette.
    pub fn validate(&self, complex: &SurfaceComplex) -> bool {
        if self.edges.len() != self.stars.len() + 1 || self.stars.len() != self.faces.len() {
            return self.edges.len() <= 1 && self.stars.is_empty() && self.faces.is_empty();
        }
        for i in 1..self.edges.len() {
            let (a, b) = (self.edges[i - 1], self.edges[i]);
            let s = self.stars[i - 1];
            let p = self.faces[i - 1];
            let sa = complex.endpoints(a);
            let sb = complex.endpoints(b);
            if !sa.contains(&s) || !sb.contains(&s) {
                return false;
            }
            if !complex.faces_of_edge(a).contains(&p) || !complex.faces_of_edge(b).contains(&p) {
                return false;
            }
        }
        true
    }
}

/// Route the fan between two edges around a pivot vertex: the sequence of
/// link edges from `a` to `b` (inclusive). In a cyclic link the shorter arc
/// wins (ties: the arc whose second edge has the smaller id).
fn fan_at_vertex(
    complex: &SurfaceComplex,
    v: Vertex,
    a: Edge,
    b: Edge,
) -> Result<Vec<Edge>, ComplexError> {
    let (order, cyclic) = complex
        .vertex_link(v)
        .ok_or_else(|| ComplexError::RibbonBlocked {
            what: format!("vertex {}", complex.vertex_name(v)),
        })?;
    let ia = order.iter().position(|&e| e == a);
    let ib = order.iter().position(|&e| e == b);
    let (ia, ib) = match (ia, ib) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(ComplexError::RibbonBlocked {
                what: format!("vertex {}", complex.vertex_name(v)),
            })
        }
    };
    let m = order.len();
    let forward: Vec<Edge> = if ia <= ib {
        order[ia..=ib].to_vec()
    } else if cyclic {
        order[ia..].iter().chain(order[..=ib].iter()).cloned().collect()
    } else {
        order[ib..=ia].iter().rev().cloned().collect()
    };
    if !cyclic {
        return Ok(forward);
    }
    // Cyclic link: compare both arcs.
    let backward: Vec<Edge> = if ia >= ib {
        order[ib..=ia].iter().rev().cloned().collect()
    } else {
        order[..=ia]
            .iter()
            .rev()
            .chain(order[ib..].iter().rev())
            .cloned()
            .collect()
    };
    debug_assert_eq!(forward.len() + backward.len(), m + 2);
    if forward.len() < backward.len() {
        Ok(forward)
    } else if backward.len() < forward.len() {
        Ok(backward)
    } else {
        let fa = forward.get(1).map(|e| e.0).unwrap_or(usize::MAX);
        let ba = backward.get(1).map(|e| e.0).unwrap_or(usize::MAX);
        if fa <= ba {
            Ok(forward)
        } else {
            Ok(backward)
        }
    }
}

/// Route the fan between two edges inside a pivot face: the boundary-walk
/// arc from `a` to `b` (inclusive), shorter arc first, ties by second edge.
fn fan_in_face(
    complex: &SurfaceComplex,
    f: Face,
    a: Edge,
    b: Edge,
) -> Result<Vec<Edge>, ComplexError> {
    let walk = complex.face_boundary(f);
    let ia = walk.iter().position(|&e| e == a);
    let ib = walk.iter().position(|&e| e == b);
    let (ia, ib) = match (ia, ib) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(ComplexError::RibbonBlocked {
                what: format!("face {}", complex.face_name(f)),
            })
        }
    };
    let m = walk.len();
    let mut forward = Vec::new();
    let mut j = ia;
    loop {
        forward.push(walk[j]);
        if j == ib {
            break;
        }
        j = (j + 1) % m;
    }
    let mut backward = Vec::new();
    let mut j = ia;
    loop {
        backward.push(walk[j]);
        if j == ib {
            break;
        }
        j = (j + m - 1) % m;
    }
    if forward.len() < backward.len() {
        Ok(forward)
    } else if backward.len() < forward.len() {
        Ok(backward)
    } else {
        let fa = forward.get(1).map(|e| e.0).unwrap_or(usize::MAX);
        let ba = backward.get(1).map(|e| e.0).unwrap_or(usize::MAX);
        if fa <= ba {
            Ok(forward)
        } else {
            Ok(backward)
        }
    }
}

/// Complete a simple path to a ribbon.
///
/// Around each interior pivot star the inserted edges form the fan between
/// the two incident path edges, so consecutive ribbon edges always share
/// both the pivot star and a face of the fan.
pub fn complete_path_to_ribbon(
    complex: &SurfaceComplex,
    path: &Path,
) -> Result<Ribbon, ComplexError> {
    if !path.is_simple() {
        return Err(ComplexError::NotSimple {
            what: "path repeats an edge".into(),
        });
    }
    let walk = path.walk_edges();
    if walk.len() <= 1 {
        return Ok(Ribbon {
            edges: walk,
            stars: vec![],
            faces: vec![],
        });
    }
    // Pivot of step i: the star shared by walk[i−1] and walk[i]. For the
    // regular body this is path.stars[i]; recompute from the edges so tails
    // are handled uniformly.
    let mut edges: Vec<Edge> = vec![walk[0]];
    let mut stars: Vec<Vertex> = Vec::new();
    let mut faces: Vec<Face> = Vec::new();
    for i in 1..walk.len() {
        let a = *edges.last().unwrap();
        let b = walk[i];
        let pivot = complex
            .shared_vertex(a, b)
            .ok_or_else(|| ComplexError::NotSimple {
                what: "consecutive path edges share no vertex".into(),
            })?;
        let fan = fan_at_vertex(complex, pivot, a, b)?;
        for w in fan.windows(2) {
            let f = complex
                .shared_face(w[0], w[1])
                .ok_or_else(|| ComplexError::RibbonBlocked {
                    what: format!("vertex {}", complex.vertex_name(pivot)),
                })?;
            edges.push(w[1]);
            stars.push(pivot);
            faces.push(f);
        }
    }
    Ok(Ribbon {
        edges,
        stars,
        faces,
    })
}

/// Complete a simple copath to a ribbon, dually to
/// [`complete_path_to_ribbon`]: fans are routed inside the pivot faces.
pub fn complete_copath_to_ribbon(
    complex: &SurfaceComplex,
    copath: &Copath,
) -> Result<Ribbon, ComplexError> {
    if !copath.is_simple() {
        return Err(ComplexError::NotSimple {
            what: "copath repeats an edge".into(),
        });
    }
    let walk = copath.walk_edges();
    if walk.len() <= 1 {
        return Ok(Ribbon {
            edges: walk,
            stars: vec![],
            faces: vec![],
        });
    }
    let mut edges: Vec<Edge> = vec![walk[0]];
    let mut stars: Vec<Vertex> = Vec::new();
    let mut faces: Vec<Face> = Vec::new();
    for i in 1..walk.len() {
        let a = *edges.last().unwrap();
        let b = walk[i];
        let pivot = complex
            .shared_face(a, b)
            .ok_or_else(|| ComplexError::NotSimple {
                what: "consecutive copath edges share no face".into(),
            })?;
        let fan = fan_in_face(complex, pivot, a, b)?;
        for w in fan.windows(2) {
            let s = complex
                .shared_vertex(w[0], w[1])
                .ok_or_else(|| ComplexError::RibbonBlocked {
                    what: format!("face {}", complex.face_name(pivot)),
                })?;
            edges.push(w[1]);
            stars.push(s);
            faces.push(pivot);
        }
    }
    Ok(Ribbon {
        edges,
        stars,
        faces,
    })
}

/// `n × m` torus grid: `n·m` vertices, `2·n·m` edges, `n·m` square faces,
/// closed. Vertex `(i, j)` for rows `i < n`, columns `j < m`; edge names
/// `h:i,j` (rightward from `(i, j)`) and `v:i,j` (downward); face `f:i,j`
/// has corners `(i, j)`–`(i+1, j+1)` with indices mod `(n, m)`.
pub fn torus_grid(n: usize, m: usize) -> Result<SurfaceComplex, ComplexError> {
    if n < 2 || m < 2 {
        return Err(ComplexError::SizeTooSmall {
            what: format!("torus grid needs n, m ≥ 2, got {n}×{m}"),
        });
    }
    let mut raw = RawComplex {
        vertices: Vec::new(),
        edges: Vec::new(),
        faces: Vec::new(),
    };
    let v = |i: usize, j: usize| format!("v:{},{}", i % n, j % m);
    for i in 0..n {
        for j in 0..m {
            raw.vertices.push(v(i, j));
        }
    }
    for i in 0..n {
        for j in 0..m {
            raw.edges
                .push((format!("h:{i},{j}"), v(i, j), v(i, (j + 1) % m)));
            raw.edges
                .push((format!("v:{i},{j}"), v(i, j), v((i + 1) % n, j)));
        }
    }
    for i in 0..n {
        for j in 0..m {
            raw.faces.push((
                format!("f:{i},{j}"),
                vec![
                    format!("h:{i},{j}"),
                    format!("v:{},{}", i, (j + 1) % m),
                    format!("h:{},{}", (i + 1) % n, j),
                    format!("v:{i},{j}"),
                ],
            ));
        }
    }
    build_complex_lenient(&raw)
        .map(|(c, _)| c)
        .map_err(|mut es| es.remove(0))
}

/// `n × m` planar grid: `(n+1)(m+1)` vertices, `n(m+1) + m(n+1)` edges,
/// `n·m` faces, with topological boundary. Naming as in [`torus_grid`]
/// without wrap-around.
pub fn planar_grid(n: usize, m: usize) -> Result<SurfaceComplex, ComplexError> {
    if n < 1 || m < 1 {
        return Err(ComplexError::SizeTooSmall {
            what: format!("planar grid needs n, m ≥ 1, got {n}×{m}"),
        });
    }
    let mut raw = RawComplex {
        vertices: Vec::new(),
        edges: Vec::new(),
        faces: Vec::new(),
    };
    let v = |i: usize, j: usize| format!("v:{i},{j}");
    for i in 0..=n {
        for j in 0..=m {
            raw.vertices.push(v(i, j));
        }
    }
    for i in 0..=n {
        for j in 0..m {
            raw.edges.push((format!("h:{i},{j}"), v(i, j), v(i, j + 1)));
        }
    }
    for i in 0..n {
        for j in 0..=m {
            raw.edges.push((format!("v:{i},{j}"), v(i, j), v(i + 1, j)));
        }
    }
    for i in 0..n {
        for j in 0..m {
            raw.faces.push((
                format!("f:{i},{j}"),
                vec![
                    format!("h:{i},{j}"),
                    format!("v:{},{}", i, j + 1),
                    format!("h:{},{}", i + 1, j),
                    format!("v:{i},{j}"),
                ],
            ));
        }
    }
    build_complex(&raw).map_err(|mut es| es.remove(0))
}

/// A single triangle: 3 vertices, 3 edges, 1 face — the smallest valid
/// complex. Useful as a disjoint attachment in test instances.
pub fn triangle(tag: &str) -> SurfaceComplex {
    let raw = RawComplex {
        vertices: (0..3).map(|i| format!("{tag}:v{i}")).collect(),
        edges: vec![
            (format!("{tag}:e0"), format!("{tag}:v0"), format!("{tag}:v1")),
            (format!("{tag}:e1"), format!("{tag}:v1"), format!("{tag}:v2")),
            (format!("{tag}:e2"), format!("{tag}:v2"), format!("{tag}:v0")),
        ],
        faces: vec![(
            format!("{tag}:f"),
            vec![
                format!("{tag}:e0"),
                format!("{tag}:e1"),
                format!("{tag}:e2"),
            ],
        )],
    };
    build_complex(&raw).expect("triangle is always valid")
}

/// Disjoint union of two complexes (names must not clash).
pub fn disjoint_union(
    a: &SurfaceComplex,
    b: &SurfaceComplex,
) -> Result<SurfaceComplex, Vec<ComplexError>> {
    let raw = RawComplex {
        vertices: a
            .vertex_names
            .iter()
            .chain(b.vertex_names.iter())
            .cloned()
            .collect(),
        edges: a
            .edge_names
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let [x, y] = a.edge_vertices[i];
                (
                    id.clone(),
                    a.vertex_names[x].clone(),
                    a.vertex_names[y].clone(),
                )
            })
            .chain(b.edge_names.iter().enumerate().map(|(i, id)| {
                let [x, y] = b.edge_vertices[i];
                (
                    id.clone(),
                    b.vertex_names[x].clone(),
                    b.vertex_names[y].clone(),
                )
            }))
            .collect(),
        faces: a
            .face_names
            .iter()
            .enumerate()
            .map(|(i, id)| {
                (
                    id.clone(),
                    a.face_edges[i]
                        .iter()
                        .map(|&e| a.edge_names[e].clone())
                        .collect(),
                )
            })
            .chain(b.face_names.iter().enumerate().map(|(i, id)| {
                (
                    id.clone(),
                    b.face_edges[i]
                        .iter()
                        .map(|&e| b.edge_names[e].clone())
                        .collect(),
                )
            }))
            .collect(),
    };
    build_complex_lenient(&raw).map(|(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_2x2_counts() {
        let c = torus_grid(2, 2).unwrap();
        assert_eq!(c.n_vertices(), 4);
        assert_eq!(c.n_edges(), 8);
        assert_eq!(c.n_faces(), 4);
        assert!(c.is_closed());
        assert!(c.topological_boundary().is_empty());
    }

    #[test]
    fn torus_3x3_degrees() {
        let c = torus_grid(3, 3).unwrap();
        assert_eq!(c.n_vertices(), 9);
        assert_eq!(c.n_edges(), 18);
        assert_eq!(c.n_faces(), 9);
        for v in 0..9 {
            assert_eq!(c.vertex_degree(Vertex(v)), 4);
        }
        for f in 0..9 {
            assert_eq!(c.face_degree(Face(f)), 4);
        }
    }

    #[test]
    fn planar_counts_and_boundary() {
        let c = planar_grid(1, 1).unwrap();
        assert_eq!(c.n_faces(), 1);
        assert_eq!(c.topological_boundary().len(), 4);

        let c = planar_grid(2, 2).unwrap();
        assert_eq!(c.n_vertices(), 9);
        assert_eq!(c.n_edges(), 12);
        assert_eq!(c.n_faces(), 4);
        assert_eq!(c.topological_boundary().len(), 8);
        assert!(!c.is_closed());
    }

    #[test]
    fn degree_sum_identity() {
        // Σ_f deg(f) = Σ_e #faces(e) on several complexes.
        for c in [
            torus_grid(2, 3).unwrap(),
            torus_grid(4, 2).unwrap(),
            planar_grid(3, 2).unwrap(),
        ] {
            let lhs: usize = (0..c.n_faces()).map(|f| c.face_degree(Face(f))).sum();
            let rhs: usize = (0..c.n_edges())
                .map(|e| c.faces_of_edge(Edge(e)).len())
                .sum();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn two_faces_sharing_two_edges_rejected() {
        // Two squares glued along two opposite sides (a cylinder wall of
        // height 1 with only 2 faces): each pair of faces shares 2 edges.
        let raw = RawComplex {
            vertices: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            edges: vec![
                ("e0".into(), "a".into(), "b".into()),
                ("e1".into(), "b".into(), "c".into()),
                ("e2".into(), "c".into(), "d".into()),
                ("e3".into(), "d".into(), "a".into()),
            ],
            faces: vec![
                ("f0".into(), vec!["e0".into(), "e1".into(), "e2".into(), "e3".into()]),
                ("f1".into(), vec!["e0".into(), "e1".into(), "e2".into(), "e3".into()]),
            ],
        };
        let err = build_complex(&raw).unwrap_err();
        assert!(err
            .iter()
            .any(|e| matches!(e, ComplexError::IntersectionViolation { .. })));
    }

    #[test]
    fn copath_adjacent_and_self() {
        let c = torus_grid(3, 3).unwrap();
        let f0 = c.face_by_name("f:0,0").unwrap();
        let f1 = c.face_by_name("f:0,1").unwrap();
        let cp = find_copath(&c, f0, CopathTarget::Plaquette(f1)).unwrap();
        assert_eq!(cp.faces.len(), 2);
        assert_eq!(cp.edges.len(), 1);
        let cp = find_copath(&c, f0, CopathTarget::Plaquette(f0)).unwrap();
        assert!(cp.edges.is_empty());
    }

    #[test]
    fn copath_to_boundary() {
        let c = planar_grid(3, 3).unwrap();
        let center = c.face_by_name("f:1,1").unwrap();
        let cp = find_copath(&c, center, CopathTarget::TopologicalBoundary).unwrap();
        assert!(cp.tail.is_some());
        // f:1,1 is one dual step from the boundary ring.
        assert_eq!(cp.faces.len(), 2);
        assert!(cp.is_simple());
    }

    #[test]
    fn path_matches_simple_bfs() {
        let c = torus_grid(3, 3).unwrap();
        let a = c.vertex_by_name("v:0,0").unwrap();
        let b = c.vertex_by_name("v:1,2").unwrap();
        let p = find_path(&c, a, b).unwrap();
        // Manhattan distance on a 3×3 torus: 1 + 1 = 2.
        assert_eq!(p.edges.len(), 2);
        assert!(p.is_simple());
        assert_eq!(p.stars.first(), Some(&a));
        assert_eq!(p.stars.last(), Some(&b));
    }

    #[test]
    fn link_of_torus_vertex_is_cycle() {
        let c = torus_grid(3, 3).unwrap();
        let (order, cyclic) = c.vertex_link(Vertex(0)).unwrap();
        assert_eq!(order.len(), 4);
        assert!(cyclic);
    }

    #[test]
    fn link_of_planar_corner_is_chain() {
        let c = planar_grid(2, 2).unwrap();
        let corner = c.vertex_by_name("v:0,0").unwrap();
        let (order, cyclic) = c.vertex_link(corner).unwrap();
        assert_eq!(order.len(), 2);
        assert!(!cyclic);
    }

    #[test]
    fn ribbon_from_straight_path() {
        let c = planar_grid(3, 1).unwrap();
        let a = c.vertex_by_name("v:0,0").unwrap();
        let b = c.vertex_by_name("v:3,0").unwrap();
        let p = find_path(&c, a, b).unwrap();
        let r = complete_path_to_ribbon(&c, &p).unwrap();
        assert!(r.validate(&c));
        // The derived path collapses back to the input star sequence.
        assert_eq!(r.derived_path(&c), p.stars);
    }

    #[test]
    fn ribbon_from_length1_path() {
        let c = torus_grid(2, 2).unwrap();
        let a = c.vertex_by_name("v:0,0").unwrap();
        let b = c.vertex_by_name("v:0,1").unwrap();
        let p = find_path(&c, a, b).unwrap();
        assert_eq!(p.edges.len(), 1);
        let r = complete_path_to_ribbon(&c, &p).unwrap();
        assert_eq!(r.edges.len(), 1);
        assert!(r.stars.is_empty());
    }

    #[test]
    fn ribbon_from_copath() {
        let c = torus_grid(3, 3).unwrap();
        let f0 = c.face_by_name("f:0,0").unwrap();
        let f2 = c.face_by_name("f:2,2").unwrap();
        let cp = find_copath(&c, f0, CopathTarget::Plaquette(f2)).unwrap();
        let r = complete_copath_to_ribbon(&c, &cp).unwrap();
        assert!(r.validate(&c));
    }

    #[test]
    fn components_of_disjoint_union() {
        let t = torus_grid(2, 2).unwrap();
        let tri = triangle("t");
        let u = disjoint_union(&t, &tri).unwrap();
        let comps = u.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 8);
        assert_eq!(comps[1].len(), 3);
    }

    #[test]
    fn grid_too_small() {
        assert!(matches!(
            torus_grid(1, 3),
            Err(ComplexError::SizeTooSmall { .. })
        ));
    }
}

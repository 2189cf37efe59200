//! Quasi-Euclidean triangulations, super-particle construction, and
//! 2-locality verification of punctured instances.
//!
//! A triangulation here is a combinatorial region cover: each triangle is a
//! set of complex edges together with a ball-containment witness vertex,
//! three side labels shared with its neighbours, and three corner anchor
//! vertices (corner `t` opposite side `t`). The corner anchors make the
//! block construction well defined without geometric drawings: the dual
//! faces of the paper's separating-path graph correspond to triangulation
//! corners, so qubit blocks are built by assigning every edge to a corner
//! of a triangle containing it.

use crate::clh_instance::CLHInstance;
use crate::operator_algebra::{classify_on_edge, AlgebraError};
use crate::surface_complex::{planar_grid, Edge, SurfaceComplex, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Failures of triangulation handling and partition building.
#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("bad parameters: {what}")]
    BadParams { what: String },
    /// A triangle contains no fully-enclosed term acting trivially on one
    /// of its qubits — the ball radius is too small or the instance was
    /// not punctured.
    #[error("triangle {triangle} has no admissible centre term")]
    NoCenter { triangle: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

// ---------------------------------------------------------------------------
// Triangulations
// ---------------------------------------------------------------------------

/// One region of a triangulation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Triangle {
    /// Complex edges covered by this triangle (regions may overlap on
    /// shared triangle sides; the block construction resolves ties).
    pub edges: Vec<Edge>,
    /// Vertex whose radius-`r` ball (in the full 1-skeleton) must lie
    /// inside the region.
    pub witness_center: Vertex,
    /// Side labels, shared by the (at most two) triangles meeting at a
    /// side.
    pub side_centers: [String; 3],
    /// Corner anchor vertices; corner `t` is opposite side `t`.
    pub corners: [Vertex; 3],
}

/// A quasi-Euclidean triangulation with its declared parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Triangulation {
    pub triangles: Vec<Triangle>,
    /// Ball radius each triangle must contain.
    pub r: usize,
    /// Diameter bound for each triangle's edge subgraph.
    pub big_r: usize,
    /// Bound on the number of triangles meeting at a corner.
    pub degree: usize,
}

/// Verification outcome for a candidate triangulation.
#[derive(Clone, Debug, Serialize)]
pub struct TriangulationReport {
    pub ok: bool,
    pub violations: Vec<String>,
    /// Largest measured region diameter (finite regions only).
    pub max_diameter: usize,
    /// Largest number of triangles sharing one corner anchor.
    pub max_corner_degree: usize,
}

/// Adjacency restricted to a region: vertex id → (neighbour id, edge id).
fn region_adjacency(
    complex: &SurfaceComplex,
    edges: &[Edge],
) -> BTreeMap<usize, Vec<(usize, usize)>> {
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &e in edges {
        let [a, b] = complex.endpoints(e);
        adj.entry(a.0).or_default().push((b.0, e.0));
        adj.entry(b.0).or_default().push((a.0, e.0));
    }
    for nbrs in adj.values_mut() {
        nbrs.sort_unstable();
    }
    adj
}

/// Breadth-first distances from `start` within an adjacency map.
fn bfs_distances(adj: &BTreeMap<usize, Vec<(usize, usize)>>, start: usize) -> BTreeMap<usize, usize> {
    let mut dist = BTreeMap::from([(start, 0usize)]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if let Some(nbrs) = adj.get(&v) {
            for &(u, _) in nbrs {
                dist.entry(u).or_insert_with(|| {
                    queue.push_back(u);
                    d + 1
                });
            }
        }
    }
    dist
}

/// Check the quasi-Euclidean conditions: edge coverage, per-region diameter
/// ≤ `big_r`, the radius-`r` ball around each witness centre contained in
/// its region, corner degree ≤ `degree`, and each side label shared by at
/// most two triangles. Violations are reported, not raised.
pub fn verify_quasi_euclidean(
    complex: &SurfaceComplex,
    tri: &Triangulation,
    r: usize,
    big_r: usize,
    degree: usize,
) -> TriangulationReport {
    let mut violations = Vec::new();
    // Coverage.
    let mut covered = vec![false; complex.n_edges()];
    for t in &tri.triangles {
        for &e in &t.edges {
            covered[e.0] = true;
        }
    }
    for e in complex.edges() {
        if !covered[e.0] {
            violations.push(format!("edge {} is not covered by any region", complex.edge_name(e)));
        }
    }
    // Full-skeleton adjacency for ball checks.
    let all_edges: Vec<Edge> = complex.edges().collect();
    let full_adj = region_adjacency(complex, &all_edges);
    let mut max_diameter = 0usize;
    for (i, t) in tri.triangles.iter().enumerate() {
        let in_region: BTreeSet<usize> = t.edges.iter().map(|e| e.0).collect();
        let adj = region_adjacency(complex, &t.edges);
        // Diameter by all-pairs breadth-first search.
        let verts: Vec<usize> = adj.keys().copied().collect();
        let mut diam = 0usize;
        let mut connected = true;
        for &v in &verts {
            let dist = bfs_distances(&adj, v);
            if dist.len() < verts.len() {
                connected = false;
                break;
            }
            diam = diam.max(dist.values().copied().max().unwrap_or(0));
        }
        if !connected {
            violations.push(format!("region {i} is disconnected"));
        } else {
            max_diameter = max_diameter.max(diam);
            if diam > big_r {
                violations.push(format!("region {i} has diameter {diam} > {big_r}"));
            }
        }
        // Ball containment: every edge with both endpoints within distance
        // r of the witness (in the full skeleton) must belong to the
        // region.
        let dist = bfs_distances(&full_adj, t.witness_center.0);
        for e in complex.edges() {
            let [a, b] = complex.endpoints(e);
            let da = dist.get(&a.0).copied().unwrap_or(usize::MAX);
            let db = dist.get(&b.0).copied().unwrap_or(usize::MAX);
            if da.max(db) <= r && !in_region.contains(&e.0) {
                violations.push(format!(
                    "region {i}: edge {} lies in the radius-{r} ball around {} but outside the region",
                    complex.edge_name(e),
                    complex.vertex_name(t.witness_center)
                ));
            }
        }
    }
    // Corner and side degrees.
    let mut corner_count: BTreeMap<usize, usize> = BTreeMap::new();
    let mut side_count: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &tri.triangles {
        for c in &t.corners {
            *corner_count.entry(c.0).or_default() += 1;
        }
        for s in &t.side_centers {
            *side_count.entry(s.as_str()).or_default() += 1;
        }
    }
    let max_corner_degree = corner_count.values().copied().max().unwrap_or(0);
    if max_corner_degree > degree {
        violations.push(format!(
            "a corner is shared by {max_corner_degree} triangles, above the declared degree {degree}"
        ));
    }
    for (s, c) in &side_count {
        if *c > 2 {
            violations.push(format!("side {s} is shared by {c} triangles"));
        }
    }
    TriangulationReport {
        ok: violations.is_empty(),
        violations,
        max_diameter,
        max_corner_degree,
    }
}

// ---------------------------------------------------------------------------
// Degree/diameter bounds
// ---------------------------------------------------------------------------

/// The Moore bound `N_{k,R} = 1 + k·Σ_{i=0}^{R−1} (k−1)^i` on the vertex
/// count of a graph with maximum degree `k` and diameter `R`.
pub fn moore_bound(k: usize, big_r: usize) -> Result<u128, PartitionError> {
    if k < 2 || big_r < 1 {
        return Err(PartitionError::BadParams {
            what: format!("Moore bound needs k ≥ 2 and R ≥ 1, got k = {k}, R = {big_r}"),
        });
    }
    let mut total: u128 = 1;
    let mut layer: u128 = k as u128;
    for _ in 0..big_r {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul((k - 1) as u128);
    }
    Ok(total)
}

/// Conservative integer bound `⌈k·N_{k,R}/2⌉` on the edge count.
pub fn edge_bound(k: usize, big_r: usize) -> Result<u128, PartitionError> {
    let n = moore_bound(k, big_r)?;
    Ok(n.saturating_mul(k as u128).div_ceil(2))
}

/// The super-particle size bound `D·k^{R+2}`, saturating.
pub fn block_bound(degree: usize, k: usize, big_r: usize) -> u128 {
    let mut p: u128 = 1;
    for _ in 0..(big_r + 2) {
        p = p.saturating_mul(k as u128);
    }
    (degree as u128).saturating_mul(p)
}

/// Largest vertex count reachable by exhaustively enumerating breadth-first
/// layer profiles `(ℓ_1, …, ℓ_R)` with `ℓ_1 ≤ k` and `ℓ_{i+1} ≤ ℓ_i·(k−1)`.
/// Every graph with maximum degree `k` and diameter `R` admits such a
/// profile, so this reproduces the Moore bound by direct search.
pub fn profile_bound(k: usize, big_r: usize) -> Result<u128, PartitionError> {
    if k < 2 || big_r < 1 {
        return Err(PartitionError::BadParams {
            what: format!("profile search needs k ≥ 2 and R ≥ 1, got k = {k}, R = {big_r}"),
        });
    }
    // Walk every profile: layer i+1 holds between 0 and ℓ_i·(k−1)
    // vertices (each layer-i vertex has one port facing the root).
    fn rec(k: u128, prev: u128, depth: usize, acc: u128, best: &mut u128) {
        if depth == 0 {
            *best = (*best).max(acc);
            return;
        }
        let hi = prev.saturating_mul(k - 1);
        let mut l = hi;
        loop {
            rec(k, l, depth - 1, acc.saturating_add(l), best);
            if l == 0 {
                break;
            }
            l -= 1;
        }
    }
    let mut best = 0u128;
    let k128 = k as u128;
    // First layer: 0..=k neighbours of the root.
    for l1 in 0..=k128 {
        rec(k128, l1, big_r - 1, 1 + l1, &mut best);
    }
    Ok(best)
}

/// Maximum degree of an edge list on `n` vertices.
pub fn graph_max_degree(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut deg = vec![0usize; n];
    for &(a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    deg.into_iter().max().unwrap_or(0)
}

/// Diameter of an edge list on `n` vertices; `None` when disconnected.
pub fn graph_diameter(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut diam = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        let far = *dist.iter().max().unwrap();
        if far == usize::MAX {
            return None;
        }
        diam = diam.max(far);
    }
    Some(diam)
}

/// Exhaustive backtracking search for a graph on exactly `n` vertices with
/// maximum degree ≤ `k` and diameter ≤ `cap`. Complete for small `n` (the
/// pair count grows quadratically; n ≤ 8 is comfortable), so a `None` is a
/// proof of non-existence at that size.
pub fn search_degree_diameter(n: usize, k: usize, cap: usize) -> Option<Vec<(usize, usize)>> {
    if n == 1 {
        return Some(Vec::new());
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    let mut deg = vec![0usize; n];
    let mut chosen: Vec<(usize, usize)> = Vec::new();

    fn rec(
        idx: usize,
        pairs: &[(usize, usize)],
        deg: &mut Vec<usize>,
        chosen: &mut Vec<(usize, usize)>,
        n: usize,
        k: usize,
        cap: usize,
    ) -> bool {
        if idx == pairs.len() {
            return matches!(graph_diameter(n, chosen), Some(d) if d <= cap);
        }
        let (a, b) = pairs[idx];
        // A vertex whose pair range is exhausted can no longer gain edges;
        // if it is still isolated the graph is disconnected.
        if a > 0 && pairs[idx].0 != pairs[idx.saturating_sub(1)].0 && deg[a - 1] == 0 {
            return false;
        }
        if deg[a] < k && deg[b] < k {
            deg[a] += 1;
            deg[b] += 1;
            chosen.push((a, b));
            if rec(idx + 1, pairs, deg, chosen, n, k, cap) {
                return true;
            }
            chosen.pop();
            deg[a] -= 1;
            deg[b] -= 1;
        }
        rec(idx + 1, pairs, deg, chosen, n, k, cap)
    }

    if rec(0, &pairs, &mut deg, &mut chosen, n, k, cap) {
        Some(chosen)
    } else {
        None
    }
}

/// The Petersen graph: 10 vertices, 3-regular, diameter 2 — the extremal
/// witness for the Moore bound at (k, R) = (3, 2).
pub fn petersen() -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5)); // outer cycle
        edges.push((i, i + 5)); // spokes
        edges.push((5 + i, 5 + (i + 2) % 5)); // inner pentagram
    }
    edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
}

// ---------------------------------------------------------------------------
// Grid triangulation generator
// ---------------------------------------------------------------------------

/// A planar grid with a block triangulation: `bn × bm` square blocks of
/// side `4r`, each split along its main diagonal into two triangles. Each
/// triangle contains the radius-`r` ball around its witness centre, has
/// edge-subgraph diameter exactly `8r`, and at most six triangles meet at
/// any corner.
pub fn triangulated_grid(
    bn: usize,
    bm: usize,
    r: usize,
) -> Result<(SurfaceComplex, Triangulation), PartitionError> {
    if bn == 0 || bm == 0 || r == 0 {
        return Err(PartitionError::BadParams {
            what: format!("need bn, bm, r ≥ 1, got {bn}×{bm}, r = {r}"),
        });
    }
    let s = 4 * r;
    let complex = planar_grid(bn * s, bm * s).map_err(|e| PartitionError::BadParams {
        what: format!("grid construction failed: {e:?}"),
    })?;
    let edge = |name: String| complex.edge_by_name(&name).expect("generated edge name");
    let vertex = |i: usize, j: usize| {
        complex
            .vertex_by_name(&format!("v:{i},{j}"))
            .expect("generated vertex name")
    };
    let mut triangles = Vec::new();
    for bi in 0..bn {
        for bj in 0..bm {
            let (oi, oj) = (bi * s, bj * s);
            // Edges of the lower triangle {a ≥ b} and upper triangle
            // {a ≤ b} in block-local coordinates (a, b).
            let mut low = Vec::new();
            let mut up = Vec::new();
            for a in 0..=s {
                for b in 0..s {
                    // Horizontal edge (a, b) → (a, b+1).
                    let e = edge(format!("h:{},{}", oi + a, oj + b));
                    if a >= b + 1 {
                        low.push(e);
                    }
                    if a <= b {
                        up.push(e);
                    }
                }
            }
            for a in 0..s {
                for b in 0..=s {
                    // Vertical edge (a, b) → (a+1, b).
                    let e = edge(format!("v:{},{}", oi + a, oj + b));
                    if a >= b {
                        low.push(e);
                    }
                    if a + 1 <= b {
                        up.push(e);
                    }
                }
            }
            let tl = vertex(oi, oj);
            let bl = vertex(oi + s, oj);
            let br = vertex(oi + s, oj + s);
            let tr = vertex(oi, oj + s);
            triangles.push(Triangle {
                edges: low,
                witness_center: vertex(oi + 3 * r, oj + r),
                side_centers: [
                    format!("side:v:{bi},{bj}"),
                    format!("side:h:{},{}", bi + 1, bj),
                    format!("side:d:{bi},{bj}"),
                ],
                corners: [br, tl, bl],
            });
            triangles.push(Triangle {
                edges: up,
                witness_center: vertex(oi + r, oj + 3 * r),
                side_centers: [
                    format!("side:h:{bi},{bj}"),
                    format!("side:v:{},{}", bi, bj + 1),
                    format!("side:d:{bi},{bj}"),
                ],
                corners: [br, tl, tr],
            });
        }
    }
    let tri = Triangulation {
        triangles,
        r,
        big_r: 2 * s,
        degree: 6,
    };
    Ok((complex, tri))
}

// ---------------------------------------------------------------------------
// Super-particles
// ---------------------------------------------------------------------------

/// A partition of the qubits into blocks, keyed by the corner anchor name.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuperParticlePartition {
    /// Disjoint edge blocks covering every qubit.
    pub blocks: BTreeMap<String, Vec<Edge>>,
    /// Term index → names of the blocks its non-trivially acted qubits
    /// touch.
    pub incidence: BTreeMap<usize, Vec<String>>,
}

impl SuperParticlePartition {
    /// Size of the largest block.
    pub fn max_block(&self) -> usize {
        self.blocks.values().map(Vec::len).max().unwrap_or(0)
    }
}

/// Qubits on which a term genuinely acts.
fn nontrivial_qubits(
    instance: &CLHInstance,
    term_id: usize,
) -> Result<Vec<Edge>, PartitionError> {
    let term = &instance.terms()[term_id];
    let mut out = Vec::new();
    for &q in &term.qubits {
        if !classify_on_edge(term, q)?.is_trivial() {
            out.push(q);
        }
    }
    Ok(out)
}

/// Build the super-particle partition of a punctured instance.
///
/// For every triangle a centre term is selected: a term fully contained in
/// the region acting trivially on at least one of its qubits (a punctured
/// term acts trivially everywhere). Each edge is then assigned to the
/// nearest corner of a triangle containing it, the centre's trivial edge is
/// forced into a corner of its own (separated from the centre's other
/// qubits), and a bounded repair pass reassigns edges of any term that
/// still straddles three blocks. Blocks are the per-corner edge groups.
pub fn build_superparticles(
    punctured: &CLHInstance,
    tri: &Triangulation,
) -> Result<SuperParticlePartition, PartitionError> {
    let complex = &punctured.complex;
    // Centre selection.
    let mut centers: Vec<(usize, Edge)> = Vec::with_capacity(tri.triangles.len());
    for (t_id, t) in tri.triangles.iter().enumerate() {
        let in_region: BTreeSet<usize> = t.edges.iter().map(|e| e.0).collect();
        let mut found = None;
        'terms: for (id, term) in punctured.terms().iter().enumerate() {
            if !term.qubits.iter().all(|e| in_region.contains(&e.0)) {
                continue;
            }
            for &q in &term.qubits {
                if classify_on_edge(term, q)?.is_trivial() {
                    found = Some((id, q));
                    break 'terms;
                }
            }
        }
        centers.push(found.ok_or(PartitionError::NoCenter { triangle: t_id })?);
    }
    // Initial assignment: per containing triangle, distance to each corner
    // within the region; an edge goes to its overall nearest corner
    // (ties: lexicographically smallest anchor name).
    let mut assign: BTreeMap<usize, (usize, String)> = BTreeMap::new();
    let mut region_dists: Vec<BTreeMap<usize, BTreeMap<usize, usize>>> = Vec::new();
    for t in &tri.triangles {
        let adj = region_adjacency(complex, &t.edges);
        let mut per_corner: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
        for c in &t.corners {
            per_corner.insert(c.0, bfs_distances(&adj, c.0));
        }
        for &e in &t.edges {
            let [a, b] = complex.endpoints(e);
            for c in &t.corners {
                let dist = &per_corner[&c.0];
                let d = dist
                    .get(&a.0)
                    .copied()
                    .unwrap_or(usize::MAX)
                    .min(dist.get(&b.0).copied().unwrap_or(usize::MAX));
                let key = (d, complex.vertex_name(*c).to_string());
                match assign.get(&e.0) {
                    Some(cur) if *cur <= key => {}
                    _ => {
                        assign.insert(e.0, key);
                    }
                }
            }
        }
        region_dists.push(per_corner);
    }
    // Centre separation: force the trivial edge into its nearest corner
    // and the centre's other non-trivial qubits into the remaining two.
    let mut forced: BTreeSet<usize> = BTreeSet::new();
    for (t_id, (term_id, e_h)) in centers.iter().enumerate() {
        let others = nontrivial_qubits(punctured, *term_id)?;
        if others.is_empty() {
            continue; // a fully punctured centre constrains nothing
        }
        let t = &tri.triangles[t_id];
        let per_corner = &region_dists[t_id];
        let corner_key = |c: Vertex, e: Edge| -> (usize, String) {
            let [a, b] = complex.endpoints(e);
            let dist = &per_corner[&c.0];
            let d = dist
                .get(&a.0)
                .copied()
                .unwrap_or(usize::MAX)
                .min(dist.get(&b.0).copied().unwrap_or(usize::MAX));
            (d, complex.vertex_name(c).to_string())
        };
        let mut cs: Vec<Vertex> = t.corners.to_vec();
        cs.sort_by_key(|&c| corner_key(c, *e_h));
        assign.insert(e_h.0, (0, complex.vertex_name(cs[0]).to_string()));
        forced.insert(e_h.0);
        for q in others {
            if q == *e_h {
                continue;
            }
            let mut rest = cs[1..].to_vec();
            rest.sort_by_key(|&c| corner_key(c, q));
            assign.insert(q.0, (0, complex.vertex_name(rest[0]).to_string()));
            forced.insert(q.0);
        }
    }
    // Repair pass: no term may straddle three blocks.
    let nontrivial: Vec<Vec<Edge>> = (0..punctured.terms().len())
        .map(|i| nontrivial_qubits(punctured, i))
        .collect::<Result<_, _>>()?;
    let cap = 64 + 8 * tri.triangles.len();
    for _ in 0..cap {
        let mut moved = false;
        for qs in &nontrivial {
            let mut by_block: BTreeMap<&str, Vec<Edge>> = BTreeMap::new();
            for &q in qs {
                by_block.entry(assign[&q.0].1.as_str()).or_default().push(q);
            }
            if by_block.len() <= 2 {
                continue;
            }
            // Move the smallest group (ties: later name) into the most
            // populous remaining block (ties: smaller name), skipping
            // forced edges.
            let donor = by_block
                .iter()
                .min_by_key(|(name, v)| (v.len(), std::cmp::Reverse(*name)))
                .map(|(name, _)| name.to_string())
                .unwrap();
            let target = by_block
                .iter()
                .filter(|(name, _)| **name != donor)
                .max_by_key(|(name, v)| (v.len(), std::cmp::Reverse(*name)))
                .map(|(name, _)| name.to_string())
                .unwrap();
            let movable: Vec<Edge> = by_block[donor.as_str()]
                .iter()
                .copied()
                .filter(|q| !forced.contains(&q.0))
                .collect();
            if movable.is_empty() {
                continue;
            }
            for q in movable {
                assign.insert(q.0, (0, target.clone()));
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    // Assemble blocks and incidence.
    let mut blocks: BTreeMap<String, Vec<Edge>> = BTreeMap::new();
    for e in complex.edges() {
        let name = assign
            .get(&e.0)
            .map(|(_, n)| n.clone())
            .unwrap_or_else(|| "unassigned".to_string());
        blocks.entry(name).or_default().push(e);
    }
    let mut incidence: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, qs) in nontrivial.iter().enumerate() {
        let names: BTreeSet<String> = qs.iter().map(|q| assign[&q.0].1.clone()).collect();
        incidence.insert(i, names.into_iter().collect());
    }
    Ok(SuperParticlePartition { blocks, incidence })
}

/// Blocks must be disjoint and cover every edge exactly once.
pub fn verify_partition(complex: &SurfaceComplex, partition: &SuperParticlePartition) -> bool {
    let mut seen = vec![0usize; complex.n_edges()];
    for es in partition.blocks.values() {
        for e in es {
            seen[e.0] += 1;
        }
    }
    seen.iter().all(|&c| c == 1)
}

/// Every term of the punctured instance acts (non-trivially) on qubits
/// from at most two blocks.
pub fn verify_two_local(
    punctured: &CLHInstance,
    partition: &SuperParticlePartition,
) -> Result<bool, PartitionError> {
    let mut block_of: BTreeMap<usize, &str> = BTreeMap::new();
    for (name, es) in &partition.blocks {
        for e in es {
            block_of.insert(e.0, name.as_str());
        }
    }
    for id in 0..punctured.terms().len() {
        let names: BTreeSet<&str> = nontrivial_qubits(punctured, id)?
            .into_iter()
            .filter_map(|q| block_of.get(&q.0).copied())
            .collect();
        if names.len() > 2 {
            return Ok(false);
        }
    }
    Ok(true)
}

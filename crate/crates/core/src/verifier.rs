//! Independent certification: H-bridge computation and Tutte-path checking.
//!
//! The verifier looks only at adjacency plus outer-cycle membership (for the
//! outer-bridge flag); it never consults the solver's internal embeddings.

use crate::error::OracleError;
use crate::plane_graph::{edge_key, PlaneGraph, VertexId};
use std::collections::HashSet;

/// One H-bridge: either a single edge between two H-vertices, or a component
/// of G - H together with its connecting edges.
#[derive(Debug, Clone)]
pub struct Bridge {
    pub attachments: Vec<VertexId>,
    pub internals: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    /// contains an edge of C_G
    pub outer: bool,
    pub trivial: bool,
}

fn outer_edge_set(g: &PlaneGraph) -> HashSet<(VertexId, VertexId)> {
    let w = g.outer_walk();
    let k = w.len();
    (0..k).map(|i| edge_key(w[i], w[(i + 1) % k])).collect()
}

/// H-bridges of g for the subgraph H given by its vertices and edges.
pub fn compute_bridges(
    g: &PlaneGraph,
    h_vertices: &[VertexId],
    h_edges: &HashSet<(VertexId, VertexId)>,
) -> Vec<Bridge> {
    let size = g.max_id() as usize + 1;
    let mut in_h = vec![false; size];
    for &v in h_vertices {
        in_h[v as usize] = true;
    }
    let outer_edges = outer_edge_set(g);
    let mut bridges = Vec::new();

    // trivial bridges: edges between H-vertices not in H
    for (u, v) in g.edges() {
        if in_h[u as usize] && in_h[v as usize] && !h_edges.contains(&edge_key(u, v)) {
            let e = edge_key(u, v);
            bridges.push(Bridge {
                attachments: vec![e.0, e.1],
                internals: Vec::new(),
                edges: vec![e],
                outer: outer_edges.contains(&e),
                trivial: true,
            });
        }
    }

    // components of G - H plus their connecting edges
    let mut seen = vec![false; size];
    for s in g.vertices() {
        if in_h[s as usize] || seen[s as usize] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![s];
        seen[s as usize] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in g.neighbors(v) {
                if !in_h[u as usize] && !seen[u as usize] {
                    seen[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        let mut atts: Vec<VertexId> = Vec::new();
        let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
        let mut outer = false;
        for &v in &comp {
            for &u in g.neighbors(v) {
                if in_h[u as usize] {
                    atts.push(u);
                    edges.push(edge_key(v, u));
                } else if v < u {
                    edges.push(edge_key(v, u));
                }
            }
        }
        for e in &edges {
            if outer_edges.contains(e) {
                outer = true;
                break;
            }
        }
        atts.sort_unstable();
        atts.dedup();
        comp.sort_unstable();
        edges.sort_unstable();
        edges.dedup();
        bridges.push(Bridge {
            attachments: atts,
            internals: comp,
            edges,
            outer,
            trivial: false,
        });
    }
    bridges
}

/// Second, independent bridge computation: classify the non-H edges by
/// union-find over shared non-H endpoints. Kept for cross-checking.
pub fn compute_bridges_by_edge_classification(
    g: &PlaneGraph,
    h_vertices: &[VertexId],
    h_edges: &HashSet<(VertexId, VertexId)>,
) -> Vec<Bridge> {
    let size = g.max_id() as usize + 1;
    let mut in_h = vec![false; size];
    for &v in h_vertices {
        in_h[v as usize] = true;
    }
    let non_h_edges: Vec<(VertexId, VertexId)> = g
        .edges()
        .filter(|&(u, v)| !h_edges.contains(&edge_key(u, v)))
        .collect();
    let ne = non_h_edges.len();
    let mut uf: Vec<usize> = (0..ne).collect();
    fn find(uf: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        let mut c = x;
        while uf[c] != r {
            let n = uf[c];
            uf[c] = r;
            c = n;
        }
        r
    }
    let mut first_edge_at: Vec<Option<usize>> = vec![None; size];
    for (i, &(u, v)) in non_h_edges.iter().enumerate() {
        for w in [u, v] {
            if !in_h[w as usize] {
                match first_edge_at[w as usize] {
                    None => first_edge_at[w as usize] = Some(i),
                    Some(j) => {
                        let (a, b) = (find(&mut uf, i), find(&mut uf, j));
                        if a != b {
                            uf[a] = b;
                        }
                    }
                }
            }
        }
    }
    let outer_edges = outer_edge_set(g);
    let mut groups: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    for i in 0..ne {
        let r = find(&mut uf, i);
        groups.entry(r).or_default().push(i);
    }
    let mut bridges = Vec::new();
    for (_, is) in groups {
        let mut atts = Vec::new();
        let mut internals = Vec::new();
        let mut edges = Vec::new();
        let mut outer = false;
        for &i in &is {
            let (u, v) = non_h_edges[i];
            edges.push(edge_key(u, v));
            if outer_edges.contains(&edge_key(u, v)) {
                outer = true;
            }
            for w in [u, v] {
                if in_h[w as usize] {
                    atts.push(w);
                } else {
                    internals.push(w);
                }
            }
        }
        atts.sort_unstable();
        atts.dedup();
        internals.sort_unstable();
        internals.dedup();
        edges.sort_unstable();
        edges.dedup();
        let trivial = edges.len() == 1 && internals.is_empty();
        bridges.push(Bridge {
            attachments: atts,
            internals,
            edges,
            outer,
            trivial,
        });
    }
    bridges
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    Path,
    Cycle,
}

/// Why a candidate was rejected.
#[derive(Debug, Clone)]
pub enum Violation {
    /// a bridge with too many attachments (attachments, outer flag)
    Bridge(Vec<VertexId>, bool),
    QueryMismatch(String),
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub accept: bool,
    pub violation: Option<Violation>,
}

/// Tutte-path query: endpoints plus the prescribed outer edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathQuery {
    pub x: VertexId,
    pub y: VertexId,
    pub alpha: (VertexId, VertexId),
}

fn path_edge_set(path: &[VertexId], mode: PathMode) -> Vec<(VertexId, VertexId)> {
    let mut es: Vec<(VertexId, VertexId)> =
        path.windows(2).map(|w| edge_key(w[0], w[1])).collect();
    if mode == PathMode::Cycle && path.len() > 2 {
        es.push(edge_key(path[path.len() - 1], path[0]));
    }
    es
}

/// Accept iff `path` is a simple path (or cycle) of g matching the query
/// whose bridges satisfy the Tutte conditions: at most three attachments,
/// at most two for bridges containing an outer edge.
pub fn verify_tutte_path(
    g: &PlaneGraph,
    path: &[VertexId],
    mode: PathMode,
    query: Option<&PathQuery>,
) -> Result<Verdict, OracleError> {
    if path.is_empty() {
        return Err(OracleError::MalformedPath("empty path".into()));
    }
    let mut sorted = path.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(OracleError::MalformedPath("repeated vertex".into()));
    }
    for &v in path {
        if !g.contains_vertex(v) {
            return Err(OracleError::MalformedPath(format!("unknown vertex {v}")));
        }
    }
    for w in path.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(OracleError::MalformedPath(format!(
                "missing edge ({}, {})",
                w[0], w[1]
            )));
        }
    }
    if mode == PathMode::Cycle {
        if path.len() < 3 {
            return Err(OracleError::MalformedPath("cycle too short".into()));
        }
        if !g.has_edge(path[path.len() - 1], path[0]) {
            return Err(OracleError::MalformedPath("cycle does not close".into()));
        }
    }
    let edges = path_edge_set(path, mode);
    if let Some(q) = query {
        if mode == PathMode::Path && (path[0] != q.x || *path.last().unwrap() != q.y) {
            return Ok(Verdict {
                accept: false,
                violation: Some(Violation::QueryMismatch(format!(
                    "endpoints ({}, {}) != ({}, {})",
                    path[0],
                    path.last().unwrap(),
                    q.x,
                    q.y
                ))),
            });
        }
        let ak = edge_key(q.alpha.0, q.alpha.1);
        if !edges.contains(&ak) {
            return Ok(Verdict {
                accept: false,
                violation: Some(Violation::QueryMismatch(format!(
                    "alpha {:?} not on path",
                    q.alpha
                ))),
            });
        }
    }
    let h_edges: HashSet<(VertexId, VertexId)> = edges.into_iter().collect();
    for b in compute_bridges(g, path, &h_edges) {
        let limit = if b.outer { 2 } else { 3 };
        if b.attachments.len() > limit {
            return Ok(Verdict {
                accept: false,
                violation: Some(Violation::Bridge(b.attachments.clone(), b.outer)),
            });
        }
    }
    Ok(Verdict {
        accept: true,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane_graph::fixtures::*;

    fn path_edges(p: &[VertexId]) -> HashSet<(VertexId, VertexId)> {
        p.windows(2).map(|w| edge_key(w[0], w[1])).collect()
    }

    #[test]
    fn tri_single_trivial_bridge() {
        let g = tri();
        let p = [1u32, 2, 3];
        let bs = compute_bridges(&g, &p, &path_edges(&p));
        assert_eq!(bs.len(), 1);
        assert!(bs[0].trivial && bs[0].outer);
        assert_eq!(bs[0].attachments, vec![1, 3]);
    }

    #[test]
    fn c4_bridge_with_internal() {
        let g = c4();
        let p = [1u32, 2, 3];
        let bs = compute_bridges(&g, &p, &path_edges(&p));
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].internals, vec![4]);
        assert_eq!(bs[0].attachments, vec![1, 3]);
        assert!(bs[0].outer && !bs[0].trivial);
    }

    #[test]
    fn k4_center_bridge_not_outer() {
        let g = k4();
        let p = [1u32, 2, 3];
        let bs = compute_bridges(&g, &p, &path_edges(&p));
        let center = bs.iter().find(|b| !b.trivial).unwrap();
        assert_eq!(center.internals, vec![4]);
        assert_eq!(center.attachments, vec![1, 2, 3]);
        assert!(!center.outer);
        let triv = bs.iter().find(|b| b.trivial).unwrap();
        assert_eq!(triv.attachments, vec![1, 3]);
        assert!(triv.outer);
    }

    #[test]
    fn verify_c4_accept() {
        let g = c4();
        let q = PathQuery {
            x: 1,
            y: 3,
            alpha: (2, 3),
        };
        let v = verify_tutte_path(&g, &[1, 2, 3], PathMode::Path, Some(&q)).unwrap();
        assert!(v.accept);
    }

    #[test]
    fn verify_w4_reject() {
        let g = w4();
        let v = verify_tutte_path(&g, &[1, 5, 3], PathMode::Path, None).unwrap();
        assert!(!v.accept);
        match v.violation {
            Some(Violation::Bridge(atts, outer)) => {
                assert_eq!(atts, vec![1, 3, 5]);
                assert!(outer);
            }
            other => panic!("expected bridge violation, got {other:?}"),
        }
    }

    #[test]
    fn hamiltonian_always_accepts() {
        let g = w4();
        let v = verify_tutte_path(&g, &[1, 2, 3, 4, 5], PathMode::Path, None).unwrap();
        assert!(v.accept);
    }

    #[test]
    fn malformed_paths() {
        let g = c4();
        assert!(verify_tutte_path(&g, &[1, 1], PathMode::Path, None).is_err());
        assert!(verify_tutte_path(&g, &[1, 3], PathMode::Path, None).is_err());
        assert!(verify_tutte_path(&g, &[1, 2], PathMode::Cycle, None).is_err());
    }

    #[test]
    fn cycle_mode() {
        let g = c4();
        let v = verify_tutte_path(&g, &[1, 2, 3, 4], PathMode::Cycle, None).unwrap();
        assert!(v.accept);
    }

    #[test]
    fn two_bridge_computations_agree() {
        for g in [tri(), c4(), k4(), w4(), ladder6()] {
            let outer = g.outer_walk().to_vec();
            for len in 1..=outer.len().min(4) {
                let p: Vec<VertexId> = outer[..len].to_vec();
                let he = path_edges(&p);
                let mut a = compute_bridges(&g, &p, &he);
                let mut b = compute_bridges_by_edge_classification(&g, &p, &he);
                let key = |x: &Bridge| (x.edges.clone(), x.attachments.clone());
                a.sort_by_key(key);
                b.sort_by_key(key);
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(b.iter()) {
                    assert_eq!(x.edges, y.edges);
                    assert_eq!(x.attachments, y.attachments);
                    assert_eq!(x.internals, y.internals);
                    assert_eq!(x.outer, y.outer);
                    assert_eq!(x.trivial, y.trivial);
                }
            }
        }
    }

    #[test]
    fn bridge_edges_partition() {
        let g = ladder6();
        let p = [1u32, 2, 3];
        let he = path_edges(&p);
        let bs = compute_bridges(&g, &p, &he);
        let mut all: Vec<(VertexId, VertexId)> =
            bs.iter().flat_map(|b| b.edges.iter().copied()).collect();
        all.extend(he.iter().copied());
        all.sort_unstable();
        all.dedup();
        let mut want: Vec<(VertexId, VertexId)> =
            g.edges().map(|(u, v)| edge_key(u, v)).collect();
        want.sort_unstable();
        assert_eq!(all, want);
    }
}

//! Exhaustive brute-force oracle for small instances, plus the catalog of
//! small 2-connected plane graphs used by the test harness.

use crate::error::OracleError;
use crate::plane_graph::{edge_key, PlaneGraph, VertexId};
use crate::verifier::{verify_tutte_path, PathMode, PathQuery};
use std::collections::HashSet;

pub const DEFAULT_CAP: usize = 12;

/// All Tutte paths from x to y through alpha, in deterministic order.
/// Backtracks over every simple x-y path and filters with the verifier.
pub fn enumerate_tutte_paths(
    g: &PlaneGraph,
    q: &PathQuery,
    cap: Option<usize>,
) -> Result<Vec<Vec<VertexId>>, OracleError> {
    let cap = cap.unwrap_or(DEFAULT_CAP);
    if g.vertex_count() > cap {
        return Err(OracleError::TooLarge {
            n: g.vertex_count(),
            cap,
        });
    }
    let mut out = Vec::new();
    for p in simple_paths(g, q.x, q.y) {
        let v = verify_tutte_path(g, &p, PathMode::Path, Some(q))?;
        if v.accept {
            out.push(p);
        }
    }
    Ok(out)
}

/// All Tutte cycles containing the given outer edges (and, optionally, the
/// given vertices), deterministic order.
pub fn enumerate_tutte_cycles(
    g: &PlaneGraph,
    through_edges: &[(VertexId, VertexId)],
    through_vertices: &[VertexId],
    cap: Option<usize>,
) -> Result<Vec<Vec<VertexId>>, OracleError> {
    let cap = cap.unwrap_or(DEFAULT_CAP);
    if g.vertex_count() > cap {
        return Err(OracleError::TooLarge {
            n: g.vertex_count(),
            cap,
        });
    }
    let mut out = Vec::new();
    for c in simple_cycles(g) {
        let edges: HashSet<(VertexId, VertexId)> = {
            let mut es: Vec<_> = c.windows(2).map(|w| edge_key(w[0], w[1])).collect();
            es.push(edge_key(c[c.len() - 1], c[0]));
            es.into_iter().collect()
        };
        if !through_edges
            .iter()
            .all(|&(a, b)| edges.contains(&edge_key(a, b)))
        {
            continue;
        }
        if !through_vertices.iter().all(|v| c.contains(v)) {
            continue;
        }
        let v = verify_tutte_path(g, &c, PathMode::Cycle, None)?;
        if v.accept {
            out.push(c);
        }
    }
    Ok(out)
}

/// All simple paths from x to y, lexicographic by neighbor order.
pub fn simple_paths(g: &PlaneGraph, x: VertexId, y: VertexId) -> Vec<Vec<VertexId>> {
    let size = g.max_id() as usize + 1;
    let mut on_path = vec![false; size];
    let mut path = vec![x];
    on_path[x as usize] = true;
    // sorted adjacency for deterministic output
    let sorted_adj: Vec<Vec<VertexId>> = (0..size as u32)
        .map(|v| {
            if g.contains_vertex(v) {
                let mut a = g.neighbors(v).to_vec();
                a.sort_unstable();
                a
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut stack: Vec<usize> = vec![0];
    let mut out = Vec::new();
    while let Some(i) = stack.last_mut() {
        let v = *path.last().unwrap();
        if v == y && path.len() > 1 {
            out.push(path.clone());
            on_path[v as usize] = false;
            path.pop();
            stack.pop();
            continue;
        }
        let adj = &sorted_adj[v as usize];
        let mut advanced = false;
        while *i < adj.len() {
            let u = adj[*i];
            *i += 1;
            if !on_path[u as usize] {
                on_path[u as usize] = true;
                path.push(u);
                stack.push(0);
                advanced = true;
                break;
            }
        }
        if !advanced {
            on_path[v as usize] = false;
            path.pop();
            stack.pop();
        }
    }
    out
}

/// All simple cycles, one representative per cyclic class: the smallest
/// vertex first and its smaller neighbor second.
pub fn simple_cycles(g: &PlaneGraph) -> Vec<Vec<VertexId>> {
    let mut out = Vec::new();
    let vs: Vec<VertexId> = g.vertices().collect();
    for &root in &vs {
        // paths starting at root using only vertices >= root, closing at root
        let size = g.max_id() as usize + 1;
        let mut on_path = vec![false; size];
        let mut path = vec![root];
        on_path[root as usize] = true;
        let sorted_adj: Vec<Vec<VertexId>> = (0..size as u32)
            .map(|v| {
                if g.contains_vertex(v) {
                    let mut a = g.neighbors(v).to_vec();
                    a.sort_unstable();
                    a
                } else {
                    Vec::new()
                }
            })
            .collect();
        let mut stack: Vec<usize> = vec![0];
        while let Some(i) = stack.last_mut() {
            let v = *path.last().unwrap();
            let adj = &sorted_adj[v as usize];
            let mut advanced = false;
            while *i < adj.len() {
                let u = adj[*i];
                *i += 1;
                if u == root && path.len() >= 3 {
                    // canonical representative: second vertex smaller than last
                    if path[1] < *path.last().unwrap() {
                        out.push(path.clone());
                    }
                } else if u > root && !on_path[u as usize] {
                    on_path[u as usize] = true;
                    path.push(u);
                    stack.push(0);
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                on_path[v as usize] = false;
                path.pop();
                stack.pop();
            }
        }
    }
    out
}

/// Exhaustive catalog of 2-connected plane graphs with n <= n_max: all
/// stacked triangulations (every face-insertion history) closed under
/// single-edge deletions that keep 2-connectivity, deduplicated by canonical
/// embedding code (labels and chirality ignored).
pub fn catalog(n_max: usize) -> Vec<PlaneGraph> {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out: Vec<PlaneGraph> = Vec::new();
    let mut queue: Vec<PlaneGraph> = Vec::new();

    let tri = PlaneGraph::build(
        vec![(1, vec![2, 3]), (2, vec![3, 1]), (3, vec![1, 2])],
        vec![1, 2, 3],
    )
    .unwrap();
    seen.insert(tri.canonical_code());
    out.push(tri.clone());
    queue.push(tri);

    let mut qi = 0usize;
    while qi < queue.len() {
        let g = queue[qi].clone();
        qi += 1;
        // grow: insert a vertex into any inner face joined to three corners
        if g.vertex_count() < n_max {
            let faces = g.faces();
            let walks = faces.walks.clone();
            let outer = faces.outer;
            for f in 0..walks.len() {
                if f == outer || walks[f].len() != 3 {
                    continue;
                }
                let (h, _) = g.insert_vertex_in_face(f, &[0, 1, 2], None).unwrap();
                let code = h.canonical_code();
                if seen.insert(code) {
                    out.push(h.clone());
                    queue.push(h);
                }
            }
        }
        // shrink: delete edges keeping 2-connectivity
        let edges: Vec<(VertexId, VertexId)> = g.edges().collect();
        for (u, v) in edges {
            if let Ok((h, _)) = g.without_edge(u, v) {
                if crate::connectivity::is_2connected(&h) {
                    let code = h.canonical_code();
                    if seen.insert(code) {
                        out.push(h.clone());
                        queue.push(h);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane_graph::fixtures::*;

    #[test]
    fn c4_unique_tutte_path() {
        let g = c4();
        let q = PathQuery {
            x: 1,
            y: 3,
            alpha: (2, 3),
        };
        let ps = enumerate_tutte_paths(&g, &q, None).unwrap();
        assert_eq!(ps, vec![vec![1, 2, 3]]);
    }

    #[test]
    fn tri_unique_path() {
        let g = tri();
        let q = PathQuery {
            x: 1,
            y: 3,
            alpha: (2, 3),
        };
        let ps = enumerate_tutte_paths(&g, &q, None).unwrap();
        assert_eq!(ps, vec![vec![1, 2, 3]]);
    }

    #[test]
    fn tutte_filter_shrinks() {
        let g = w4();
        let all = simple_paths(&g, 1, 5);
        let q = PathQuery {
            x: 1,
            y: 5,
            alpha: (2, 3),
        };
        let tutte = enumerate_tutte_paths(&g, &q, None).unwrap();
        assert!(tutte.len() <= all.len());
        assert!(!tutte.is_empty());
        for p in &tutte {
            assert!(all.contains(p));
        }
    }

    #[test]
    fn w4_query_is_hamiltonian() {
        let g = w4();
        let q = PathQuery {
            x: 1,
            y: 5,
            alpha: (2, 3),
        };
        let ps = enumerate_tutte_paths(&g, &q, None).unwrap();
        assert!(ps.contains(&vec![1, 2, 3, 4, 5]));
        // every answer must visit the hub
        for p in &ps {
            assert!(p.contains(&5));
        }
    }

    #[test]
    fn cap_enforced() {
        let g = cycle(5);
        let q = PathQuery {
            x: 1,
            y: 3,
            alpha: (1, 2),
        };
        assert!(matches!(
            enumerate_tutte_paths(&g, &q, Some(4)),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn w4_three_edge_cycle() {
        let g = w4();
        let cs = enumerate_tutte_cycles(&g, &[(1, 2), (2, 3), (3, 4)], &[], None).unwrap();
        // the rim alone leaves the hub as a 4-attachment bridge
        for c in &cs {
            assert!(c.contains(&5), "cycle {c:?} skips the hub");
        }
        assert!(!cs.is_empty());
    }

    #[test]
    fn c4_cycles() {
        let g = c4();
        let cs = simple_cycles(&g);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0], vec![1, 2, 3, 4]);
    }

    #[test]
    fn catalog_small() {
        let c5 = catalog(5);
        // n=3: triangle; n=4: K4, diamond, C4; n=5: stacked + descendants
        assert!(c5.iter().all(|g| crate::connectivity::is_2connected(g)));
        assert!(c5.iter().any(|g| g.vertex_count() == 5));
        // K4, diamond with outer quad, diamond with outer triangle, C4
        let n4: Vec<_> = c5.iter().filter(|g| g.vertex_count() == 4).collect();
        assert_eq!(n4.len(), 4);
        // triangulation family: m = 3n - 6 instances exist at each n
        for n in 3..=5 {
            assert!(c5
                .iter()
                .any(|g| g.vertex_count() == n && g.edge_count() == 3 * n - 6));
        }
    }
}

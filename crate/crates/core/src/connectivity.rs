//! Block machinery and outer 2-separator discovery.
//!
//! Separation pairs on the outer cycle are found through the face structure:
//! for {c, d} ⊆ V(C_G) the number of faces containing both c and d equals the
//! number of {c, d}-bridges (the bridges are arranged as wedges around the
//! c-d axis, with exactly one shared face between consecutive wedges). Since
//! the outer face always counts, {c, d} separates iff it lies on at least one
//! inner face when cd is not an edge, and on at least two when it is. The
//! brute-force agreement test in decomposition::tests anchors this.

use crate::error::GraphError;
use crate::plane_graph::{edge_key, PlaneGraph, VertexId};
use std::collections::HashMap;

/// 2-connectivity: n >= 3, connected, no cut vertex.
pub fn is_2connected(g: &PlaneGraph) -> bool {
    if g.vertex_count() < 3 || !g.is_connected() {
        return false;
    }
    let bct = block_cut_tree(g);
    bct.blocks.len() == 1 && !bct.blocks[0].trivial
}

/// A block of a graph: maximal subgraph without a cut vertex.
#[derive(Debug, Clone)]
pub struct Block {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    /// single edge
    pub trivial: bool,
}

impl Block {
    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }
}

/// Block-cut tree: blocks, cut vertices, and the bipartite incidence between
/// them. Vertex ids index into the host graph.
#[derive(Debug, Clone)]
pub struct BlockCutTree {
    pub blocks: Vec<Block>,
    pub is_cut: Vec<bool>,
    /// blocks containing each vertex (cut vertices appear in several)
    pub blocks_of: HashMap<VertexId, Vec<usize>>,
}

impl BlockCutTree {
    pub fn cut_vertices(&self) -> Vec<VertexId> {
        self.is_cut
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(v, _)| v as VertexId)
            .collect()
    }

    pub fn block_containing_edge(&self, u: VertexId, v: VertexId) -> Option<usize> {
        let k = edge_key(u, v);
        self.blocks
            .iter()
            .position(|b| b.edges.iter().any(|&e| edge_key(e.0, e.1) == k))
    }
}

/// Iterative biconnected-components decomposition (edge stack variant).
pub fn block_cut_tree(g: &PlaneGraph) -> BlockCutTree {
    let size = g.max_id() as usize + 1;
    let mut disc = vec![0u32; size];
    let mut low = vec![0u32; size];
    let mut visited = vec![false; size];
    let mut is_cut = vec![false; size];
    let mut timer = 1u32;
    let mut edge_stack: Vec<(VertexId, VertexId)> = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();

    struct Frame {
        v: VertexId,
        parent: VertexId,
        i: usize,
        children: usize,
    }

    for root in g.vertices() {
        if visited[root as usize] {
            continue;
        }
        visited[root as usize] = true;
        disc[root as usize] = timer;
        low[root as usize] = timer;
        timer += 1;
        let mut stack = vec![Frame {
            v: root,
            parent: u32::MAX,
            i: 0,
            children: 0,
        }];
        while let Some(top) = stack.last_mut() {
            let v = top.v;
            if top.i < g.neighbors(v).len() {
                let u = g.neighbors(v)[top.i];
                top.i += 1;
                if u == top.parent {
                    continue;
                }
                if !visited[u as usize] {
                    top.children += 1;
                    visited[u as usize] = true;
                    disc[u as usize] = timer;
                    low[u as usize] = timer;
                    timer += 1;
                    edge_stack.push((v, u));
                    stack.push(Frame {
                        v: u,
                        parent: v,
                        i: 0,
                        children: 0,
                    });
                } else if disc[u as usize] < disc[v as usize] {
                    edge_stack.push((v, u));
                    if disc[u as usize] < low[v as usize] {
                        low[v as usize] = disc[u as usize];
                    }
                }
            } else {
                let frame = stack.pop().unwrap();
                if let Some(par) = stack.last() {
                    let p = par.v;
                    if low[frame.v as usize] < low[p as usize] {
                        low[p as usize] = low[frame.v as usize];
                    }
                    if low[frame.v as usize] >= disc[p as usize] {
                        // pop one biconnected component
                        let mut edges = Vec::new();
                        while let Some(&(a, b)) = edge_stack.last() {
                            if disc[a as usize] >= disc[frame.v as usize]
                                || (a, b) == (p, frame.v)
                            {
                                edges.push(edge_stack.pop().unwrap());
                                if (a, b) == (p, frame.v) {
                                    break;
                                }
                            } else {
                                break;
                            }
                        }
                        push_block(&mut blocks, edges);
                        let p_is_root = stack.len() == 1;
                        if (!p_is_root) || par.children > 1 {
                            is_cut[p as usize] = true;
                        }
                    }
                }
            }
        }
    }
    let mut blocks_of: HashMap<VertexId, Vec<usize>> = HashMap::new();
    for (i, b) in blocks.iter().enumerate() {
        for &v in &b.vertices {
            blocks_of.entry(v).or_default().push(i);
        }
    }
    BlockCutTree {
        blocks,
        is_cut,
        blocks_of,
    }
}

fn push_block(blocks: &mut Vec<Block>, edges: Vec<(VertexId, VertexId)>) {
    let mut vs: Vec<VertexId> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    vs.sort_unstable();
    vs.dedup();
    let trivial = edges.len() == 1;
    blocks.push(Block {
        vertices: vs,
        edges,
        trivial,
    });
}

/// A chain of blocks B_1..B_l with junction vertices v_1..v_{l-1} and
/// endpoints v_0, v_l.
#[derive(Debug, Clone)]
pub struct ChainOfBlocks {
    /// block indices into the host BlockCutTree
    pub blocks: Vec<usize>,
    /// v_0, v_1, ..., v_l (length = blocks.len() + 1)
    pub junctions: Vec<VertexId>,
}

/// Minimal chain of blocks of `bct` between u and v (unique block-cut tree
/// path). `Disconnected` when no path exists.
pub fn minimal_chain_of_blocks(
    g: &PlaneGraph,
    bct: &BlockCutTree,
    u: VertexId,
    v: VertexId,
) -> Result<ChainOfBlocks, GraphError> {
    let start_blocks = bct.blocks_of.get(&u).ok_or(GraphError::Disconnected)?;
    chain_search(g, bct, start_blocks, u, v)
}

/// Minimal chain anchored at a given block (the chain containing `anchor`
/// and v; v_0 is set by the caller).
pub fn chain_from_block(
    g: &PlaneGraph,
    bct: &BlockCutTree,
    anchor: usize,
    v0: VertexId,
    v: VertexId,
) -> Result<ChainOfBlocks, GraphError> {
    let mut c = chain_search(g, bct, &[anchor], v0, v)?;
    if c.blocks.first() != Some(&anchor) && bct.blocks[anchor].contains_vertex(v) {
        // v inside the anchor block itself
        c = ChainOfBlocks {
            blocks: vec![anchor],
            junctions: vec![v0, v],
        };
    }
    Ok(c)
}

fn chain_search(
    _g: &PlaneGraph,
    bct: &BlockCutTree,
    start_blocks: &[usize],
    v0: VertexId,
    target: VertexId,
) -> Result<ChainOfBlocks, GraphError> {
    // BFS over the bipartite block-cut tree, nodes = blocks
    let nb = bct.blocks.len();
    let mut prev: Vec<Option<(usize, VertexId)>> = vec![None; nb]; // (block, junction into it)
    let mut visited = vec![false; nb];
    let mut queue: std::collections::VecDeque<usize> = Default::default();
    for &b in start_blocks {
        visited[b] = true;
        queue.push_back(b);
    }
    let mut goal: Option<usize> = None;
    'bfs: while let Some(b) = queue.pop_front() {
        if bct.blocks[b].contains_vertex(target) {
            goal = Some(b);
            break 'bfs;
        }
        for &cv in bct.blocks[b].vertices.iter() {
            if !bct.is_cut[cv as usize] {
                continue;
            }
            for &nbk in bct.blocks_of.get(&cv).into_iter().flatten() {
                if !visited[nbk] {
                    visited[nbk] = true;
                    prev[nbk] = Some((b, cv));
                    queue.push_back(nbk);
                }
            }
        }
    }
    let goal = goal.ok_or(GraphError::Disconnected)?;
    let mut rev_blocks = vec![goal];
    let mut rev_junctions = vec![target];
    let mut cur = goal;
    while let Some((pb, j)) = prev[cur] {
        rev_junctions.push(j);
        rev_blocks.push(pb);
        cur = pb;
    }
    rev_blocks.reverse();
    rev_junctions.push(v0);
    rev_junctions.reverse();
    Ok(ChainOfBlocks {
        blocks: rev_blocks,
        junctions: rev_junctions,
    })
}

/// Weak dual: one vertex per inner face, adjacency iff two faces share an
/// edge. `NotTwoConnected` when the host is not 2-connected.
pub struct WeakDual {
    /// inner face ids of the host, one per dual vertex
    pub face_ids: Vec<usize>,
    pub adj: Vec<Vec<u32>>,
}

pub fn weak_dual(g: &PlaneGraph) -> Result<WeakDual, GraphError> {
    if !is_2connected(g) {
        return Err(GraphError::NotTwoConnected);
    }
    let faces = g.faces();
    let mut face_ids = Vec::new();
    let mut dual_of = vec![u32::MAX; faces.len()];
    for f in 0..faces.len() {
        if f != faces.outer {
            dual_of[f] = face_ids.len() as u32;
            face_ids.push(f);
        }
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); face_ids.len()];
    for (u, v) in g.edges() {
        let f1 = faces.face_of(g, u, v).unwrap();
        let f2 = faces.face_of(g, v, u).unwrap();
        let (d1, d2) = (dual_of[f1], dual_of[f2]);
        if d1 != u32::MAX && d2 != u32::MAX && d1 != d2 && !adj[d1 as usize].contains(&d2) {
            adj[d1 as usize].push(d2);
            adj[d2 as usize].push(d1);
        }
    }
    Ok(WeakDual { face_ids, adj })
}

/// Cofaciality index: for every pair of outer vertices sharing an inner face,
/// the number of shared inner faces and the witness faces themselves.
pub struct OuterPairIndex {
    /// (pair -> inner witness face ids), pair normalized c < d
    pub witnesses: HashMap<(VertexId, VertexId), Vec<usize>>,
}

pub fn outer_pair_index(g: &PlaneGraph) -> OuterPairIndex {
    let faces = g.faces();
    let on_outer: Vec<bool> = {
        let mut v = vec![false; g.max_id() as usize + 1];
        for &x in g.outer_walk() {
            v[x as usize] = true;
        }
        v
    };
    let mut witnesses: HashMap<(VertexId, VertexId), Vec<usize>> = HashMap::new();
    for f in 0..faces.len() {
        if f == faces.outer {
            continue;
        }
        let mut outer_vs: Vec<VertexId> = faces.walks[f]
            .iter()
            .copied()
            .filter(|&v| on_outer[v as usize])
            .collect();
        outer_vs.sort_unstable();
        outer_vs.dedup();
        for i in 0..outer_vs.len() {
            for j in i + 1..outer_vs.len() {
                witnesses
                    .entry((outer_vs[i], outer_vs[j]))
                    .or_default()
                    .push(f);
            }
        }
    }
    OuterPairIndex { witnesses }
}

impl OuterPairIndex {
    /// Separation test for an outer pair per the face-count criterion.
    pub fn separates(&self, g: &PlaneGraph, c: VertexId, d: VertexId) -> bool {
        let key = if c < d { (c, d) } else { (d, c) };
        match self.witnesses.get(&key) {
            None => false,
            Some(ws) => {
                if g.has_edge(c, d) {
                    ws.len() >= 2
                } else {
                    !ws.is_empty()
                }
            }
        }
    }
}

/// All pairs {c, d} ⊆ V(C_G) whose removal disconnects g, sorted.
pub fn outer_2separators(g: &PlaneGraph) -> Result<Vec<(VertexId, VertexId)>, GraphError> {
    if !is_2connected(g) {
        return Err(GraphError::NotTwoConnected);
    }
    let idx = outer_pair_index(g);
    let mut out: Vec<(VertexId, VertexId)> = idx
        .witnesses
        .iter()
        .filter(|((c, d), ws)| {
            if g.has_edge(*c, *d) {
                ws.len() >= 2
            } else {
                !ws.is_empty()
            }
        })
        .map(|(&p, _)| p)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Components of g after removing a vertex set (adjacency only).
pub fn components_without(g: &PlaneGraph, removed: &[bool]) -> Vec<Vec<VertexId>> {
    let size = g.max_id() as usize + 1;
    let mut seen = vec![false; size];
    let mut comps = Vec::new();
    for v in g.vertices() {
        if removed[v as usize] || seen[v as usize] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![v];
        seen[v as usize] = true;
        while let Some(x) = stack.pop() {
            comp.push(x);
            for &u in g.neighbors(x) {
                if !removed[u as usize] && !seen[u as usize] {
                    seen[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Component of g - {c, d} containing `seed`.
pub fn component_of(g: &PlaneGraph, c: VertexId, d: VertexId, seed: VertexId) -> Vec<VertexId> {
    let size = g.max_id() as usize + 1;
    let mut seen = vec![false; size];
    seen[c as usize] = true;
    seen[d as usize] = true;
    let mut comp = Vec::new();
    let mut stack = vec![seed];
    seen[seed as usize] = true;
    while let Some(x) = stack.pop() {
        comp.push(x);
        for &u in g.neighbors(x) {
            if !seen[u as usize] {
                seen[u as usize] = true;
                stack.push(u);
            }
        }
    }
    comp.sort_unstable();
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane_graph::fixtures::*;
    use crate::plane_graph::PlaneGraph;

    fn bowtie() -> PlaneGraph {
        // triangles 1-2-3 and 3-4-5 sharing vertex 3
        PlaneGraph::build(
            vec![
                (1, vec![2, 3]),
                (2, vec![3, 1]),
                (3, vec![1, 2, 4, 5]),
                (4, vec![5, 3]),
                (5, vec![3, 4]),
            ],
            vec![1, 2, 3, 4, 5, 3],
        )
        .unwrap()
    }

    #[test]
    fn bowtie_blocks() {
        let g = bowtie();
        let bct = block_cut_tree(&g);
        assert_eq!(bct.blocks.len(), 2);
        assert_eq!(bct.cut_vertices(), vec![3]);
        let mut sizes: Vec<usize> = bct.blocks.iter().map(|b| b.vertices.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3]);
        assert!(!is_2connected(&g));
        assert!(matches!(
            g.outer_cycle(),
            Err(GraphError::NotTwoConnected)
        ));
    }

    #[test]
    fn c4_single_block() {
        let g = c4();
        let bct = block_cut_tree(&g);
        assert_eq!(bct.blocks.len(), 1);
        assert!(bct.cut_vertices().is_empty());
        assert!(is_2connected(&g));
    }

    #[test]
    fn path_blocks() {
        let g = PlaneGraph::build(
            vec![(1, vec![2]), (2, vec![1, 3]), (3, vec![2])],
            vec![1, 2, 3, 2],
        )
        .unwrap();
        let bct = block_cut_tree(&g);
        assert_eq!(bct.blocks.len(), 2);
        assert!(bct.blocks.iter().all(|b| b.trivial));
        assert_eq!(bct.cut_vertices(), vec![2]);
    }

    #[test]
    fn bowtie_chain() {
        let g = bowtie();
        let bct = block_cut_tree(&g);
        let c = minimal_chain_of_blocks(&g, &bct, 1, 5).unwrap();
        assert_eq!(c.blocks.len(), 2);
        assert_eq!(c.junctions.first(), Some(&1));
        assert_eq!(c.junctions.last(), Some(&5));
        assert_eq!(c.junctions[1], 3);
    }

    #[test]
    fn c4_chain_single_block() {
        let g = c4();
        let bct = block_cut_tree(&g);
        let c = minimal_chain_of_blocks(&g, &bct, 1, 3).unwrap();
        assert_eq!(c.blocks.len(), 1);
        assert_eq!(c.junctions, vec![1, 3]);
    }

    #[test]
    fn path4_chain() {
        let g = PlaneGraph::build(
            vec![
                (1, vec![2]),
                (2, vec![1, 3]),
                (3, vec![2, 4]),
                (4, vec![3]),
            ],
            vec![1, 2, 3, 4, 3, 2],
        )
        .unwrap();
        let bct = block_cut_tree(&g);
        let c = minimal_chain_of_blocks(&g, &bct, 1, 4).unwrap();
        assert_eq!(c.blocks.len(), 3);
        assert_eq!(c.junctions, vec![1, 2, 3, 4]);
    }

    #[test]
    fn weak_dual_c4() {
        let d = weak_dual(&c4()).unwrap();
        assert_eq!(d.face_ids.len(), 1);
        assert!(d.adj[0].is_empty());
    }

    #[test]
    fn weak_dual_k4_triangle() {
        let d = weak_dual(&k4()).unwrap();
        assert_eq!(d.face_ids.len(), 3);
        assert!(d.adj.iter().all(|a| a.len() == 2));
    }

    #[test]
    fn weak_dual_ladder() {
        let d = weak_dual(&ladder6()).unwrap();
        assert_eq!(d.face_ids.len(), 2);
        assert_eq!(d.adj[0], vec![1]);
    }

    #[test]
    fn separators_c4() {
        assert_eq!(
            outer_2separators(&c4()).unwrap(),
            vec![(1, 3), (2, 4)]
        );
    }

    #[test]
    fn separators_k4_empty() {
        assert!(outer_2separators(&k4()).unwrap().is_empty());
    }

    #[test]
    fn separators_ladder6() {
        // brute-force derived set
        assert_eq!(
            outer_2separators(&ladder6()).unwrap(),
            vec![(1, 5), (2, 4), (2, 5), (2, 6), (3, 5)]
        );
    }

    #[test]
    fn separators_match_brute_force() {
        for g in [tri(), c4(), k4(), w4(), ladder6(), cycle(7)] {
            let fast = outer_2separators(&g).unwrap();
            let mut brute = Vec::new();
            let outer = g.outer_walk().to_vec();
            for i in 0..outer.len() {
                for j in i + 1..outer.len() {
                    let (c, d) = (outer[i].min(outer[j]), outer[i].max(outer[j]));
                    let mut removed = vec![false; g.max_id() as usize + 1];
                    removed[c as usize] = true;
                    removed[d as usize] = true;
                    if components_without(&g, &removed).len() > 1 {
                        brute.push((c, d));
                    }
                }
            }
            brute.sort_unstable();
            brute.dedup();
            assert_eq!(fast, brute, "graph {g:?}");
        }
    }
}

//! Chain-of-blocks path construction and the modification of Q.
//!
//! construct-P: every non-trivial block of the chain is reduced along its
//! maximal 2-separators, the reduced block is solved recursively, and the
//! split-off pieces whose virtual edge ended up on the path are restored one
//! by one, each restoration being a smaller instance of the same procedure.
//! All of it runs as a flat worklist so the recursion tree stays on the
//! explicit machine stack.
//!
//! modify-Q: bridges of P ∪ {alpha} ∪ Q attached to both sides get their
//! outer arc C(J) replaced by a path through the bridge, found recursively in
//! a pocket graph whose shape depends on the number of attachments in P.

use super::{
    cut_positions, directed_on_outer, edges_of_path, ensure_internal, find_consecutive,
    splice_edge_with_path, Ctx, Query, Step,
};
use crate::connectivity::{block_cut_tree, chain_from_block, components_without, minimal_chain_of_blocks};
use crate::decomposition::{
    compute_boundary, eta_reduce, smallest_cycle_edge, smallest_cycle_edge_at, CyclePos, Split,
};
use crate::error::SolveError;
use crate::plane_graph::{clockwise_arc, edge_key, ArcEnd, PlaneGraph, VertexId};
use crate::verifier::compute_bridges;
use std::collections::{HashMap, HashSet};

/// One block of a chain to traverse: None graph means a trivial edge block.
pub(crate) struct BlockInfo {
    pub g: Option<PlaneGraph>,
    pub v_prev: VertexId,
    pub v_next: VertexId,
    pub alpha: (VertexId, VertexId),
}

enum PTask {
    Eta { block: usize },
    Restore { block: usize, split: Split },
}

/// Worklist machine producing the v_0 -> v_l path across a chain of blocks.
pub(crate) struct ConstructP {
    blocks: Vec<BlockInfo>,
    queue: Vec<PTask>,
    /// task whose child call is in flight, with the splits of its reduction
    inflight: Option<(PTask, Vec<Split>)>,
    block_paths: Vec<Option<Vec<VertexId>>>,
}

pub(crate) enum PStep {
    Call(Query),
    Finished(Vec<VertexId>),
}

impl ConstructP {
    pub fn new(blocks: Vec<BlockInfo>) -> ConstructP {
        let n = blocks.len();
        let queue = (0..n).rev().map(|i| PTask::Eta { block: i }).collect();
        ConstructP {
            blocks,
            queue,
            inflight: None,
            block_paths: vec![None; n],
        }
    }

    pub fn step(
        &mut self,
        ctx: &mut Ctx,
        reply: Option<Vec<VertexId>>,
    ) -> Result<PStep, SolveError> {
        if let Some((task, splits)) = self.inflight.take() {
            let p = reply.ok_or_else(|| ctx.internal("construct-P expected a reply"))?;
            match task {
                PTask::Eta { block } => {
                    let info = &self.blocks[block];
                    ensure_internal!(
                        p.first() == Some(&info.v_prev) && p.last() == Some(&info.v_next),
                        "block path endpoints mismatch"
                    );
                    self.block_paths[block] = Some(p);
                }
                PTask::Restore { block, split } => {
                    let host = self.block_paths[block].take().unwrap();
                    let spliced = splice_edge_with_path(&host, (split.c, split.d), &p)
                        .ok_or_else(|| ctx.internal("restored edge missing from block path"))?;
                    self.block_paths[block] = Some(spliced);
                }
            }
            // schedule restorations for split edges that landed on the path
            let block = match task {
                PTask::Eta { block } | PTask::Restore { block, .. } => block,
            };
            let bp = self.block_paths[block].as_ref().unwrap();
            for s in splits {
                if find_consecutive(bp, (s.c, s.d)).is_some() {
                    self.queue.push(PTask::Restore { block, split: s });
                }
            }
        } else {
            ensure_internal!(reply.is_none(), "unexpected reply for construct-P");
        }
        while let Some(task) = self.queue.pop() {
            match task {
                PTask::Eta { block } => {
                    let info = &self.blocks[block];
                    match &info.g {
                        None => {
                            self.block_paths[block] = Some(vec![info.v_prev, info.v_next]);
                        }
                        Some(bg) => {
                            let bd = compute_boundary(bg, info.v_prev, info.v_next, info.alpha)?;
                            let red = eta_reduce(bg, &bd)?;
                            ensure_internal!(
                                red.eta.contains_vertex(info.v_prev)
                                    && red.eta.contains_vertex(info.v_next),
                                "eta reduction lost a junction"
                            );
                            let q = Query::Path {
                                g: red.eta,
                                x: info.v_prev,
                                alpha: info.alpha,
                                y: info.v_next,
                            };
                            self.inflight = Some((PTask::Eta { block }, red.splits));
                            return Ok(PStep::Call(q));
                        }
                    }
                }
                PTask::Restore { block, split } => {
                    let b = &split.b_plus;
                    let cyc = b.outer_cycle().map_err(SolveError::Graph)?;
                    let alpha_b = smallest_cycle_edge(&cyc, &[(split.c, split.d)])
                        .ok_or_else(|| ctx.internal("no alpha for restored block"))?;
                    let bd = compute_boundary(b, split.c, split.d, alpha_b)?;
                    let red = eta_reduce(b, &bd)?;
                    let q = Query::Path {
                        g: red.eta,
                        x: split.c,
                        alpha: alpha_b,
                        y: split.d,
                    };
                    self.inflight = Some((
                        PTask::Restore { block, split },
                        red.splits,
                    ));
                    return Ok(PStep::Call(q));
                }
            }
        }
        // all block paths complete: concatenate along junctions
        let mut p: Vec<VertexId> = Vec::new();
        for (i, bp) in self.block_paths.iter().enumerate() {
            let piece = bp.as_ref().ok_or_else(|| ctx.internal("missing block path"))?;
            if i == 0 {
                p.extend_from_slice(piece);
            } else {
                ensure_internal!(p.last() == piece.first(), "junction mismatch in chain");
                p.extend_from_slice(&piece[1..]);
            }
        }
        Ok(PStep::Finished(p))
    }
}

/// Build the per-block data of a chain inside a host graph: restriction plus
/// the alpha choice (lexicographically smallest outer edge avoiding the
/// junction edge, unless prescribed).
pub(crate) fn chain_blocks(
    host: &PlaneGraph,
    bct: &crate::connectivity::BlockCutTree,
    chain: &crate::connectivity::ChainOfBlocks,
    prescribed: &HashMap<usize, (VertexId, VertexId)>,
) -> Result<Vec<BlockInfo>, SolveError> {
    let mut out = Vec::new();
    for (i, &b) in chain.blocks.iter().enumerate() {
        let v_prev = chain.junctions[i];
        let v_next = chain.junctions[i + 1];
        let block = &bct.blocks[b];
        if block.trivial {
            out.push(BlockInfo {
                g: None,
                v_prev,
                v_next,
                alpha: (v_prev, v_next),
            });
            continue;
        }
        let edge_set: HashSet<(VertexId, VertexId)> = block
            .edges
            .iter()
            .map(|&(a, bb)| edge_key(a, bb))
            .collect();
        let in_block = {
            let mut m = vec![false; host.max_id() as usize + 1];
            for &v in &block.vertices {
                m[v as usize] = true;
            }
            m
        };
        let (bg, _) = host
            .restrict(
                |v| in_block[v as usize],
                |a, bb| edge_set.contains(&edge_key(a, bb)),
            )
            .map_err(SolveError::Graph)?;
        let alpha = match prescribed.get(&i) {
            Some(&e) => e,
            None => {
                let cyc = bg.outer_cycle().map_err(SolveError::Graph)?;
                smallest_cycle_edge(&cyc, &[(v_prev, v_next)])
                    .ok_or_else(|| SolveError::Internal("no alpha candidate in block".into()))?
            }
        };
        out.push(BlockInfo {
            g: Some(bg),
            v_prev,
            v_next,
            alpha,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// modification of Q

enum MTask {
    OneAtt {
        pocket: PlaneGraph,
        l: VertexId,
        r: VertexId,
        v: VertexId,
        seg: (usize, usize),
    },
    TwoAtt {
        d_block: PlaneGraph,
        l: VertexId,
        beta: (VertexId, VertexId),
        r: VertexId,
        seg: (usize, usize),
    },
}

pub(crate) struct ModifyQ {
    q_path: Vec<VertexId>,
    tasks: Vec<MTask>, // sorted by segment start, processed back to front
    inflight: Option<MTask>,
}

pub(crate) enum MStep {
    Call(Query),
    Finished(Vec<VertexId>),
}

impl ModifyQ {
    /// Classify the bridges of S = P ∪ connectors ∪ Q and plan the per-bridge
    /// replacements. `reference` anchors the C(J) arcs.
    pub fn plan(
        g: &PlaneGraph,
        p_vertices: &HashSet<VertexId>,
        s_vertices: &[VertexId],
        s_edges: &HashSet<(VertexId, VertexId)>,
        q_path: Vec<VertexId>,
        reference: VertexId,
        ctx: &Ctx,
    ) -> Result<ModifyQ, SolveError> {
        let (cp, rpos) = cut_positions(g, reference);
        let n = cp.len();
        let cut = |v: VertexId| -> Option<usize> { cp.pos(v).map(|p| (p + n - rpos) % n) };
        let q_index: HashMap<VertexId, usize> = q_path
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let on_q = |v: VertexId| q_index.contains_key(&v);
        let mut tasks: Vec<MTask> = Vec::new();
        let bridges = compute_bridges(g, s_vertices, s_edges);
        for br in bridges {
            let patts: Vec<VertexId> = br
                .attachments
                .iter()
                .copied()
                .filter(|v| p_vertices.contains(v))
                .collect();
            let qatts: Vec<VertexId> = br
                .attachments
                .iter()
                .copied()
                .filter(|v| on_q(*v) && !p_vertices.contains(v))
                .collect();
            if patts.is_empty() {
                ensure_internal!(
                    br.attachments.len() <= 2,
                    "bridge with all attachments in Q has {} attachments",
                    br.attachments.len()
                );
                continue;
            }
            ensure_internal!(
                patts.len() <= 2,
                "bridge with {} attachments in P",
                patts.len()
            );
            if qatts.len() < 2 {
                continue;
            }
            // C(J): the outer arc spanning the bridge's outer vertices
            let mut outer_vs: Vec<VertexId> = Vec::new();
            for &v in br.attachments.iter().chain(br.internals.iter()) {
                if cp.pos(v).is_some() {
                    outer_vs.push(v);
                }
            }
            let mut span: Vec<(usize, VertexId)> = outer_vs
                .iter()
                .map(|&v| (cut(v).unwrap(), v))
                .collect();
            span.sort_unstable();
            let l_j = span.first().unwrap().1;
            let r_j = span.last().unwrap().1;
            let (il, ir) = match (q_index.get(&l_j), q_index.get(&r_j)) {
                (Some(&a), Some(&b)) => (a, b),
                _ => {
                    return Err(ctx.internal(format!(
                        "C(J) endpoints ({l_j}, {r_j}) not on Q"
                    )))
                }
            };
            ensure_internal!(il < ir, "C(J) must follow Q's orientation");
            let arc = q_path[il..=ir].to_vec();
            let bridge_verts: Vec<VertexId> = br
                .internals
                .iter()
                .chain(br.attachments.iter())
                .copied()
                .collect();
            let bridge_edges: HashSet<(VertexId, VertexId)> =
                br.edges.iter().map(|&(a, b)| edge_key(a, b)).collect();
            if patts.len() == 1 {
                let v = patts[0];
                let (pocket, _) =
                    build_pocket(g, &bridge_verts, &bridge_edges, &arc, v, ArcSide::Right)?;
                tasks.push(MTask::OneAtt {
                    pocket,
                    l: l_j,
                    r: r_j,
                    v,
                    seg: (il, ir),
                });
            } else {
                let (c2, d2) = (patts[0], patts[1]);
                let (d_block, beta) =
                    two_attachment_block(g, &bridge_verts, &bridge_edges, &arc, c2, d2, ctx)?;
                tasks.push(MTask::TwoAtt {
                    d_block,
                    l: l_j,
                    beta,
                    r: r_j,
                    seg: (il, ir),
                });
            }
        }
        tasks.sort_by_key(|t| match t {
            MTask::OneAtt { seg, .. } | MTask::TwoAtt { seg, .. } => seg.0,
        });
        // segments must not overlap internally
        for w in tasks.windows(2) {
            let a = match &w[0] {
                MTask::OneAtt { seg, .. } | MTask::TwoAtt { seg, .. } => *seg,
            };
            let b = match &w[1] {
                MTask::OneAtt { seg, .. } | MTask::TwoAtt { seg, .. } => *seg,
            };
            ensure_internal!(a.1 <= b.0, "C(J) arcs overlap: {a:?} vs {b:?}");
        }
        Ok(ModifyQ {
            q_path,
            tasks,
            inflight: None,
        })
    }

    pub fn step(
        &mut self,
        ctx: &mut Ctx,
        reply: Option<Vec<VertexId>>,
    ) -> Result<MStep, SolveError> {
        if let Some(task) = self.inflight.take() {
            let p = reply.ok_or_else(|| ctx.internal("modify-Q expected a reply"))?;
            let (qj, seg) = match task {
                MTask::OneAtt { l, r, v, seg, .. } => {
                    ensure_internal!(
                        p.first() == Some(&l) && p.last() == Some(&v),
                        "pocket path endpoints mismatch"
                    );
                    ensure_internal!(
                        p.len() >= 2 && p[p.len() - 2] == r,
                        "pocket path must reach {v} through {r}"
                    );
                    (p[..p.len() - 1].to_vec(), seg)
                }
                MTask::TwoAtt { l, r, seg, .. } => {
                    ensure_internal!(
                        p.first() == Some(&l) && p.last() == Some(&r),
                        "block path endpoints mismatch"
                    );
                    (p, seg)
                }
            };
            // replace q_path[seg.0 ..= seg.1] with qj (processed right-to-left)
            let mut next = self.q_path[..seg.0].to_vec();
            next.extend_from_slice(&qj);
            next.extend_from_slice(&self.q_path[seg.1 + 1..]);
            self.q_path = next;
        } else {
            ensure_internal!(reply.is_none(), "unexpected reply for modify-Q");
        }
        match self.tasks.pop() {
            None => Ok(MStep::Finished(std::mem::take(&mut self.q_path))),
            Some(task) => {
                let q = match &task {
                    MTask::OneAtt { pocket, l, r, v, .. } => Query::Path {
                        g: pocket.clone(),
                        x: *l,
                        alpha: (*r, *v),
                        y: *v,
                    },
                    MTask::TwoAtt {
                        d_block, l, beta, r, ..
                    } => Query::Path {
                        g: d_block.clone(),
                        x: *l,
                        alpha: *beta,
                        y: *r,
                    },
                };
                self.inflight = Some(task);
                Ok(MStep::Call(q))
            }
        }
    }
}

pub(crate) enum ArcSide {
    /// attach the pocket edge at the right (clockwise) end of the arc
    Right,
    /// attach at the left end
    Left,
}

/// Pocket graph: bridge ∪ arc ∪ one edge from an arc end down to `low`.
/// Returns the pocket and whether the closing edge was added.
pub(crate) fn build_pocket(
    g: &PlaneGraph,
    bridge_verts: &[VertexId],
    bridge_edges: &HashSet<(VertexId, VertexId)>,
    arc: &[VertexId],
    low: VertexId,
    side: ArcSide,
) -> Result<(PlaneGraph, bool), SolveError> {
    let size = g.max_id() as usize + 1;
    let mut keep = vec![false; size];
    for &v in bridge_verts.iter().chain(arc.iter()) {
        keep[v as usize] = true;
    }
    keep[low as usize] = true;
    let arc_edges: HashSet<(VertexId, VertexId)> = arc
        .windows(2)
        .map(|w| edge_key(w[0], w[1]))
        .collect();
    let attach = match side {
        ArcSide::Right => *arc.last().unwrap(),
        ArcSide::Left => arc[0],
    };
    let closing = edge_key(attach, low);
    let closing_real = g.has_edge(attach, low);
    let (x0, _) = g
        .restrict(
            |v| keep[v as usize],
            |a, b| {
                let k = edge_key(a, b);
                bridge_edges.contains(&k) || arc_edges.contains(&k) || (closing_real && k == closing)
            },
        )
        .map_err(SolveError::Graph)?;
    if closing_real {
        ensure_internal!(
            x0.is_outer_edge(attach, low),
            "existing closing edge ({attach}, {low}) is not on the pocket boundary"
        );
        return Ok((x0, false));
    }
    // insert the closing edge along the pocket boundary, on the bridge side
    // of the arc: locate the attach occurrence flanking the arc, then walk
    // away from the arc to the first occurrence of `low`
    let walk = x0.outer_walk().to_vec();
    let k = walk.len();
    let (arc_nbr, forward) = match side {
        ArcSide::Right => (arc[arc.len() - 2], true),
        ArcSide::Left => (arc[1], false),
    };
    let occ = (0..k)
        .find(|&i| {
            walk[i] == attach
                && if forward {
                    walk[(i + k - 1) % k] == arc_nbr
                } else {
                    walk[(i + 1) % k] == arc_nbr
                }
        })
        .ok_or_else(|| SolveError::Internal("arc end not found on pocket boundary".into()))?;
    let mut low_occ = None;
    for off in 1..k {
        let i = if forward {
            (occ + off) % k
        } else {
            (occ + k - off) % k
        };
        if walk[i] == low {
            low_occ = Some(i);
            break;
        }
    }
    let low_occ =
        low_occ.ok_or_else(|| SolveError::Internal("low vertex not on pocket boundary".into()))?;
    let witness = Some((arc[0], arc[1]));
    let out = x0
        .add_edge_at_walk_positions(x0.faces().outer, occ, low_occ, witness)
        .map_err(SolveError::Graph)?;
    ensure_internal!(
        out.is_outer_edge(attach, low),
        "closing edge must land on the pocket boundary"
    );
    Ok((out, true))
}

/// The two-attachment branch: find the block D of bridge ∪ arc containing the
/// arc, the optional three-attachment piece, and the edge beta at the split
/// vertex.
fn two_attachment_block(
    g: &PlaneGraph,
    bridge_verts: &[VertexId],
    bridge_edges: &HashSet<(VertexId, VertexId)>,
    arc: &[VertexId],
    c2: VertexId,
    d2: VertexId,
    ctx: &Ctx,
) -> Result<(PlaneGraph, (VertexId, VertexId)), SolveError> {
    let size = g.max_id() as usize + 1;
    let mut keep = vec![false; size];
    for &v in bridge_verts.iter().chain(arc.iter()) {
        keep[v as usize] = true;
    }
    let arc_edges: HashSet<(VertexId, VertexId)> =
        arc.windows(2).map(|w| edge_key(w[0], w[1])).collect();
    let (obj, _) = g
        .restrict(
            |v| keep[v as usize],
            |a, b| {
                let k = edge_key(a, b);
                bridge_edges.contains(&k) || arc_edges.contains(&k)
            },
        )
        .map_err(SolveError::Graph)?;
    let bct = block_cut_tree(&obj);
    let d_idx = bct
        .block_containing_edge(arc[0], arc[1])
        .ok_or_else(|| ctx.internal("arc edge lost in pocket"))?;
    for w in arc.windows(2) {
        ensure_internal!(
            bct.block_containing_edge(w[0], w[1]) == Some(d_idx),
            "C(J) spans several blocks of the pocket"
        );
    }
    let dblock = &bct.blocks[d_idx];
    let d_edges: HashSet<(VertexId, VertexId)> = dblock
        .edges
        .iter()
        .map(|&(a, b)| edge_key(a, b))
        .collect();
    let mut in_d = vec![false; size];
    for &v in &dblock.vertices {
        in_d[v as usize] = true;
    }
    let (dg, _) = obj
        .restrict(
            |v| in_d[v as usize],
            |a, b| d_edges.contains(&edge_key(a, b)),
        )
        .map_err(SolveError::Graph)?;
    let c_d = dg.outer_cycle().map_err(SolveError::Graph)?;
    // bridges of D ∪ {c2, d2} inside the pocket object
    let mut host_verts: Vec<VertexId> = dblock.vertices.clone();
    for v in [c2, d2] {
        if !host_verts.contains(&v) {
            host_verts.push(v);
        }
    }
    let sub_bridges = compute_bridges(&obj, &host_verts, &d_edges);
    // W: the outer cycle of D minus the interior of the arc, from the arc's
    // right end around to its left end
    let cp = CyclePos::new(c_d.clone(), dg.max_id());
    let l_j = arc[0];
    let r_j = *arc.last().unwrap();
    let w_path: Vec<VertexId> = clockwise_arc(&c_d, ArcEnd::V(r_j), ArcEnd::V(l_j))
        .map_err(SolveError::Graph)?;
    let _ = cp;
    let wpos: HashMap<VertexId, usize> = w_path
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut l_piece: Option<VertexId> = None; // v_L of the 3-attachment piece
    let mut c_pos: Vec<usize> = Vec::new();
    let mut d_pos: Vec<usize> = Vec::new();
    for sb in &sub_bridges {
        let zs: Vec<VertexId> = sb
            .attachments
            .iter()
            .copied()
            .filter(|&v| v != c2 && v != d2)
            .collect();
        ensure_internal!(
            zs.len() == 1,
            "pocket sub-bridge must attach the block exactly once, got {zs:?}"
        );
        let z = zs[0];
        let zp = *wpos
            .get(&z)
            .ok_or_else(|| ctx.internal("sub-bridge attachment off the lower boundary"))?;
        let has_c = sb.attachments.contains(&c2);
        let has_d = sb.attachments.contains(&d2);
        ensure_internal!(has_c || has_d, "sub-bridge ignores both lower attachments");
        if has_c && has_d {
            ensure_internal!(l_piece.is_none(), "two three-attachment pieces");
            l_piece = Some(z);
        } else if has_c {
            c_pos.push(zp);
        } else {
            d_pos.push(zp);
        }
    }
    let v_d = if let Some(z) = l_piece {
        z
    } else if c_pos.is_empty() && d_pos.is_empty() {
        *w_path
            .iter()
            .min()
            .ok_or_else(|| ctx.internal("empty lower boundary"))?
    } else if d_pos.is_empty() {
        w_path[*c_pos.iter().max().unwrap()]
    } else if c_pos.is_empty() {
        w_path[*d_pos.iter().max().unwrap()]
    } else {
        let (cmax, cmin) = (
            *c_pos.iter().max().unwrap(),
            *c_pos.iter().min().unwrap(),
        );
        let (dmax, dmin) = (
            *d_pos.iter().max().unwrap(),
            *d_pos.iter().min().unwrap(),
        );
        if cmax <= dmin {
            w_path[cmax]
        } else if dmax <= cmin {
            w_path[dmax]
        } else {
            return Err(ctx.internal("lower attachments interleave"));
        }
    };
    let beta = smallest_cycle_edge_at(&c_d, v_d, &[])
        .ok_or_else(|| ctx.internal("no beta at the split vertex"))?;
    Ok((dg, beta))
}

// ---------------------------------------------------------------------------
// the chain frame: Thomassen construction and the Three Edge Lemma

enum ChainKind {
    Thomassen {
        x: VertexId,
        y: VertexId,
        alpha: (VertexId, VertexId),
        r_alpha: VertexId,
        reversed: bool,
    },
    ThreeEdge {
        alpha: (VertexId, VertexId),
        beta: (VertexId, VertexId),
        // a' -alpha- a ...Q... u -beta- u'
        a_end: VertexId,
        u_end: VertexId,
        u_prime: VertexId,
        reference: VertexId,
    },
}

enum Stage {
    BuildP,
    Modify,
}

pub(crate) struct ChainFrame {
    g: PlaneGraph,
    kind: ChainKind,
    q_path: Vec<VertexId>,
    construct: ConstructP,
    modify: Option<ModifyQ>,
    p_path: Option<Vec<VertexId>>,
    stage: Stage,
}

impl ChainFrame {
    /// Endpoint-on-outer-cycle construction. x or y lies on C_G; after the
    /// swap and mirror normalizations x in C_G, y not in x..l_alpha and
    /// y != r_alpha.
    pub fn new_thomassen(
        g0: PlaneGraph,
        x0: VertexId,
        alpha: (VertexId, VertexId),
        y0: VertexId,
    ) -> Result<ChainFrame, SolveError> {
        let mut g = g0;
        let mut x = x0;
        let mut y = y0;
        let mut reversed = false;
        if !g.is_on_outer(x) {
            std::mem::swap(&mut x, &mut y);
            reversed = !reversed;
        }
        let mut l_alpha;
        let mut r_alpha;
        let mut guard = 0;
        loop {
            guard += 1;
            ensure_internal!(guard < 10, "normalization did not settle");
            let outer = g.outer_walk().to_vec();
            if x == alpha.0 || x == alpha.1 {
                l_alpha = x;
                r_alpha = if x == alpha.0 { alpha.1 } else { alpha.0 };
            } else {
                let arc = clockwise_arc(&outer, ArcEnd::V(x), ArcEnd::E(alpha.0, alpha.1))
                    .map_err(SolveError::Graph)?;
                l_alpha = *arc.last().unwrap();
                r_alpha = if l_alpha == alpha.0 { alpha.1 } else { alpha.0 };
            }
            let q_arc = clockwise_arc(&outer, ArcEnd::V(x), ArcEnd::V(l_alpha))
                .map_err(SolveError::Graph)?;
            if q_arc.contains(&y) {
                std::mem::swap(&mut x, &mut y);
                reversed = !reversed;
                continue;
            }
            if y == r_alpha {
                g = g.mirror();
                continue;
            }
            break;
        }
        let outer = g.outer_walk().to_vec();
        let q_path = clockwise_arc(&outer, ArcEnd::V(x), ArcEnd::V(l_alpha))
            .map_err(SolveError::Graph)?;
        // H and its chain
        let size = g.max_id() as usize + 1;
        let mut removed = vec![false; size];
        for &v in &q_path {
            removed[v as usize] = true;
        }
        let comps = components_without(&g, &removed);
        ensure_internal!(
            g.degree(r_alpha) >= 3,
            "deg(r_alpha) = {} < 3 after the easy cases",
            g.degree(r_alpha)
        );
        let main = comps
            .iter()
            .find(|c| c.binary_search(&r_alpha).is_ok())
            .ok_or_else(|| SolveError::Internal("r_alpha vanished from H".into()))?;
        ensure_internal!(
            main.binary_search(&y).is_ok(),
            "y separated from r_alpha in H"
        );
        let mut in_main = vec![false; size];
        for &v in main {
            in_main[v as usize] = true;
        }
        let (hg, _) = g
            .restrict(|v| in_main[v as usize], |_, _| true)
            .map_err(SolveError::Graph)?;
        // e: the inner edge at r_alpha sharing a face with alpha
        let e_other = {
            let faces = g.faces();
            let f1 = faces.face_of(&g, alpha.0, alpha.1).unwrap();
            let f2 = faces.face_of(&g, alpha.1, alpha.0).unwrap();
            let fa = if f1 == faces.outer { f2 } else { f1 };
            let walk = &faces.walks[fa];
            let k = walk.len();
            let i = walk
                .iter()
                .position(|&v| v == r_alpha)
                .ok_or_else(|| SolveError::Internal("r_alpha off its inner face".into()))?;
            let (pre, suc) = (walk[(i + k - 1) % k], walk[(i + 1) % k]);
            if pre == l_alpha {
                suc
            } else {
                pre
            }
        };
        ensure_internal!(
            !g.is_outer_edge(r_alpha, e_other),
            "the face edge at r_alpha is outer (degree 2 leak)"
        );
        ensure_internal!(
            !removed[e_other as usize],
            "the inner edge at r_alpha leads into Q"
        );
        let bct = block_cut_tree(&hg);
        let b1 = bct
            .block_containing_edge(r_alpha, e_other)
            .ok_or_else(|| SolveError::Internal("block of e not found".into()))?;
        // every outer vertex outside Q belongs to B1
        for &v in g.outer_walk() {
            if !removed[v as usize] {
                ensure_internal!(
                    bct.blocks[b1].contains_vertex(v),
                    "outer vertex {v} escapes the first block"
                );
            }
        }
        let chain = chain_from_block(&hg, &bct, b1, r_alpha, y).map_err(SolveError::Graph)?;
        ensure_internal!(
            chain.blocks.first() == Some(&b1),
            "chain does not start at the first block"
        );
        // alpha_1: incident to the far endvertex of C_B1 ∩ C_G
        let mut prescribed: HashMap<usize, (VertexId, VertexId)> = HashMap::new();
        if !bct.blocks[b1].trivial {
            let (cp, rpos) = cut_positions(&g, r_alpha);
            let n = cp.len();
            let far = g
                .outer_walk()
                .iter()
                .copied()
                .filter(|&v| bct.blocks[b1].contains_vertex(v))
                .max_by_key(|&v| (cp.pos(v).unwrap() + n - rpos) % n)
                .unwrap_or(r_alpha);
            let edge_set: HashSet<(VertexId, VertexId)> = bct.blocks[b1]
                .edges
                .iter()
                .map(|&(a, b)| edge_key(a, b))
                .collect();
            let mut in_b1 = vec![false; size];
            for &v in &bct.blocks[b1].vertices {
                in_b1[v as usize] = true;
            }
            let (b1g, _) = hg
                .restrict(
                    |v| in_b1[v as usize],
                    |a, b| edge_set.contains(&edge_key(a, b)),
                )
                .map_err(SolveError::Graph)?;
            let cyc = b1g.outer_cycle().map_err(SolveError::Graph)?;
            let junction = (chain.junctions[0], chain.junctions[1]);
            let a1 = smallest_cycle_edge_at(&cyc, far, &[junction])
                .or_else(|| smallest_cycle_edge(&cyc, &[junction]))
                .ok_or_else(|| SolveError::Internal("no alpha_1 candidate".into()))?;
            prescribed.insert(0, a1);
        }
        let blocks = chain_blocks(&hg, &bct, &chain, &prescribed)?;
        let construct = ConstructP::new(blocks);
        Ok(ChainFrame {
            g,
            kind: ChainKind::Thomassen {
                x,
                y,
                alpha,
                r_alpha,
                reversed,
            },
            q_path,
            construct,
            modify: None,
            p_path: None,
            stage: Stage::BuildP,
        })
    }

    /// Tutte cycle through two or three outer edges, clockwise-normalized.
    pub fn new_three_edge(
        g: PlaneGraph,
        edges: Vec<(VertexId, VertexId)>,
    ) -> Result<ChainFrame, SolveError> {
        let outer = g.outer_walk().to_vec();
        let k = outer.len();
        // directed walk position of each edge
        let mut with_pos: Vec<(usize, (VertexId, VertexId))> = Vec::new();
        for &e in &edges {
            let i = (0..k)
                .find(|&i| edge_key(outer[i], outer[(i + 1) % k]) == edge_key(e.0, e.1))
                .ok_or_else(|| SolveError::InvalidQuery(format!("{e:?} not outer")))?;
            with_pos.push((i, (outer[i], outer[(i + 1) % k])));
        }
        with_pos.sort_unstable();
        let (ai, (a_prime, a_end)) = with_pos[0];
        let (bi, (u_end, u_prime)) = with_pos[1];
        let _ = (ai, bi);
        let alpha = (a_prime, a_end);
        let beta = (u_end, u_prime);
        let gamma = with_pos.get(2).map(|&(_, e)| e);
        let q_path =
            clockwise_arc(&outer, ArcEnd::V(a_end), ArcEnd::V(u_end)).map_err(SolveError::Graph)?;
        let reference = u_prime;
        // chain of G - Q from u' to a'
        let blocks = if u_prime == a_prime {
            Vec::new()
        } else {
            let size = g.max_id() as usize + 1;
            let mut removed = vec![false; size];
            for &v in &q_path {
                removed[v as usize] = true;
            }
            let comps = components_without(&g, &removed);
            let main = comps
                .iter()
                .find(|c| c.binary_search(&u_prime).is_ok())
                .ok_or_else(|| SolveError::Internal("u' vanished".into()))?;
            ensure_internal!(
                main.binary_search(&a_prime).is_ok(),
                "a' separated from u' outside Q"
            );
            let mut in_main = vec![false; size];
            for &v in main {
                in_main[v as usize] = true;
            }
            let (hg, _) = g
                .restrict(|v| in_main[v as usize], |_, _| true)
                .map_err(SolveError::Graph)?;
            let bct = block_cut_tree(&hg);
            let chain =
                minimal_chain_of_blocks(&hg, &bct, u_prime, a_prime).map_err(SolveError::Graph)?;
            let mut prescribed: HashMap<usize, (VertexId, VertexId)> = HashMap::new();
            if let Some(ga) = gamma {
                let kb = chain
                    .blocks
                    .iter()
                    .position(|&b| {
                        bct.blocks[b]
                            .edges
                            .iter()
                            .any(|&(p, q)| edge_key(p, q) == edge_key(ga.0, ga.1))
                    })
                    .ok_or_else(|| {
                        SolveError::Internal("gamma not in the chain of blocks".into())
                    })?;
                prescribed.insert(kb, ga);
            }
            chain_blocks(&hg, &bct, &chain, &prescribed)?
        };
        let construct = ConstructP::new(blocks);
        Ok(ChainFrame {
            g,
            kind: ChainKind::ThreeEdge {
                alpha,
                beta,
                a_end,
                u_end,
                u_prime,
                reference,
            },
            q_path,
            construct,
            modify: None,
            p_path: None,
            stage: Stage::BuildP,
        })
    }

    pub fn resume(
        &mut self,
        ctx: &mut Ctx,
        mut reply: Option<Vec<VertexId>>,
    ) -> Result<Step, SolveError> {
        loop {
            match self.stage {
                Stage::BuildP => match self.construct.step(ctx, reply.take())? {
                    PStep::Call(q) => return Ok(Step::Call(q)),
                    PStep::Finished(p) => {
                        self.p_path = Some(p);
                        self.stage = Stage::Modify;
                        self.plan_modify(ctx)?;
                    }
                },
                Stage::Modify => {
                    let m = self.modify.as_mut().unwrap();
                    match m.step(ctx, reply.take())? {
                        MStep::Call(q) => return Ok(Step::Call(q)),
                        MStep::Finished(q_final) => {
                            return Ok(Step::Done(self.assemble(ctx, q_final)?))
                        }
                    }
                }
            }
        }
    }

    fn plan_modify(&mut self, ctx: &mut Ctx) -> Result<(), SolveError> {
        let p = self.p_path.as_ref().unwrap();
        let empty_p = p.len() <= 1 && matches!(self.kind, ChainKind::ThreeEdge { .. });
        let p_vertices: HashSet<VertexId> = p.iter().copied().collect();
        let mut s_vertices: Vec<VertexId> = p.clone();
        s_vertices.extend(self.q_path.iter().copied());
        s_vertices.sort_unstable();
        s_vertices.dedup();
        let mut s_edges: HashSet<(VertexId, VertexId)> = edges_of_path(p).into_iter().collect();
        for e in edges_of_path(&self.q_path) {
            s_edges.insert(e);
        }
        let reference = match &self.kind {
            ChainKind::Thomassen { alpha, r_alpha, .. } => {
                s_edges.insert(edge_key(alpha.0, alpha.1));
                *r_alpha
            }
            ChainKind::ThreeEdge {
                alpha,
                beta,
                reference,
                ..
            } => {
                s_edges.insert(edge_key(alpha.0, alpha.1));
                s_edges.insert(edge_key(beta.0, beta.1));
                *reference
            }
        };
        let _ = empty_p;
        self.modify = Some(ModifyQ::plan(
            &self.g,
            &p_vertices,
            &s_vertices,
            &s_edges,
            std::mem::take(&mut self.q_path),
            reference,
            ctx,
        )?);
        Ok(())
    }

    fn assemble(&mut self, ctx: &mut Ctx, q_final: Vec<VertexId>) -> Result<Vec<VertexId>, SolveError> {
        let p = self.p_path.take().unwrap();
        match &self.kind {
            ChainKind::Thomassen { reversed, .. } => {
                // x ..Q.. l_alpha -alpha- r_alpha ..P.. y
                let mut full = q_final;
                ensure_internal!(
                    full.last().is_some() && p.first().is_some(),
                    "empty assembly"
                );
                full.extend_from_slice(&p);
                if *reversed {
                    full.reverse();
                }
                Ok(full)
            }
            ChainKind::ThreeEdge { u_prime, a_end, u_end, .. } => {
                // cycle: a ..Q.. u -beta- u' ..P.. a' -alpha- a
                let mut cyc = q_final;
                ensure_internal!(
                    cyc.first() == Some(a_end) && cyc.last() == Some(u_end),
                    "Q lost its endpoints"
                );
                if p.is_empty() || (p.len() == 1 && p[0] == *u_prime) {
                    cyc.push(*u_prime);
                } else {
                    ensure_internal!(p.first() == Some(u_prime), "P must start at u'");
                    cyc.extend_from_slice(&p);
                }
                let _ = ctx;
                Ok(cyc)
            }
        }
    }
}

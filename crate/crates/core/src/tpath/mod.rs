//! The TPATH recursion: computes an x-alpha-y Tutte path of a 2-connected
//! plane graph, and Tutte cycles through three prescribed outer edges.
//!
//! The recursion is driven by an explicit frame stack on the heap; machine
//! stack depth stays constant no matter how deep the decomposition goes.
//! Dispatch order per call: trivial (triangle or alpha = xy), decomposition
//! along a minimal outer 2-separator, isolated-bridge reduction, the
//! endpoint-on-the-outer-face construction, and finally the interior-endpoint
//! construction. Every result is certified by the verifier before it is
//! returned.

mod chain;
mod sanders;

use crate::decomposition::{
    find_lemma1_decomposition, find_lemma2_bridge, path_edges, smallest_cycle_edge, CyclePos,
};
use crate::error::SolveError;
use crate::plane_graph::{edge_key, PlaneGraph, VertexId};
use crate::verifier::{verify_tutte_path, PathMode, PathQuery};
use chain::ChainFrame;
use sanders::SandersFrame;
use std::collections::HashMap;

/// Query for the path solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TuttePathQuery {
    pub x: VertexId,
    pub y: VertexId,
    pub alpha: (VertexId, VertexId),
}

/// Per-case tallies for the recursion statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseCounts {
    pub trivial_triangle: u64,
    pub trivial_alpha_xy: u64,
    pub lemma1: u64,
    pub lemma2: u64,
    pub thomassen: u64,
    pub sanders: u64,
    pub three_edge: u64,
}

/// Recursion statistics: r (inductive calls: tree nodes with at least one
/// child), I (decomposition nodes), and the dispatch histogram.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunStats {
    pub calls: u64,
    pub decompositions: u64,
    pub cases: CaseCounts,
}

/// A certified Tutte path with its statistics.
#[derive(Debug, Clone)]
pub struct TutteResult {
    pub path: Vec<VertexId>,
    pub contains_alpha: bool,
    pub stats: RunStats,
}

/// A certified Tutte cycle through three outer edges.
#[derive(Debug, Clone)]
pub struct ThreeEdgeResult {
    pub cycle: Vec<VertexId>,
    pub stats: RunStats,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// run the structural invariant checks (sibling overlap, 2-connectivity
    /// of every derived subgraph)
    pub strict: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { strict: true }
    }
}

/// One unit of work for the machine.
#[derive(Debug, Clone)]
pub(crate) enum Query {
    Path {
        g: PlaneGraph,
        x: VertexId,
        alpha: (VertexId, VertexId),
        y: VertexId,
    },
    /// Tutte cycle through the given outer edges (two or three of them)
    Cycle {
        g: PlaneGraph,
        edges: Vec<(VertexId, VertexId)>,
    },
}

impl Query {
    fn graph(&self) -> &PlaneGraph {
        match self {
            Query::Path { g, .. } | Query::Cycle { g, .. } => g,
        }
    }
}

pub(crate) enum Step {
    Done(Vec<VertexId>),
    Call(Query),
}

pub(crate) struct Ctx {
    pub opts: SolveOptions,
    pub stats: RunStats,
}

impl Ctx {
    pub fn internal(&self, msg: impl Into<String>) -> SolveError {
        SolveError::Internal(msg.into())
    }
}

macro_rules! ensure_internal {
    ($cond:expr, $($arg:tt)*) => {
        if !($cond) {
            return Err(SolveError::Internal(format!($($arg)*)));
        }
    };
}
pub(crate) use ensure_internal;

/// Frames of the explicit recursion.
pub(crate) enum Frame {
    Start(Option<Query>),
    Lemma1(Box<Lemma1Frame>),
    Lemma2(Box<Lemma2Frame>),
    CycleReduce(Box<CycleReduceFrame>),
    Chain(Box<ChainFrame>),
    Sanders(Box<SandersFrame>),
}

/// Sibling-overlap bookkeeping: per live frame, the edges of its children.
struct OverlapFrame {
    edge_owner: HashMap<(VertexId, VertexId), u32>,
    pair_counts: HashMap<(u32, u32), u32>,
    child_idx: u32,
    issued_call: bool,
}

impl OverlapFrame {
    fn new() -> Self {
        OverlapFrame {
            edge_owner: HashMap::new(),
            pair_counts: HashMap::new(),
            child_idx: 0,
            issued_call: false,
        }
    }

    fn on_child(&mut self, q: &Query) -> Result<(), SolveError> {
        let idx = self.child_idx;
        self.child_idx += 1;
        for (u, v) in q.graph().edges() {
            let k = edge_key(u, v);
            match self.edge_owner.get(&k) {
                None => {
                    self.edge_owner.insert(k, idx);
                }
                Some(&j) if j != idx => {
                    let c = self.pair_counts.entry((j, idx)).or_insert(0);
                    *c += 1;
                    if *c > 1 {
                        return Err(SolveError::Internal(format!(
                            "sibling subgraphs {j} and {idx} share more than one edge"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Run one job to completion on the explicit stack.
pub(crate) fn run_machine(root: Query, ctx: &mut Ctx) -> Result<Vec<VertexId>, SolveError> {
    let mut stack: Vec<Frame> = vec![Frame::Start(Some(root))];
    let mut overlap: Vec<OverlapFrame> = vec![OverlapFrame::new()];
    let mut reply: Option<Vec<VertexId>> = None;
    loop {
        let Some(top) = stack.last_mut() else {
            return Err(ctx.internal("machine ran dry"));
        };
        let step = resume(top, ctx, reply.take())?;
        match step {
            Step::Done(out) => {
                stack.pop();
                overlap.pop();
                if stack.is_empty() {
                    return Ok(out);
                }
                reply = Some(out);
            }
            Step::Call(q) => {
                if ctx.opts.strict {
                    if !crate::connectivity::is_2connected(q.graph())
                        && q.graph().vertex_count() > 2
                    {
                        return Err(ctx.internal("child query graph is not 2-connected"));
                    }
                    let of = overlap.last_mut().unwrap();
                    of.on_child(&q)?;
                }
                let of = overlap.last_mut().unwrap();
                if !of.issued_call {
                    of.issued_call = true;
                    ctx.stats.calls += 1;
                }
                stack.push(Frame::Start(Some(q)));
                overlap.push(OverlapFrame::new());
            }
        }
    }
}

fn resume(
    frame: &mut Frame,
    ctx: &mut Ctx,
    reply: Option<Vec<VertexId>>,
) -> Result<Step, SolveError> {
    // Start frames dispatch in place, then fall through to the chosen case.
    if let Frame::Start(q) = frame {
        let q = q.take().ok_or_else(|| ctx.internal("re-entered start"))?;
        match dispatch(q, ctx)? {
            DispatchOutcome::Done(p) => return Ok(Step::Done(p)),
            DispatchOutcome::Run(f) => *frame = f,
        }
    }
    match frame {
        Frame::Start(_) => unreachable!(),
        Frame::Lemma1(f) => f.resume(ctx, reply),
        Frame::Lemma2(f) => f.resume(ctx, reply),
        Frame::CycleReduce(f) => f.resume(ctx, reply),
        Frame::Chain(f) => f.resume(ctx, reply),
        Frame::Sanders(f) => f.resume(ctx, reply),
    }
}

enum DispatchOutcome {
    Done(Vec<VertexId>),
    Run(Frame),
}

fn dispatch(q: Query, ctx: &mut Ctx) -> Result<DispatchOutcome, SolveError> {
    match q {
        Query::Path { g, x, alpha, y } => dispatch_path(g, x, alpha, y, ctx),
        Query::Cycle { g, edges } => dispatch_cycle(g, edges, ctx),
    }
}

fn dispatch_path(
    g: PlaneGraph,
    x: VertexId,
    alpha: (VertexId, VertexId),
    y: VertexId,
    ctx: &mut Ctx,
) -> Result<DispatchOutcome, SolveError> {
    ensure_internal!(x != y, "query has x = y = {x}");
    ensure_internal!(
        g.is_outer_edge(alpha.0, alpha.1),
        "alpha {alpha:?} not on the outer cycle"
    );
    // alpha = xy
    if edge_key(alpha.0, alpha.1) == edge_key(x, y) {
        ctx.stats.cases.trivial_alpha_xy += 1;
        return Ok(DispatchOutcome::Done(vec![x, y]));
    }
    // triangle
    if g.vertex_count() == 3 {
        ctx.stats.cases.trivial_triangle += 1;
        let z = g.vertices().find(|&v| v != x && v != y).unwrap();
        return Ok(DispatchOutcome::Done(vec![x, z, y]));
    }
    if let Some(dec) = find_lemma1_decomposition(&g, x, alpha, y) {
        ctx.stats.cases.lemma1 += 1;
        ctx.stats.decompositions += 1;
        return Ok(DispatchOutcome::Run(Frame::Lemma1(Box::new(
            Lemma1Frame::new(g, x, alpha, y, dec)?,
        ))));
    }
    if let Some(j) = find_lemma2_bridge(&g, x, alpha, y) {
        ctx.stats.cases.lemma2 += 1;
        return Ok(DispatchOutcome::Run(Frame::Lemma2(Box::new(
            Lemma2Frame::new(g, x, alpha, y, j)?,
        ))));
    }
    if g.is_on_outer(x) || g.is_on_outer(y) {
        ctx.stats.cases.thomassen += 1;
        return Ok(DispatchOutcome::Run(Frame::Chain(Box::new(
            ChainFrame::new_thomassen(g, x, alpha, y)?,
        ))));
    }
    ctx.stats.cases.sanders += 1;
    Ok(DispatchOutcome::Run(Frame::Sanders(Box::new(
        SandersFrame::new(g, x, alpha, y)?,
    ))))
}

fn dispatch_cycle(
    g: PlaneGraph,
    edges: Vec<(VertexId, VertexId)>,
    ctx: &mut Ctx,
) -> Result<DispatchOutcome, SolveError> {
    for &(a, b) in &edges {
        ensure_internal!(g.is_outer_edge(a, b), "edge ({a},{b}) not on outer cycle");
    }
    if g.vertex_count() == 3 {
        ctx.stats.cases.trivial_triangle += 1;
        return Ok(DispatchOutcome::Done(g.outer_walk().to_vec()));
    }
    // isolated-bridge reduction for the cycle problem
    let avoid: Vec<VertexId> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    if let Some(j) = find_cycle_reduction(&g, &edges, &avoid) {
        ctx.stats.cases.lemma2 += 1;
        return Ok(DispatchOutcome::Run(Frame::CycleReduce(Box::new(
            CycleReduceFrame::new(g, edges, j)?,
        ))));
    }
    ctx.stats.cases.three_edge += 1;
    Ok(DispatchOutcome::Run(Frame::Chain(Box::new(
        ChainFrame::new_three_edge(g, edges)?,
    ))))
}

/// Isolated-bridge reduction candidates for the cycle problem: a
/// {c, d}-bridge with an internal outer vertex avoiding all prescribed edges.
fn find_cycle_reduction(
    g: &PlaneGraph,
    edges: &[(VertexId, VertexId)],
    _avoid: &[VertexId],
) -> Option<crate::decomposition::Lemma2Bridge> {
    use crate::connectivity::{components_without, outer_pair_index};
    let idx = outer_pair_index(g);
    let mut pairs: Vec<(VertexId, VertexId)> = idx
        .witnesses
        .keys()
        .copied()
        .filter(|&(c, d)| idx.separates(g, c, d))
        .collect();
    pairs.sort_unstable();
    let size = g.max_id() as usize + 1;
    let on_outer = {
        let mut v = vec![false; size];
        for &w in g.outer_walk() {
            v[w as usize] = true;
        }
        v
    };
    for (c, d) in pairs {
        let mut removed = vec![false; size];
        removed[c as usize] = true;
        removed[d as usize] = true;
        let comps = components_without(g, &removed);
        'comp: for comp in &comps {
            if !comp.iter().any(|&v| on_outer[v as usize]) {
                continue;
            }
            for &(a, b) in edges {
                if comp.binary_search(&a).is_ok() || comp.binary_search(&b).is_ok() {
                    continue 'comp;
                }
            }
            return Some(crate::decomposition::Lemma2Bridge {
                c,
                d,
                internals: comp.clone(),
            });
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Lemma 1 frame

enum L1Case {
    BothLeft,       // y on the left side: merge an x-cd-y path with a c-alpha-d path
    AnchorIsCutEnd, // y right, x in {c,d}
    AnchorInterior, // y right, x off the separator: subdivision trick
}

pub(crate) struct Lemma1Frame {
    c: VertexId,
    d: VertexId,
    xx: VertexId, // anchor after the variant swap
    yy: VertexId,
    alpha: (VertexId, VertexId),
    swapped: bool,
    case: L1Case,
    stage: u8,
    g: PlaneGraph,
    l_side: Vec<bool>,
    r_side: Vec<bool>,
    stored: Option<Vec<VertexId>>,
    // case AnchorIsCutEnd replacement machinery
    gl_blocks: Vec<BlockQuery>,
    gl_idx: usize,
    gl_paths: Vec<Vec<VertexId>>,
    // case AnchorInterior
    z: VertexId,
    other_end: VertexId,
}

struct BlockQuery {
    g: Option<PlaneGraph>, // None: trivial edge block
    from: VertexId,
    to: VertexId,
    alpha: (VertexId, VertexId),
}

impl Lemma1Frame {
    fn new(
        g: PlaneGraph,
        x: VertexId,
        alpha: (VertexId, VertexId),
        y: VertexId,
        dec: crate::decomposition::Lemma1Decomposition,
    ) -> Result<Lemma1Frame, SolveError> {
        let (xx, yy) = if dec.swapped { (y, x) } else { (x, y) };
        let (c, d) = (dec.c, dec.d);
        let case = if dec.l_side[yy as usize] {
            L1Case::BothLeft
        } else if xx == c || xx == d {
            L1Case::AnchorIsCutEnd
        } else {
            L1Case::AnchorInterior
        };
        Ok(Lemma1Frame {
            c,
            d,
            xx,
            yy,
            alpha,
            swapped: dec.swapped,
            case,
            stage: 0,
            g,
            l_side: dec.l_side,
            r_side: dec.r_side,
            stored: None,
            gl_blocks: Vec::new(),
            gl_idx: 0,
            gl_paths: Vec::new(),
            z: 0,
            other_end: 0,
        })
    }

    fn alpha_witness(&self) -> Option<(VertexId, VertexId)> {
        directed_on_outer(&self.g, self.alpha)
    }

    fn finish(&self, mut p: Vec<VertexId>) -> Vec<VertexId> {
        if self.swapped {
            p.reverse();
        }
        p
    }

    fn resume(&mut self, ctx: &mut Ctx, reply: Option<Vec<VertexId>>) -> Result<Step, SolveError> {
        let (c, d) = (self.c, self.d);
        match self.case {
            L1Case::BothLeft => match self.stage {
                0 => {
                    self.stage = 1;
                    let (gl, _) = self
                        .g
                        .separator_side(&self.l_side, c, d, None)
                        .map_err(SolveError::Graph)?;
                    Ok(Step::Call(Query::Path {
                        g: gl,
                        x: self.xx,
                        alpha: (c, d),
                        y: self.yy,
                    }))
                }
                1 => {
                    self.stage = 2;
                    self.stored = reply;
                    let (gr, _) = self
                        .g
                        .separator_side(&self.r_side, c, d, self.alpha_witness())
                        .map_err(SolveError::Graph)?;
                    Ok(Step::Call(Query::Path {
                        g: gr,
                        x: c,
                        alpha: self.alpha,
                        y: d,
                    }))
                }
                _ => {
                    let p_r = reply.ok_or_else(|| ctx.internal("missing reply"))?;
                    let p_l = self.stored.take().unwrap();
                    let p = splice_edge_with_path(&p_l, (c, d), &p_r)
                        .ok_or_else(|| ctx.internal("cd not on left path"))?;
                    Ok(Step::Done(self.finish(p)))
                }
            },
            L1Case::AnchorIsCutEnd => match self.stage {
                0 => {
                    self.stage = 1;
                    let (gr, _) = self
                        .g
                        .separator_side(&self.r_side, c, d, self.alpha_witness())
                        .map_err(SolveError::Graph)?;
                    Ok(Step::Call(Query::Path {
                        g: gr,
                        x: self.xx,
                        alpha: self.alpha,
                        y: self.yy,
                    }))
                }
                1 => {
                    let p_r = reply.ok_or_else(|| ctx.internal("missing reply"))?;
                    let other = if self.xx == c { d } else { c };
                    ensure_internal!(
                        p_r.contains(&other),
                        "minimality: {other} must lie on the right path"
                    );
                    if find_consecutive(&p_r, (c, d)).is_none() {
                        return Ok(Step::Done(self.finish(p_r)));
                    }
                    self.stored = Some(p_r);
                    // replace cd by a Tutte path of the left side through
                    // some outer edge; the left side may be a chain of blocks
                    self.gl_blocks = left_side_chain(&self.g, &self.l_side, c, d)?;
                    self.stage = 2;
                    self.advance_left_chain(ctx, None)
                }
                _ => self.advance_left_chain(ctx, reply),
            },
            L1Case::AnchorInterior => match self.stage {
                0 => {
                    self.stage = 1;
                    let (gr, _) = self
                        .g
                        .separator_side(&self.r_side, c, d, self.alpha_witness())
                        .map_err(SolveError::Graph)?;
                    let (gstar, z) = gr.subdivide_edge(c, d).map_err(SolveError::Graph)?;
                    self.z = z;
                    Ok(Step::Call(Query::Path {
                        g: gstar,
                        x: z,
                        alpha: self.alpha,
                        y: self.yy,
                    }))
                }
                1 => {
                    let p_star = reply.ok_or_else(|| ctx.internal("missing reply"))?;
                    ensure_internal!(p_star.first() == Some(&self.z), "path must start at z");
                    let w = p_star[1];
                    ensure_internal!(w == c || w == d, "z leads into the separator");
                    let other = if w == c { d } else { c };
                    ensure_internal!(
                        p_star.contains(&other),
                        "minimality: {other} must lie on the subdivided path"
                    );
                    self.other_end = other;
                    self.stored = Some(p_star);
                    self.stage = 2;
                    let (gl, _) = self
                        .g
                        .separator_side(&self.l_side, c, d, None)
                        .map_err(SolveError::Graph)?;
                    Ok(Step::Call(Query::Path {
                        g: gl,
                        x: self.xx,
                        alpha: (c, d),
                        y: other,
                    }))
                }
                _ => {
                    let p_l = reply.ok_or_else(|| ctx.internal("missing reply"))?;
                    let p_star = self.stored.take().unwrap();
                    let other = self.other_end;
                    ensure_internal!(
                        p_l.len() >= 2 && *p_l.last().unwrap() == other,
                        "left path must end at {other}"
                    );
                    ensure_internal!(
                        edge_key(p_l[p_l.len() - 2], other) == edge_key(c, d),
                        "cd must be the final edge of the left path"
                    );
                    let mut p: Vec<VertexId> = p_l[..p_l.len() - 1].to_vec();
                    p.extend_from_slice(&p_star[1..]);
                    Ok(Step::Done(self.finish(p)))
                }
            },
        }
    }

    fn advance_left_chain(
        &mut self,
        ctx: &mut Ctx,
        reply: Option<Vec<VertexId>>,
    ) -> Result<Step, SolveError> {
        if let Some(p) = reply {
            self.gl_paths.push(p);
            self.gl_idx += 1;
        }
        while self.gl_idx < self.gl_blocks.len() {
            let bq = &mut self.gl_blocks[self.gl_idx];
            match bq.g.take() {
                None => {
                    self.gl_paths.push(vec![bq.from, bq.to]);
                    self.gl_idx += 1;
                }
                Some(bg) => {
                    return Ok(Step::Call(Query::Path {
                        g: bg,
                        x: bq.from,
                        alpha: bq.alpha,
                        y: bq.to,
                    }));
                }
            }
        }
        // concatenate the chain paths c -> d and replace cd in the right path
        let mut p_l: Vec<VertexId> = Vec::new();
        for (i, piece) in self.gl_paths.iter().enumerate() {
            if i == 0 {
                p_l.extend_from_slice(piece);
            } else {
                ensure_internal!(
                    p_l.last() == piece.first(),
                    "chain pieces must share junctions"
                );
                p_l.extend_from_slice(&piece[1..]);
            }
        }
        let p_r = self.stored.take().unwrap();
        let p = splice_edge_with_path(&p_r, (self.c, self.d), &p_l)
            .ok_or_else(|| ctx.internal("cd not on right path"))?;
        Ok(Step::Done(self.finish(p)))
    }
}

/// Subqueries for a c-to-d Tutte traversal of the left side, which may be a
/// chain of blocks (one query per non-trivial block).
fn left_side_chain(
    g: &PlaneGraph,
    l_side: &[bool],
    c: VertexId,
    d: VertexId,
) -> Result<Vec<BlockQuery>, SolveError> {
    let (gl, _) = g
        .restrict(|v| l_side[v as usize], |_, _| true)
        .map_err(SolveError::Graph)?;
    let bct = crate::connectivity::block_cut_tree(&gl);
    let chain = crate::connectivity::minimal_chain_of_blocks(&gl, &bct, c, d)
        .map_err(SolveError::Graph)?;
    // e: smallest outer edge of the left side shared with the host outer
    // cycle, else the smallest outer edge of the left side
    let host_outer: Vec<(VertexId, VertexId)> = {
        let w = g.outer_walk();
        (0..w.len())
            .map(|i| edge_key(w[i], w[(i + 1) % w.len()]))
            .collect()
    };
    let e_pref = {
        let w = gl.outer_walk();
        let mut best: Option<(VertexId, VertexId)> = None;
        for i in 0..w.len() {
            let e = edge_key(w[i], w[(i + 1) % w.len()]);
            if host_outer.contains(&e) && best.map(|b| e < b).unwrap_or(true) {
                best = Some(e);
            }
        }
        best.or_else(|| smallest_cycle_edge(gl.outer_walk(), &[]))
    };
    let mut out = Vec::new();
    for (i, &b) in chain.blocks.iter().enumerate() {
        let from = chain.junctions[i];
        let to = chain.junctions[i + 1];
        let block = &bct.blocks[b];
        if block.trivial {
            out.push(BlockQuery {
                g: None,
                from,
                to,
                alpha: (from, to),
            });
            continue;
        }
        let edge_set: std::collections::HashSet<(VertexId, VertexId)> = block
            .edges
            .iter()
            .map(|&(a, bb)| edge_key(a, bb))
            .collect();
        let (bg, _) = gl
            .restrict(
                |v| block.vertices.contains(&v),
                |a, bb| edge_set.contains(&edge_key(a, bb)),
            )
            .map_err(SolveError::Graph)?;
        let cyc = bg.outer_cycle().map_err(SolveError::Graph)?;
        let alpha = e_pref
            .filter(|&e| {
                let k = cyc.len();
                (0..k).any(|i| edge_key(cyc[i], cyc[(i + 1) % k]) == e)
                    && e != edge_key(from, to)
            })
            .or_else(|| smallest_cycle_edge(&cyc, &[(from, to)]))
            .ok_or_else(|| SolveError::Internal("no alpha for left block".into()))?;
        out.push(BlockQuery {
            g: Some(bg),
            from,
            to,
            alpha,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lemma 2 frame

pub(crate) struct Lemma2Frame {
    g: PlaneGraph,
    c: VertexId,
    d: VertexId,
    internals: Vec<VertexId>,
    stage: u8,
    stored: Option<Vec<VertexId>>,
    query_params: (VertexId, (VertexId, VertexId), VertexId),
}

impl Lemma2Frame {
    fn new(
        g: PlaneGraph,
        x: VertexId,
        alpha: (VertexId, VertexId),
        y: VertexId,
        j: crate::decomposition::Lemma2Bridge,
    ) -> Result<Lemma2Frame, SolveError> {
        Ok(Lemma2Frame {
            g,
            c: j.c,
            d: j.d,
            internals: j.internals,
            stage: 0,
            stored: None,
            query_params: (x, alpha, y),
        })
    }

    fn resume_with(
        &mut self,
        ctx: &mut Ctx,
        reply: Option<Vec<VertexId>>,
        first: impl FnOnce(&PlaneGraph) -> Query,
        is_cycle: bool,
    ) -> Result<Step, SolveError> {
        let (c, d) = (self.c, self.d);
        match self.stage {
            0 => {
                self.stage = 1;
                let size = self.g.max_id() as usize + 1;
                let mut side = vec![true; size];
                for &v in &self.internals {
                    side[v as usize] = false;
                }
                for v in 0..size {
                    if !self.g.contains_vertex(v as VertexId) {
                        side[v] = false;
                    }
                }
                let (gp, _) = self
                    .g
                    .separator_side(&side, c, d, None)
                    .map_err(SolveError::Graph)?;
                Ok(Step::Call(first(&gp)))
            }
            1 => {
                let p = reply.ok_or_else(|| ctx.internal("missing reply"))?;
                let used = if is_cycle {
                    cycle_has_edge(&p, (c, d))
                } else {
                    find_consecutive(&p, (c, d)).is_some()
                };
                if !used {
                    return Ok(Step::Done(p));
                }
                self.stored = Some(p);
                self.stage = 2;
                // J* = J plus cd
                let size = self.g.max_id() as usize + 1;
                let mut side = vec![false; size];
                for &v in &self.internals {
                    side[v as usize] = true;
                }
                side[c as usize] = true;
                side[d as usize] = true;
                let (jstar, _) = self
                    .g
                    .separator_side(&side, c, d, None)
                    .map_err(SolveError::Graph)?;
                let cyc = jstar.outer_cycle().map_err(SolveError::Graph)?;
                let alpha_j = smallest_cycle_edge(&cyc, &[(c, d)])
                    .ok_or_else(|| ctx.internal("no alpha for the bridge graph"))?;
                Ok(Step::Call(Query::Path {
                    g: jstar,
                    x: c,
                    alpha: alpha_j,
                    y: d,
                }))
            }
            _ => {
                let pj = reply.ok_or_else(|| ctx.internal("missing reply"))?;
                let p = self.stored.take().unwrap();
                let out = if is_cycle {
                    splice_edge_in_cycle(&p, (c, d), &pj)
                } else {
                    splice_edge_with_path(&p, (c, d), &pj)
                }
                .ok_or_else(|| ctx.internal("cd vanished before splicing"))?;
                Ok(Step::Done(out))
            }
        }
    }
}

impl Lemma2Frame {
    fn resume(&mut self, ctx: &mut Ctx, reply: Option<Vec<VertexId>>) -> Result<Step, SolveError> {
        let q = self.query_params;
        self.resume_with(
            ctx,
            reply,
            |gp| Query::Path {
                g: gp.clone(),
                x: q.0,
                alpha: q.1,
                y: q.2,
            },
            false,
        )
    }
}

// Lemma 2 needs the original query parameters for its first child call.
// They are stored alongside the frame.
pub(crate) struct CycleReduceFrame {
    inner: Lemma2Frame,
    edges: Vec<(VertexId, VertexId)>,
}

impl CycleReduceFrame {
    fn new(
        g: PlaneGraph,
        edges: Vec<(VertexId, VertexId)>,
        j: crate::decomposition::Lemma2Bridge,
    ) -> Result<CycleReduceFrame, SolveError> {
        Ok(CycleReduceFrame {
            inner: Lemma2Frame {
                g,
                c: j.c,
                d: j.d,
                internals: j.internals,
                stage: 0,
                stored: None,
                query_params: (0, (0, 0), 0),
            },
            edges,
        })
    }

    fn resume(&mut self, ctx: &mut Ctx, reply: Option<Vec<VertexId>>) -> Result<Step, SolveError> {
        let edges = self.edges.clone();
        self.inner.resume_with(
            ctx,
            reply,
            |gp| Query::Cycle {
                g: gp.clone(),
                edges,
            },
            true,
        )
    }
}

// ---------------------------------------------------------------------------
// shared path plumbing

/// Directed occurrence of an undirected edge on the outer walk.
pub(crate) fn directed_on_outer(
    g: &PlaneGraph,
    e: (VertexId, VertexId),
) -> Option<(VertexId, VertexId)> {
    let w = g.outer_walk();
    let k = w.len();
    (0..k).find_map(|i| {
        let (a, b) = (w[i], w[(i + 1) % k]);
        if edge_key(a, b) == edge_key(e.0, e.1) {
            Some((a, b))
        } else {
            None
        }
    })
}

/// Index i such that path[i], path[i+1] is the given edge.
pub(crate) fn find_consecutive(path: &[VertexId], e: (VertexId, VertexId)) -> Option<usize> {
    let k = edge_key(e.0, e.1);
    path.windows(2)
        .position(|w| edge_key(w[0], w[1]) == k)
}

pub(crate) fn cycle_has_edge(cycle: &[VertexId], e: (VertexId, VertexId)) -> bool {
    let k = edge_key(e.0, e.1);
    let n = cycle.len();
    (0..n).any(|i| edge_key(cycle[i], cycle[(i + 1) % n]) == k)
}

/// Replace the consecutive occurrence of edge (c, d) in `host` by `path`
/// (which runs from c to d in either orientation).
pub(crate) fn splice_edge_with_path(
    host: &[VertexId],
    e: (VertexId, VertexId),
    path: &[VertexId],
) -> Option<Vec<VertexId>> {
    let i = find_consecutive(host, e)?;
    let (a, b) = (host[i], host[i + 1]);
    let seg: Vec<VertexId> = if path.first() == Some(&a) && path.last() == Some(&b) {
        path.to_vec()
    } else if path.first() == Some(&b) && path.last() == Some(&a) {
        let mut r = path.to_vec();
        r.reverse();
        r
    } else {
        return None;
    };
    let mut out = Vec::with_capacity(host.len() + seg.len() - 2);
    out.extend_from_slice(&host[..i]);
    out.extend_from_slice(&seg);
    out.extend_from_slice(&host[i + 2..]);
    Some(out)
}

/// Same replacement inside a closed cycle (the edge may be the wrap pair).
pub(crate) fn splice_edge_in_cycle(
    cycle: &[VertexId],
    e: (VertexId, VertexId),
    path: &[VertexId],
) -> Option<Vec<VertexId>> {
    let n = cycle.len();
    let k = edge_key(e.0, e.1);
    let i = (0..n).find(|&i| edge_key(cycle[i], cycle[(i + 1) % n]) == k)?;
    // rotate so the edge is the wrap pair (last, first)
    let rotated: Vec<VertexId> = (0..n).map(|j| cycle[(i + 1 + j) % n]).collect();
    let (first, last) = (rotated[0], rotated[n - 1]);
    let seg: Vec<VertexId> = if path.first() == Some(&last) && path.last() == Some(&first) {
        path.to_vec()
    } else if path.first() == Some(&first) && path.last() == Some(&last) {
        let mut r = path.to_vec();
        r.reverse();
        r
    } else {
        return None;
    };
    // rotated runs first..last; seg runs last..first: glue dropping both ends
    let mut out = rotated;
    out.extend_from_slice(&seg[1..seg.len() - 1]);
    Some(out)
}

// ---------------------------------------------------------------------------
// public API

fn check_root_query(g: &PlaneGraph, q: &TuttePathQuery) -> Result<(), SolveError> {
    if !g.contains_vertex(q.x) || !g.contains_vertex(q.y) || q.x == q.y {
        return Err(SolveError::InvalidQuery(format!(
            "bad endpoints ({}, {})",
            q.x, q.y
        )));
    }
    if !crate::connectivity::is_2connected(g) {
        return Err(SolveError::InvalidQuery("graph is not 2-connected".into()));
    }
    if !g.is_outer_edge(q.alpha.0, q.alpha.1) {
        return Err(SolveError::InvalidQuery(format!(
            "alpha {:?} is not an outer edge",
            q.alpha
        )));
    }
    Ok(())
}

/// Compute an x-alpha-y Tutte path of g. The result is verified before it is
/// returned; InvalidQuery reports bad input, Internal signals a solver bug.
pub fn tpath(
    g: &PlaneGraph,
    q: &TuttePathQuery,
    opts: &SolveOptions,
) -> Result<TutteResult, SolveError> {
    check_root_query(g, q)?;
    let mut ctx = Ctx {
        opts: *opts,
        stats: RunStats::default(),
    };
    let path = run_machine(
        Query::Path {
            g: g.clone(),
            x: q.x,
            alpha: q.alpha,
            y: q.y,
        },
        &mut ctx,
    )?;
    let verdict = verify_tutte_path(
        g,
        &path,
        PathMode::Path,
        Some(&PathQuery {
            x: q.x,
            y: q.y,
            alpha: q.alpha,
        }),
    )
    .map_err(|e| SolveError::Internal(format!("verification failed: {e}")))?;
    if !verdict.accept {
        return Err(SolveError::Internal(format!(
            "result is not a Tutte path: {:?} (path {path:?})",
            verdict.violation
        )));
    }
    Ok(TutteResult {
        path,
        contains_alpha: true,
        stats: ctx.stats,
    })
}

/// Compute a Tutte cycle through three distinct outer edges.
pub fn three_edge_cycle(
    g: &PlaneGraph,
    e1: (VertexId, VertexId),
    e2: (VertexId, VertexId),
    e3: (VertexId, VertexId),
    opts: &SolveOptions,
) -> Result<ThreeEdgeResult, SolveError> {
    let mut es = vec![
        edge_key(e1.0, e1.1),
        edge_key(e2.0, e2.1),
        edge_key(e3.0, e3.1),
    ];
    es.sort_unstable();
    es.dedup();
    if es.len() != 3 {
        return Err(SolveError::InvalidQuery("edges must be distinct".into()));
    }
    if !crate::connectivity::is_2connected(g) {
        return Err(SolveError::InvalidQuery("graph is not 2-connected".into()));
    }
    for &(a, b) in &es {
        if !g.is_outer_edge(a, b) {
            return Err(SolveError::InvalidQuery(format!(
                "({a},{b}) is not an outer edge"
            )));
        }
    }
    let mut ctx = Ctx {
        opts: *opts,
        stats: RunStats::default(),
    };
    let cycle = run_machine(
        Query::Cycle {
            g: g.clone(),
            edges: es.clone(),
        },
        &mut ctx,
    )?;
    let verdict = verify_tutte_path(g, &cycle, PathMode::Cycle, None)
        .map_err(|e| SolveError::Internal(format!("verification failed: {e}")))?;
    if !verdict.accept {
        return Err(SolveError::Internal(format!(
            "result is not a Tutte cycle: {:?}",
            verdict.violation
        )));
    }
    for &(a, b) in &es {
        if !cycle_has_edge(&cycle, (a, b)) {
            return Err(SolveError::Internal(format!(
                "prescribed edge ({a},{b}) missing from the cycle"
            )));
        }
    }
    Ok(ThreeEdgeResult {
        cycle,
        stats: ctx.stats,
    })
}

/// Normalized arc positions around the outer cycle, cut at a reference.
pub(crate) fn cut_positions(g: &PlaneGraph, reference: VertexId) -> (CyclePos, usize) {
    let cp = CyclePos::new(g.outer_walk().to_vec(), g.max_id());
    let r = cp.pos(reference).expect("reference on outer cycle");
    (cp, r)
}

pub(crate) fn edges_of_path(p: &[VertexId]) -> Vec<(VertexId, VertexId)> {
    path_edges(p)
}

//! Structural predicates and graph surgery: decomposability along outer
//! 2-separators, isolated-bridge reduction, boundary data, maximal
//! 2-separators on boundary parts, splitting off, and the eta reduction.

use crate::connectivity::{component_of, components_without, outer_pair_index, OuterPairIndex};
use crate::error::{GraphError, SolveError};
use crate::plane_graph::{edge_key, PlaneGraph, VertexId};

/// Positions of a cycle's vertices, for arc arithmetic.
pub(crate) struct CyclePos {
    pub cycle: Vec<VertexId>,
    pos: Vec<u32>,
}

impl CyclePos {
    pub fn new(cycle: Vec<VertexId>, max_id: VertexId) -> CyclePos {
        let mut pos = vec![u32::MAX; max_id as usize + 1];
        for (i, &v) in cycle.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        CyclePos { cycle, pos }
    }

    pub fn pos(&self, v: VertexId) -> Option<usize> {
        let p = *self.pos.get(v as usize)?;
        if p == u32::MAX {
            None
        } else {
            Some(p as usize)
        }
    }

    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    /// clockwise distance from a to b
    pub fn dist(&self, a: VertexId, b: VertexId) -> usize {
        let (pa, pb) = (self.pos(a).unwrap(), self.pos(b).unwrap());
        (pb + self.len() - pa) % self.len()
    }

    pub fn at(&self, i: usize) -> VertexId {
        self.cycle[i % self.len()]
    }
}

/// A decomposition of G into G_L and G_R along {c, d} (Lemma 1 shape).
#[derive(Debug)]
pub struct Lemma1Decomposition {
    pub c: VertexId,
    pub d: VertexId,
    pub g_l: PlaneGraph,
    pub g_r: PlaneGraph,
    /// the y-side variant was chosen: y plays the role of x
    pub swapped: bool,
    pub size_r: usize,
    /// vertex side bitmaps, both containing c and d
    pub l_side: Vec<bool>,
    pub r_side: Vec<bool>,
}

fn side_bitmap(size: usize, comps: &[&Vec<VertexId>], c: VertexId, d: VertexId) -> Vec<bool> {
    let mut s = vec![false; size];
    s[c as usize] = true;
    s[d as usize] = true;
    for comp in comps {
        for &v in comp.iter() {
            s[v as usize] = true;
        }
    }
    s
}

/// Minimal-|V(G_R)| decomposition of g per Lemma 1, over outer 2-separators,
/// trying both the x-side and the symmetric y-side variant. Ties break to the
/// lexicographically smallest (c, d), x-variant first.
pub fn find_lemma1_decomposition(
    g: &PlaneGraph,
    x: VertexId,
    alpha: (VertexId, VertexId),
    y: VertexId,
) -> Option<Lemma1Decomposition> {
    let idx = outer_pair_index(g);
    let mut pairs: Vec<(VertexId, VertexId)> = idx
        .witnesses
        .keys()
        .copied()
        .filter(|&(c, d)| idx.separates(g, c, d))
        .collect();
    pairs.sort_unstable();
    let size = g.max_id() as usize + 1;
    type Best = (usize, (VertexId, VertexId), bool, Vec<usize>, Vec<Vec<VertexId>>);
    let mut best: Option<Best> = None;
    for (c, d) in pairs {
        let mut removed = vec![false; size];
        removed[c as usize] = true;
        removed[d as usize] = true;
        let comps = components_without(g, &removed);
        let locate = |v: VertexId| -> Option<usize> {
            if v == c || v == d {
                return None;
            }
            comps.iter().position(|comp| comp.binary_search(&v).is_ok())
        };
        let alpha_comp = locate(alpha.0).or_else(|| locate(alpha.1));
        for (anchor, swapped) in [(x, false), (y, true)] {
            let anchor_comp = locate(anchor);
            // R takes the alpha component (if any); the anchor stays left
            let mut r: Vec<usize> = Vec::new();
            if let Some(ac) = alpha_comp {
                if anchor_comp == Some(ac) {
                    continue;
                }
                r.push(ac);
            }
            if r.is_empty() {
                // alpha = cd: add the smallest other component
                let mut cands: Vec<usize> = (0..comps.len())
                    .filter(|&i| Some(i) != anchor_comp)
                    .collect();
                cands.sort_by_key(|&i| (comps[i].len(), comps[i][0]));
                match cands.first() {
                    Some(&i) => r.push(i),
                    None => continue,
                }
            }
            let l_comps: Vec<usize> = (0..comps.len()).filter(|i| !r.contains(i)).collect();
            let l_internal: usize = l_comps.iter().map(|&i| comps[i].len()).sum();
            // V(G_L) != {anchor, c, d}
            if anchor == c || anchor == d {
                if l_internal == 0 {
                    continue;
                }
            } else if l_internal == 1
                && l_comps
                    .iter()
                    .any(|&i| comps[i].len() == 1 && comps[i][0] == anchor)
            {
                continue;
            }
            let size_r = r.iter().map(|&i| comps[i].len()).sum::<usize>() + 2;
            let key = (size_r, (c, d), swapped);
            let better = match &best {
                None => true,
                Some((bs, bp, bsw, _, _)) => key < (*bs, *bp, *bsw),
            };
            if better {
                best = Some((size_r, (c, d), swapped, r, comps.clone()));
            }
        }
    }
    let (size_r, (c, d), swapped, r, comps) = best?;
    let r_refs: Vec<&Vec<VertexId>> = r.iter().map(|&i| &comps[i]).collect();
    let l_refs: Vec<&Vec<VertexId>> = (0..comps.len())
        .filter(|i| !r.contains(i))
        .map(|i| &comps[i])
        .collect();
    let r_side = side_bitmap(size, &r_refs, c, d);
    let l_side = side_bitmap(size, &l_refs, c, d);
    let g_r = g
        .restrict(|v| r_side[v as usize], |_, _| true)
        .map(|(gr, _)| gr)
        .ok()?;
    let g_l = g
        .restrict(|v| l_side[v as usize], |_, _| true)
        .map(|(gl, _)| gl)
        .ok()?;
    Some(Lemma1Decomposition {
        c,
        d,
        g_l,
        g_r,
        swapped,
        size_r,
        l_side,
        r_side,
    })
}

/// A bridge qualifying for the isolated-bridge reduction (Lemma 2 shape):
/// a {c, d}-bridge with an internal vertex on C_G such that x and y are not
/// internal to it and alpha is not one of its edges.
#[derive(Debug)]
pub struct Lemma2Bridge {
    pub c: VertexId,
    pub d: VertexId,
    /// internal vertices of J
    pub internals: Vec<VertexId>,
}

pub fn find_lemma2_bridge(
    g: &PlaneGraph,
    x: VertexId,
    alpha: (VertexId, VertexId),
    y: VertexId,
) -> Option<Lemma2Bridge> {
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
        for comp in &comps {
            if !comp.iter().any(|&v| on_outer[v as usize]) {
                continue;
            }
            if comp.binary_search(&x).is_ok() || comp.binary_search(&y).is_ok() {
                continue;
            }
            if comp.binary_search(&alpha.0).is_ok() || comp.binary_search(&alpha.1).is_ok() {
                continue;
            }
            return Some(Lemma2Bridge {
                c,
                d,
                internals: comp.clone(),
            });
        }
    }
    None
}

/// Boundary data of a block: the points every admissible Tutte path must
/// visit and the arcs of the outer cycle between them.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    /// boundary points in clockwise outer-cycle order
    pub points: Vec<VertexId>,
    /// arcs between consecutive points (endpoints included)
    pub parts: Vec<Vec<VertexId>>,
    pub alpha: (VertexId, VertexId),
    pub v_prev: VertexId,
    pub v_next: VertexId,
    /// w_1..w_p protecting an interior right endpoint, in arc order
    pub w_points: Vec<VertexId>,
    /// z_1..z_q protecting an interior left endpoint
    pub z_points: Vec<VertexId>,
}

/// The separator protecting an interior endpoint: the minimal-length pair
/// {a, b} on one admissible arc whose arc-side bridge contains `target`.
/// Returns (w_1, w_p, attachments of that bridge in arc order).
fn interior_protection(
    b: &PlaneGraph,
    cp: &CyclePos,
    pair_idx: &OuterPairIndex,
    admissible: &[(usize, usize)],
    target: VertexId,
) -> Result<Option<(VertexId, VertexId, Vec<VertexId>)>, SolveError> {
    let k = cp.len();
    let within = |pa: usize, pb: usize| -> bool {
        admissible.iter().any(|&(s, e)| {
            let off_a = (pa + k - s) % k;
            let off_b = (pb + k - s) % k;
            let len = (e + k - s) % k;
            off_a <= off_b && off_b <= len
        })
    };
    // candidates: consecutive outer markers of each inner face
    let faces = b.faces();
    let mut cands: Vec<(usize, VertexId, VertexId)> = Vec::new(); // (arc dist, a, b)
    for f in 0..faces.len() {
        if f == faces.outer {
            continue;
        }
        let mut marks: Vec<usize> = faces.walks[f].iter().filter_map(|&v| cp.pos(v)).collect();
        marks.sort_unstable();
        marks.dedup();
        let mm = marks.len();
        if mm < 2 {
            continue;
        }
        for i in 0..mm {
            let pa = marks[i];
            let pb = marks[(i + 1) % mm];
            let dist = (pb + k - pa) % k;
            if dist < 2 {
                continue;
            }
            let (a, bb) = (cp.at(pa), cp.at(pb));
            if within(pa, pb) && pair_idx.separates(b, a, bb) {
                cands.push((dist, a, bb));
            }
        }
    }
    cands.sort_unstable();
    cands.dedup();
    // side test in length order; Lemma 5 promises a unique minimum
    let mut winner: Option<(usize, VertexId, VertexId)> = None;
    let mut duplicate = false;
    for &(len, a, bb) in &cands {
        if let Some((wl, _, _)) = winner {
            if len > wl {
                break;
            }
        }
        let seed = cp.at((cp.pos(a).unwrap() + 1) % k);
        let comp = component_of(b, a, bb, seed);
        if comp.binary_search(&target).is_ok() {
            if winner.is_some() {
                duplicate = true;
            } else {
                winner = Some((len, a, bb));
            }
        }
    }
    let Some((_, w1, wp)) = winner else {
        return Ok(None);
    };
    if duplicate {
        return Err(SolveError::Internal(format!(
            "protection separator not unique at ({w1}, {wp})"
        )));
    }
    // attachments of the (w1 C wp)-path bridge containing target
    let arc: Vec<VertexId> = {
        let (pa, pb) = (cp.pos(w1).unwrap(), cp.pos(wp).unwrap());
        let mut v = Vec::new();
        let mut i = pa;
        loop {
            v.push(cp.at(i));
            if i == pb {
                break;
            }
            i = (i + 1) % k;
        }
        v
    };
    let size = b.max_id() as usize + 1;
    let mut removed = vec![false; size];
    for &v in &arc {
        removed[v as usize] = true;
    }
    let comps = components_without(b, &removed);
    let tc = comps
        .iter()
        .find(|c| c.binary_search(&target).is_ok())
        .ok_or_else(|| SolveError::Internal("target vanished from protection bridge".into()))?;
    let mut atts: Vec<VertexId> = Vec::new();
    for &v in tc {
        for &u in b.neighbors(v) {
            if removed[u as usize] {
                atts.push(u);
            }
        }
    }
    atts.sort_unstable();
    atts.dedup();
    atts.sort_by_key(|&v| cp.dist(w1, v));
    if atts.len() < 2 || atts.first() != Some(&w1) || atts.last() != Some(&wp) {
        return Err(SolveError::Internal(format!(
            "protection attachments {atts:?} do not span ({w1}, {wp})"
        )));
    }
    Ok(Some((w1, wp, atts)))
}

/// Boundary points and parts of a block with junctions v_prev, v_next and
/// prescribed edge alpha. Junctions off the outer cycle contribute their
/// protection attachments (the w/z points) instead; when no protection
/// separator exists the junction contributes nothing, per the convention.
pub fn compute_boundary(
    b: &PlaneGraph,
    v_prev: VertexId,
    v_next: VertexId,
    alpha: (VertexId, VertexId),
) -> Result<BoundaryData, SolveError> {
    let cycle = b.outer_cycle().map_err(SolveError::Graph)?;
    let cp = CyclePos::new(cycle, b.max_id());
    let k = cp.len();
    if cp.pos(alpha.0).is_none() || cp.pos(alpha.1).is_none() {
        return Err(SolveError::InvalidQuery(format!(
            "alpha {alpha:?} not on the outer cycle"
        )));
    }
    let mut base: Vec<usize> = vec![cp.pos(alpha.0).unwrap(), cp.pos(alpha.1).unwrap()];
    let prev_on = cp.pos(v_prev);
    let next_on = cp.pos(v_next);
    if let Some(p) = prev_on {
        base.push(p);
    }
    if let Some(p) = next_on {
        base.push(p);
    }
    base.sort_unstable();
    base.dedup();
    let arcs: Vec<(usize, usize)> = if base.len() == 1 {
        vec![(base[0], base[0])]
    } else {
        (0..base.len())
            .map(|i| (base[i], base[(i + 1) % base.len()]))
            .collect()
    };
    let pair_idx = outer_pair_index(b);
    let mut w_points = Vec::new();
    let mut z_points = Vec::new();
    let mut w_span: Option<(usize, usize)> = None;
    if next_on.is_none() {
        if let Some((w1, wp, atts)) = interior_protection(b, &cp, &pair_idx, &arcs, v_next)? {
            w_span = Some((cp.pos(w1).unwrap(), cp.pos(wp).unwrap()));
            w_points = atts;
        }
    }
    if prev_on.is_none() {
        if let Some((z1, zq, atts)) = interior_protection(b, &cp, &pair_idx, &arcs, v_prev)? {
            if let Some((ws, we)) = w_span {
                let (zs, ze) = (cp.pos(z1).unwrap(), cp.pos(zq).unwrap());
                let inside = |p: usize, s: usize, e: usize| {
                    let len = (e + k - s) % k;
                    let off = (p + k - s) % k;
                    off > 0 && off < len
                };
                if inside(zs, ws, we)
                    || inside(ze, ws, we)
                    || inside(ws, zs, ze)
                    || inside(we, zs, ze)
                {
                    return Err(SolveError::Internal(
                        "w and z protection arcs overlap".into(),
                    ));
                }
            }
            z_points = atts;
        }
    }
    let mut pts: Vec<usize> = base;
    for v in w_points.iter().chain(z_points.iter()) {
        pts.push(cp.pos(*v).unwrap());
    }
    pts.sort_unstable();
    pts.dedup();
    let points: Vec<VertexId> = pts.iter().map(|&p| cp.at(p)).collect();
    let parts: Vec<Vec<VertexId>> = if pts.len() == 1 {
        let mut part = Vec::with_capacity(k + 1);
        for j in 0..=k {
            part.push(cp.at(pts[0] + j));
        }
        vec![part]
    } else {
        (0..pts.len())
            .map(|i| {
                let s = pts[i];
                let e = pts[(i + 1) % pts.len()];
                let mut part = Vec::new();
                let mut j = s;
                loop {
                    part.push(cp.at(j));
                    if j == e {
                        break;
                    }
                    j = (j + 1) % k;
                }
                part
            })
            .collect()
    };
    Ok(BoundaryData {
        points,
        parts,
        alpha,
        v_prev,
        v_next,
        w_points,
        z_points,
    })
}

/// All maximal 2-separators of the block, each inside one boundary part,
/// ordered clockwise. Pairs whose arc is a single edge split nothing and are
/// omitted.
pub fn maximal_2separators(
    b: &PlaneGraph,
    bd: &BoundaryData,
) -> Result<Vec<(VertexId, VertexId)>, SolveError> {
    let cycle = b.outer_cycle().map_err(SolveError::Graph)?;
    let cp = CyclePos::new(cycle, b.max_id());
    let k = cp.len();
    let pair_idx = outer_pair_index(b);
    let faces = b.faces();
    // interlacing can only occur when alpha is the junction edge (and then
    // eta is never formed); everywhere else it is asserted away
    let interlacing_allowed = edge_key(bd.alpha.0, bd.alpha.1)
        == edge_key(bd.v_prev, bd.v_next)
        && b.has_edge(bd.v_prev, bd.v_next);
    let mut out: Vec<(usize, usize, usize)> = Vec::new(); // (part start, off a, off b)
    for part in &bd.parts {
        if part.len() < 3 {
            continue;
        }
        let s = cp.pos(part[0]).unwrap();
        let part_len = part.len() - 1;
        let in_part_off = |v: VertexId| -> Option<usize> {
            let p = cp.pos(v)?;
            let off = (p + k - s) % k;
            if off <= part_len {
                Some(off)
            } else {
                None
            }
        };
        let mut intervals: Vec<(usize, usize)> = Vec::new(); // offsets within the part
        for f in 0..faces.len() {
            if f == faces.outer {
                continue;
            }
            let mut offs: Vec<usize> = faces.walks[f]
                .iter()
                .filter_map(|&v| in_part_off(v))
                .collect();
            offs.sort_unstable();
            offs.dedup();
            if offs.len() < 2 {
                continue;
            }
            for i in 0..offs.len() {
                let a_off = offs[i];
                for j in (i + 1..offs.len()).rev() {
                    let b_off = offs[j];
                    if b_off - a_off < 2 {
                        break;
                    }
                    let (va, vb) = (cp.at(s + a_off), cp.at(s + b_off));
                    if pair_idx.separates(b, va, vb) {
                        intervals.push((a_off, b_off));
                        break;
                    }
                }
            }
        }
        intervals.sort_unstable_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
        intervals.dedup();
        let mut maximal: Vec<(usize, usize)> = Vec::new();
        for &(a, e) in &intervals {
            if !maximal.iter().any(|&(ms, me)| ms <= a && e <= me) {
                maximal.push((a, e));
            }
        }
        maximal.sort_unstable();
        if !interlacing_allowed {
            for i in 0..maximal.len() {
                for j in i + 1..maximal.len() {
                    let (a, b2) = maximal[i];
                    let (c, d) = maximal[j];
                    if c > a && c < b2 && d > b2 {
                        return Err(SolveError::Internal(format!(
                            "maximal separators interlace: ({a},{b2}) vs ({c},{d})"
                        )));
                    }
                }
            }
        }
        for (a, e) in maximal {
            out.push((s, a, e));
        }
    }
    out.sort_unstable();
    Ok(out
        .into_iter()
        .map(|(s, a, e)| (cp.at(s + a), cp.at(s + e)))
        .collect())
}

/// Split off the arc-side bridge of {c, d}: delete its internal vertices and
/// add cd when missing. Returns (B', B_cd_plus with cd, virtual flag).
pub fn split_off(
    b: &PlaneGraph,
    c: VertexId,
    d: VertexId,
) -> Result<(PlaneGraph, PlaneGraph, bool), SolveError> {
    let cycle = b.outer_walk().to_vec();
    let cp = CyclePos::new(cycle, b.max_id());
    let pc = cp.pos(c).ok_or(SolveError::Graph(GraphError::NotOnCycle))?;
    let _ = cp.pos(d).ok_or(SolveError::Graph(GraphError::NotOnCycle))?;
    let seed = cp.at(pc + 1);
    if seed == d {
        return Err(SolveError::Graph(GraphError::NotASeparator));
    }
    let plus_internals = component_of(b, c, d, seed);
    if plus_internals.len() + 2 >= b.vertex_count() {
        return Err(SolveError::Graph(GraphError::NotASeparator));
    }
    let size = b.max_id() as usize + 1;
    let mut plus_side = vec![false; size];
    for &v in &plus_internals {
        plus_side[v as usize] = true;
    }
    plus_side[c as usize] = true;
    plus_side[d as usize] = true;
    let mut rest_side = vec![false; size];
    for v in b.vertices() {
        if !plus_side[v as usize] || v == c || v == d {
            rest_side[v as usize] = true;
        }
    }
    let (b_rest, added) = b
        .separator_side(&rest_side, c, d, None)
        .map_err(SolveError::Graph)?;
    let (b_plus, added2) = b
        .separator_side(&plus_side, c, d, None)
        .map_err(SolveError::Graph)?;
    debug_assert_eq!(added, added2);
    Ok((b_rest, b_plus, added))
}

/// One recorded split of an eta reduction.
#[derive(Debug, Clone)]
pub struct Split {
    pub c: VertexId,
    pub d: VertexId,
    /// B_cd_plus together with the edge cd
    pub b_plus: PlaneGraph,
    pub virtual_edge: bool,
}

/// Result of reducing a block along all its maximal 2-separators.
#[derive(Debug)]
pub struct EtaReduction {
    pub eta: PlaneGraph,
    pub splits: Vec<Split>,
}

/// Split off every maximal 2-separator of the block. The split order is
/// irrelevant; splits are recorded in clockwise order.
pub fn eta_reduce(b: &PlaneGraph, bd: &BoundaryData) -> Result<EtaReduction, SolveError> {
    let seps = maximal_2separators(b, bd)?;
    let mut g = b.clone();
    let mut splits = Vec::new();
    for (c, d) in seps {
        let (rest, plus, virt) = split_off(&g, c, d)?;
        splits.push(Split {
            c,
            d,
            b_plus: plus,
            virtual_edge: virt,
        });
        g = rest;
    }
    if !(crate::connectivity::is_2connected(&g) || g.vertex_count() == 2) {
        return Err(SolveError::Internal("eta reduction is not a block".into()));
    }
    Ok(EtaReduction { eta: g, splits })
}

/// Brute-force outer 2-separator search, for tests and the small-instance
/// agreement property.
pub fn outer_2separators_brute(g: &PlaneGraph) -> Vec<(VertexId, VertexId)> {
    let outer = g.outer_walk().to_vec();
    let size = g.max_id() as usize + 1;
    let mut out = Vec::new();
    for i in 0..outer.len() {
        for j in i + 1..outer.len() {
            let (c, d) = (outer[i].min(outer[j]), outer[i].max(outer[j]));
            let mut removed = vec![false; size];
            removed[c as usize] = true;
            removed[d as usize] = true;
            if components_without(g, &removed).len() > 1 {
                out.push((c, d));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Replay the splits of an eta reduction in reverse, reconstructing the
/// original block. Test support for the round-trip invariant.
pub fn replay_eta(reduction: &EtaReduction) -> Result<PlaneGraph, SolveError> {
    let mut g = reduction.eta.clone();
    for split in reduction.splits.iter().rev() {
        g = merge_back(&g, split)?;
    }
    Ok(g)
}

fn merge_back(g: &PlaneGraph, split: &Split) -> Result<PlaneGraph, SolveError> {
    let (c, d) = (split.c, split.d);
    let plus = &split.b_plus;
    let mut rot: Vec<(VertexId, Vec<VertexId>)> = Vec::new();
    let all: Vec<VertexId> = {
        let mut v: Vec<VertexId> = g.vertices().chain(plus.vertices()).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for v in all {
        let r = if v == c || v == d {
            let other = if v == c { d } else { c };
            let host: Vec<VertexId> = g.neighbors(v).to_vec();
            let hi = host
                .iter()
                .position(|&u| u == other)
                .ok_or_else(|| SolveError::Internal("cd missing during replay".into()))?;
            let pr: Vec<VertexId> = plus.neighbors(v).to_vec();
            let pi = pr
                .iter()
                .position(|&u| u == other)
                .ok_or_else(|| SolveError::Internal("cd missing in plus side".into()))?;
            let mut merged: Vec<VertexId> = Vec::new();
            for off in 1..host.len() {
                merged.push(host[(hi + off) % host.len()]);
            }
            if !split.virtual_edge {
                merged.push(other);
            }
            for off in 1..pr.len() {
                merged.push(pr[(pi + off) % pr.len()]);
            }
            merged
        } else if g.contains_vertex(v) {
            g.neighbors(v).to_vec()
        } else {
            plus.neighbors(v).to_vec()
        };
        rot.push((v, r));
    }
    // outer walk: host outer with the cd edge replaced by the plus-side arc
    let mut outer: Vec<VertexId> = Vec::new();
    let host_outer = g.outer_walk();
    let k = host_outer.len();
    let plus_outer = plus.outer_walk();
    let pk = plus_outer.len();
    let mut replaced = false;
    for i in 0..k {
        let a = host_outer[i];
        outer.push(a);
        let b2 = host_outer[(i + 1) % k];
        if !replaced && ((a, b2) == (c, d) || (a, b2) == (d, c)) {
            let pa = plus_outer.iter().position(|&v| v == a).unwrap();
            let next = plus_outer[(pa + 1) % pk];
            let step: i64 = if next == b2 { -1 } else { 1 };
            let mut j = pa as i64;
            loop {
                j = (j + step).rem_euclid(pk as i64);
                let v = plus_outer[j as usize];
                if v == b2 {
                    break;
                }
                outer.push(v);
            }
            replaced = true;
        }
    }
    PlaneGraph::build(rot, outer).map_err(SolveError::Graph)
}

/// Edges of a path given as a vertex list.
pub fn path_edges(p: &[VertexId]) -> Vec<(VertexId, VertexId)> {
    p.windows(2).map(|w| edge_key(w[0], w[1])).collect()
}

/// Lexicographically smallest edge of the cycle, skipping `avoid`.
pub fn smallest_cycle_edge(
    cycle: &[VertexId],
    avoid: &[(VertexId, VertexId)],
) -> Option<(VertexId, VertexId)> {
    let k = cycle.len();
    let avoid: Vec<(VertexId, VertexId)> = avoid.iter().map(|&(a, b)| edge_key(a, b)).collect();
    let mut best: Option<(VertexId, VertexId)> = None;
    for i in 0..k {
        let e = edge_key(cycle[i], cycle[(i + 1) % k]);
        if avoid.contains(&e) {
            continue;
        }
        if best.map(|b| e < b).unwrap_or(true) {
            best = Some(e);
        }
    }
    best
}

/// Lexicographically smallest cycle edge incident to `v`, skipping `avoid`.
pub fn smallest_cycle_edge_at(
    cycle: &[VertexId],
    v: VertexId,
    avoid: &[(VertexId, VertexId)],
) -> Option<(VertexId, VertexId)> {
    let k = cycle.len();
    let avoid: Vec<(VertexId, VertexId)> = avoid.iter().map(|&(a, b)| edge_key(a, b)).collect();
    let mut best: Option<(VertexId, VertexId)> = None;
    for i in 0..k {
        let e = edge_key(cycle[i], cycle[(i + 1) % k]);
        if (cycle[i] == v || cycle[(i + 1) % k] == v) && !avoid.contains(&e) {
            if best.map(|b| e < b).unwrap_or(true) {
                best = Some(e);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::outer_2separators;
    use crate::plane_graph::fixtures::*;

    #[test]
    fn separator_agreement_small() {
        for g in [tri(), c4(), k4(), w4(), ladder6(), cycle(8)] {
            assert_eq!(
                outer_2separators(&g).unwrap(),
                outer_2separators_brute(&g),
                "{g:?}"
            );
        }
    }

    #[test]
    fn lemma1_ladder() {
        // brute-force minimum: {1,5} isolates {6} with alpha=(6,1), |G_R|=3
        let g = ladder6();
        let dec = find_lemma1_decomposition(&g, 3, (6, 1), 4).unwrap();
        assert_eq!((dec.c, dec.d), (1, 5));
        assert_eq!(dec.size_r, 3);
        let mut rv: Vec<VertexId> = dec.g_r.vertices().collect();
        rv.sort_unstable();
        assert_eq!(rv, vec![1, 5, 6]);
        let mut lv: Vec<VertexId> = dec.g_l.vertices().collect();
        lv.sort_unstable();
        assert_eq!(lv, vec![1, 2, 3, 4, 5]);
        assert!(!dec.swapped);
        // minimality against brute force over all pairs and assignments
        for (c, d) in outer_2separators_brute(&g) {
            let size = g.max_id() as usize + 1;
            let mut removed = vec![false; size];
            removed[c as usize] = true;
            removed[d as usize] = true;
            for comp in components_without(&g, &removed) {
                let has_alpha = comp.contains(&6) || comp.contains(&1) || c == 6 || d == 6;
                let has_x = comp.contains(&3);
                if has_alpha && !has_x {
                    assert!(comp.len() + 2 >= dec.size_r);
                }
            }
        }
    }

    #[test]
    fn lemma1_k4_absent() {
        assert!(find_lemma1_decomposition(&k4(), 1, (1, 3), 4).is_none());
    }

    #[test]
    fn lemma1_c4() {
        // paper-literal reading: {1,3} decomposes C4 for x=1, y=3
        let g = c4();
        let dec = find_lemma1_decomposition(&g, 1, (2, 3), 3).unwrap();
        assert_eq!((dec.c, dec.d), (1, 3));
        assert_eq!(dec.size_r, 3);
    }

    #[test]
    fn lemma2_absent_on_3connected() {
        assert!(find_lemma2_bridge(&tri(), 1, (2, 3), 3).is_none());
        assert!(find_lemma2_bridge(&k4(), 1, (1, 3), 4).is_none());
    }

    #[test]
    fn lemma2_finds_isolated_bridge() {
        let g = cycle(6);
        let j = find_lemma2_bridge(&g, 1, (1, 2), 2).unwrap();
        assert!(!j.internals.contains(&1) && !j.internals.contains(&2));
        assert!(!j.internals.is_empty());
    }

    #[test]
    fn boundary_edge_case_c4() {
        let g = c4();
        let bd = compute_boundary(&g, 1, 3, (1, 2)).unwrap();
        assert_eq!(bd.points, vec![1, 2, 3]);
        assert_eq!(bd.parts.len(), 3);
        let mut sizes: Vec<usize> = bd.parts.iter().map(|p| p.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 3]);
        assert!(bd.w_points.is_empty() && bd.z_points.is_empty());
    }

    #[test]
    fn boundary_w4_interior_hub_no_protection() {
        // the wheel is 3-connected: no admissible-arc separator exists, so
        // the interior hub contributes no w points (the stated convention)
        let g = w4();
        let bd = compute_boundary(&g, 1, 5, (2, 3)).unwrap();
        assert!(bd.w_points.is_empty());
        assert_eq!(bd.points, vec![1, 2, 3]);
    }

    #[test]
    fn boundary_protection_found() {
        // hexagon, vertex 7 inside adjacent to 3,4,5; v_next = 7 interior
        let c6 = cycle(6);
        let inner = 1 - c6.faces().outer;
        let walk = c6.face_walk(inner).to_vec();
        let mut ps: Vec<usize> = [3u32, 4, 5]
            .iter()
            .map(|v| walk.iter().position(|w| w == v).unwrap())
            .collect();
        ps.sort_unstable();
        let (g, z) = c6.insert_vertex_in_face(inner, &ps, None).unwrap();
        assert_eq!(z, 7);
        let bd = compute_boundary(&g, 1, 7, (1, 2)).unwrap();
        assert_eq!(bd.w_points, vec![3, 4, 5]);
        assert!(bd.points.contains(&3) && bd.points.contains(&5));
    }

    #[test]
    fn maximal_separators_ladder_block() {
        let g = ladder6();
        // junctions 1 and 2, alpha=(5,6): the part [2,3,4,5] hosts {2,5},
        // which encloses {2,4} and {3,5}
        let bd = compute_boundary(&g, 1, 2, (5, 6)).unwrap();
        let seps = maximal_2separators(&g, &bd).unwrap();
        assert_eq!(seps, vec![(2, 5)]);
    }

    #[test]
    fn interlacing_c4_junction_edge() {
        // the paper's example: C4 with adjacent junctions and alpha the
        // junction edge has two interlacing maximal separators
        let g = c4();
        let bd = compute_boundary(&g, 1, 2, (1, 2)).unwrap();
        let seps = maximal_2separators(&g, &bd).unwrap();
        assert_eq!(seps.len(), 2);
        let mut flat: Vec<VertexId> = seps.iter().flat_map(|&(a, b)| [a, b]).collect();
        flat.sort_unstable();
        assert_eq!(flat, vec![1, 2, 3, 4]);
    }

    #[test]
    fn maximal_separators_k4_empty() {
        let g = k4();
        let bd = compute_boundary(&g, 1, 2, (2, 3)).unwrap();
        assert!(maximal_2separators(&g, &bd).unwrap().is_empty());
    }

    #[test]
    fn split_off_ladder() {
        let g = ladder6();
        let (rest, plus, virt) = split_off(&g, 2, 5).unwrap();
        assert!(!virt);
        let mut rv: Vec<VertexId> = rest.vertices().collect();
        rv.sort_unstable();
        assert_eq!(rv, vec![1, 2, 5, 6]);
        let mut pv: Vec<VertexId> = plus.vertices().collect();
        pv.sort_unstable();
        assert_eq!(pv, vec![2, 3, 4, 5]);
    }

    #[test]
    fn split_off_c6_virtual() {
        let g = cycle(6);
        let (rest, _plus, virt) = split_off(&g, 1, 4).unwrap();
        assert!(virt);
        assert!(rest.has_edge(1, 4));
        assert_eq!(rest.vertex_count(), 4);
    }

    #[test]
    fn eta_ladder_and_replay() {
        let g = ladder6();
        // junctions 1 and 2, alpha=(4,5): the part [2,3,4] hosts {2,4},
        // the part [5,6,1] hosts {5,1}
        let bd = compute_boundary(&g, 1, 2, (4, 5)).unwrap();
        let red = eta_reduce(&g, &bd).unwrap();
        assert_eq!(red.splits.len(), 2);
        let mut ev: Vec<VertexId> = red.eta.vertices().collect();
        ev.sort_unstable();
        assert_eq!(ev, vec![1, 2, 4, 5]);
        assert!(crate::connectivity::is_2connected(&red.eta));
        let back = replay_eta(&red).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn eta_k4_identity() {
        let g = k4();
        let bd = compute_boundary(&g, 1, 2, (2, 3)).unwrap();
        let red = eta_reduce(&g, &bd).unwrap();
        assert!(red.splits.is_empty());
        assert_eq!(red.eta, g);
    }

    #[test]
    fn eta_c6_replay() {
        let g = cycle(6);
        let bd = compute_boundary(&g, 1, 4, (1, 2)).unwrap();
        let red = eta_reduce(&g, &bd).unwrap();
        assert_eq!(red.splits.len(), 2);
        assert!(red.splits.iter().all(|s| s.virtual_edge));
        assert_eq!(replay_eta(&red).unwrap(), g);
        let mut ev: Vec<VertexId> = red.eta.vertices().collect();
        ev.sort_unstable();
        assert_eq!(ev, vec![1, 2, 4]);
    }
}

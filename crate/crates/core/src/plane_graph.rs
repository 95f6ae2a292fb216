//! Plane graphs as rotation systems with a designated outer face.
//!
//! A `PlaneGraph` stores, for every vertex, the clockwise cyclic order of its
//! neighbors, plus one distinguished face (the outer face) given as a closed
//! walk. Faces are traced with the successor rule: the directed edge (u, v) is
//! followed by (v, w) where w succeeds u in the rotation at v. Under that rule
//! the outer face walk lists its vertices in clockwise order and every inner
//! face is traversed counterclockwise.
//!
//! Values are immutable; every edit returns a new graph. Subgraph operations
//! track which face of the result absorbed each face of the original, so the
//! surgery in the solver never has to guess where removed material lived.

use crate::error::GraphError;
use std::cell::OnceCell;
use std::collections::HashMap;

pub type VertexId = u32;

/// Undirected edge key with normalized endpoint order.
#[inline]
pub fn edge_key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// All faces of an embedding. `walks[i]` lists the vertices of face `i` in
/// trace order; `outer` is the index of the designated outer face.
#[derive(Debug, Clone)]
pub struct Faces {
    pub walks: Vec<Vec<VertexId>>,
    pub outer: usize,
    /// face id of the directed edge (v, rot[v][i]), parallel to the rotations
    face_at: Vec<Vec<u32>>,
}

impl Faces {
    /// Face on the left of the directed edge (u, v).
    pub fn face_of(&self, g: &PlaneGraph, u: VertexId, v: VertexId) -> Option<usize> {
        let i = g.idx_of(u, v)?;
        Some(self.face_at[u as usize][i] as usize)
    }

    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }
}

/// An immutable plane graph.
#[derive(Clone)]
pub struct PlaneGraph {
    rot: Vec<Vec<VertexId>>,
    present: Vec<bool>,
    /// sorted (neighbor, index-in-rot) pairs per vertex, for O(log deg) lookups
    rot_sorted: Vec<Vec<(VertexId, u32)>>,
    n: usize,
    m: usize,
    outer: Vec<VertexId>,
    faces: OnceCell<Faces>,
}

impl std::fmt::Debug for PlaneGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PlaneGraph(n={}, m={}, outer={:?})", self.n, self.m, self.outer)
    }
}

impl PartialEq for PlaneGraph {
    fn eq(&self, other: &Self) -> bool {
        if self.n != other.n || self.m != other.m {
            return false;
        }
        if normalize_cycle(&self.outer) != normalize_cycle(&other.outer) {
            return false;
        }
        for v in self.vertices() {
            if !other.contains_vertex(v) {
                return false;
            }
            let a = &self.rot[v as usize];
            let b = &other.rot[v as usize];
            if a.len() != b.len() {
                return false;
            }
            if !a.is_empty() {
                let start = b.iter().position(|&x| x == a[0]);
                match start {
                    None => return false,
                    Some(s) => {
                        for (i, &av) in a.iter().enumerate() {
                            if av != b[(s + i) % b.len()] {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }
}
impl Eq for PlaneGraph {}

/// Rotate a cyclic vertex sequence to a canonical starting point.
pub fn normalize_cycle(walk: &[VertexId]) -> Vec<VertexId> {
    if walk.is_empty() {
        return Vec::new();
    }
    let k = walk.len();
    let mut best = 0usize;
    for i in 1..k {
        for j in 0..k {
            let a = walk[(i + j) % k];
            let b = walk[(best + j) % k];
            if a != b {
                if a < b {
                    best = i;
                }
                break;
            }
        }
    }
    (0..k).map(|j| walk[(best + j) % k]).collect()
}

/// Face bookkeeping for a subgraph operation: which face of the result
/// absorbed each face of the original.
pub struct SubInfo {
    class_of_old: Vec<u32>,
    new_face_of_class: HashMap<u32, u32>,
}

impl SubInfo {
    pub fn new_face_of(&self, old_face: usize) -> Option<usize> {
        let c = self.class_of_old[old_face];
        self.new_face_of_class.get(&c).map(|&f| f as usize)
    }
}

impl PlaneGraph {
    /// Build and validate a plane graph from (vertex, clockwise neighbor list)
    /// pairs and the clockwise outer cycle.
    pub fn build(
        rotations: Vec<(VertexId, Vec<VertexId>)>,
        outer: Vec<VertexId>,
    ) -> Result<PlaneGraph, GraphError> {
        let max_id = rotations
            .iter()
            .map(|(v, _)| *v)
            .chain(rotations.iter().flat_map(|(_, ns)| ns.iter().copied()))
            .max()
            .ok_or_else(|| GraphError::Invalid("empty graph".into()))?;
        let size = max_id as usize + 1;
        let mut rot: Vec<Vec<VertexId>> = vec![Vec::new(); size];
        let mut present = vec![false; size];
        for (v, ns) in rotations {
            if present[v as usize] {
                return Err(GraphError::InconsistentRotation(format!(
                    "vertex {v} listed twice"
                )));
            }
            present[v as usize] = true;
            rot[v as usize] = ns;
        }
        Self::from_parts(rot, present, outer)
    }

    fn from_parts(
        rot: Vec<Vec<VertexId>>,
        present: Vec<bool>,
        outer: Vec<VertexId>,
    ) -> Result<PlaneGraph, GraphError> {
        let size = rot.len();
        let mut m2 = 0usize;
        for v in 0..size {
            if !present[v] {
                if !rot[v].is_empty() {
                    return Err(GraphError::InconsistentRotation(format!(
                        "absent vertex {v} has neighbors"
                    )));
                }
                continue;
            }
            let mut seen = rot[v].clone();
            seen.sort_unstable();
            for w in seen.windows(2) {
                if w[0] == w[1] {
                    return Err(GraphError::NonSimple(format!(
                        "duplicate neighbor {} at vertex {}",
                        w[0], v
                    )));
                }
            }
            for &u in &rot[v] {
                if u as usize == v {
                    return Err(GraphError::NonSimple(format!("loop at vertex {v}")));
                }
                if u as usize >= size || !present[u as usize] {
                    return Err(GraphError::InconsistentRotation(format!(
                        "vertex {v} lists unknown neighbor {u}"
                    )));
                }
                if !rot[u as usize].contains(&(v as VertexId)) {
                    return Err(GraphError::InconsistentRotation(format!(
                        "vertex {v} lists {u} but not vice versa"
                    )));
                }
            }
            m2 += rot[v].len();
        }
        let n = present.iter().filter(|&&p| p).count();
        let m = m2 / 2;
        let rot_sorted = build_sorted(&rot, &present);
        let g = PlaneGraph {
            rot,
            present,
            rot_sorted,
            n,
            m,
            outer: normalize_cycle(&outer),
            faces: OnceCell::new(),
        };
        if !g.is_connected() {
            return Err(GraphError::Invalid("graph must be connected".into()));
        }
        let (walks, face_at) = g.trace_all_faces()?;
        let f = walks.len();
        if g.n < 1 || f != g.m + 2 - g.n {
            return Err(GraphError::EulerViolation(format!(
                "n={} m={} traced {} faces, expected {}",
                g.n,
                g.m,
                f,
                g.m + 2 - g.n
            )));
        }
        let want = normalize_cycle(&g.outer);
        let idx = walks
            .iter()
            .position(|w| normalize_cycle(w) == want)
            .ok_or(GraphError::OuterFaceNotAFace)?;
        let _ = g.faces.set(Faces {
            walks,
            outer: idx,
            face_at,
        });
        Ok(g)
    }

    /// Construct from surgery output. Debug builds re-validate everything; in
    /// release the rotations are trusted and only the outer face is resolved.
    fn from_parts_trusted(
        rot: Vec<Vec<VertexId>>,
        present: Vec<bool>,
        outer: Vec<VertexId>,
    ) -> Result<PlaneGraph, GraphError> {
        #[cfg(debug_assertions)]
        {
            Self::from_parts(rot, present, outer)
        }
        #[cfg(not(debug_assertions))]
        {
            let m2: usize = rot.iter().map(|r| r.len()).sum();
            let n = present.iter().filter(|&&p| p).count();
            let rot_sorted = build_sorted(&rot, &present);
            let g = PlaneGraph {
                rot,
                present,
                rot_sorted,
                n,
                m: m2 / 2,
                outer: normalize_cycle(&outer),
                faces: OnceCell::new(),
            };
            let (walks, face_at) = g.trace_all_faces()?;
            let want = normalize_cycle(&g.outer);
            let idx = walks
                .iter()
                .position(|w| normalize_cycle(w) == want)
                .ok_or(GraphError::OuterFaceNotAFace)?;
            let _ = g.faces.set(Faces {
                walks,
                outer: idx,
                face_at,
            });
            Ok(g)
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        (v as usize) < self.present.len() && self.present[v as usize]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(v, _)| v as VertexId)
    }

    pub fn max_id(&self) -> VertexId {
        (self.present.len() - 1) as VertexId
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.rot[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rot[v as usize].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.contains_vertex(u) && self.idx_of(u, v).is_some()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |v| {
            self.rot[v as usize]
                .iter()
                .filter(move |&&u| v < u)
                .map(move |&u| (v, u))
        })
    }

    /// Clockwise outer walk (a cycle iff the graph is 2-connected).
    pub fn outer_walk(&self) -> &[VertexId] {
        &self.outer
    }

    pub fn is_on_outer(&self, v: VertexId) -> bool {
        self.outer.contains(&v)
    }

    pub fn is_outer_edge(&self, u: VertexId, v: VertexId) -> bool {
        let k = self.outer.len();
        (0..k).any(|i| {
            let (a, b) = (self.outer[i], self.outer[(i + 1) % k]);
            (a, b) == (u, v) || (a, b) == (v, u)
        })
    }

    fn idx_of(&self, v: VertexId, u: VertexId) -> Option<usize> {
        let s = &self.rot_sorted[v as usize];
        s.binary_search_by_key(&u, |&(w, _)| w)
            .ok()
            .map(|i| s[i].1 as usize)
    }

    /// Rotation successor: the neighbor following u clockwise around v.
    pub fn succ(&self, v: VertexId, u: VertexId) -> Option<VertexId> {
        let i = self.idx_of(v, u)?;
        let r = &self.rot[v as usize];
        Some(r[(i + 1) % r.len()])
    }

    pub fn pred(&self, v: VertexId, u: VertexId) -> Option<VertexId> {
        let i = self.idx_of(v, u)?;
        let r = &self.rot[v as usize];
        Some(r[(i + r.len() - 1) % r.len()])
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices().next() else {
            return true;
        };
        let mut seen = vec![false; self.present.len()];
        let mut stack = vec![start];
        seen[start as usize] = true;
        let mut cnt = 0usize;
        while let Some(v) = stack.pop() {
            cnt += 1;
            for &u in &self.rot[v as usize] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        cnt == self.n
    }

    fn trace_all_faces(&self) -> Result<(Vec<Vec<VertexId>>, Vec<Vec<u32>>), GraphError> {
        let size = self.rot.len();
        let mut face_at: Vec<Vec<u32>> =
            self.rot.iter().map(|r| vec![u32::MAX; r.len()]).collect();
        let mut walks: Vec<Vec<VertexId>> = Vec::new();
        for v in 0..size as u32 {
            for i in 0..self.rot[v as usize].len() {
                if face_at[v as usize][i] != u32::MAX {
                    continue;
                }
                let fid = walks.len() as u32;
                let mut walk = Vec::new();
                let (mut a, mut b) = (v, self.rot[v as usize][i]);
                loop {
                    let bi = self
                        .idx_of(a, b)
                        .ok_or_else(|| GraphError::InconsistentRotation("broken rotation".into()))?;
                    if face_at[a as usize][bi] != u32::MAX {
                        break;
                    }
                    face_at[a as usize][bi] = fid;
                    walk.push(a);
                    let c = self.succ(b, a).unwrap();
                    a = b;
                    b = c;
                }
                walks.push(walk);
            }
        }
        Ok((walks, face_at))
    }

    /// All faces, cached on first use.
    pub fn faces(&self) -> &Faces {
        self.faces.get_or_init(|| {
            let (walks, face_at) = self.trace_all_faces().expect("validated graph traces");
            let want = normalize_cycle(&self.outer);
            let outer = walks
                .iter()
                .position(|w| normalize_cycle(w) == want)
                .expect("outer face exists");
            Faces {
                walks,
                outer,
                face_at,
            }
        })
    }

    pub fn face_walk(&self, f: usize) -> &[VertexId] {
        &self.faces().walks[f]
    }

    /// Outer cycle of a 2-connected graph (`NotTwoConnected` otherwise).
    pub fn outer_cycle(&self) -> Result<Vec<VertexId>, GraphError> {
        if !crate::connectivity::is_2connected(self) {
            return Err(GraphError::NotTwoConnected);
        }
        Ok(self.outer.clone())
    }

    /// Mirror the embedding: reverse every rotation and the outer walk.
    pub fn mirror(&self) -> PlaneGraph {
        let mut rot = self.rot.clone();
        for r in rot.iter_mut() {
            r.reverse();
        }
        let mut outer = self.outer.clone();
        outer.reverse();
        PlaneGraph::from_parts_trusted(rot, self.present.clone(), outer)
            .expect("mirror preserves validity")
    }

    /// Same rotation system with face `f` designated as the outer face.
    pub fn reroot_outer_face(&self, f: usize) -> Result<PlaneGraph, GraphError> {
        let faces = self.faces();
        if f >= faces.walks.len() {
            return Err(GraphError::NotAFace(f));
        }
        let outer = faces.walks[f].clone();
        PlaneGraph::from_parts_trusted(self.rot.clone(), self.present.clone(), outer)
    }

    /// Replace edge (u, v) by a path through a fresh vertex.
    pub fn subdivide_edge(
        &self,
        u: VertexId,
        v: VertexId,
    ) -> Result<(PlaneGraph, VertexId), GraphError> {
        if !self.has_edge(u, v) {
            return Err(GraphError::NoSuchEdge(u, v));
        }
        let z = self.max_id() + 1;
        let mut rot = self.rot.clone();
        rot.push(vec![u, v]);
        let mut present = self.present.clone();
        present.push(true);
        let iu = self.idx_of(u, v).unwrap();
        rot[u as usize][iu] = z;
        let iv = self.idx_of(v, u).unwrap();
        rot[v as usize][iv] = z;
        let mut outer = Vec::with_capacity(self.outer.len() + 1);
        let k = self.outer.len();
        let mut inserted = false;
        for i in 0..k {
            outer.push(self.outer[i]);
            if !inserted {
                let a = self.outer[i];
                let b = self.outer[(i + 1) % k];
                if (a == u && b == v) || (a == v && b == u) {
                    outer.push(z);
                    inserted = true;
                }
            }
        }
        let g = PlaneGraph::from_parts_trusted(rot, present, outer)?;
        Ok((g, z))
    }

    /// Insert edge (walk[pc], walk[pd]) inside face `f`, with endpoints given
    /// as positions on the face walk (unambiguous when the walk repeats
    /// vertices). When `f` is the outer face the side containing the directed
    /// `witness` edge becomes the new outer face; without a witness the side
    /// holding the walk start is kept.
    pub fn add_edge_at_walk_positions(
        &self,
        f: usize,
        pc: usize,
        pd: usize,
        witness: Option<(VertexId, VertexId)>,
    ) -> Result<PlaneGraph, GraphError> {
        let faces = self.faces();
        if f >= faces.walks.len() {
            return Err(GraphError::NotAFace(f));
        }
        let walk = faces.walks[f].clone();
        let k = walk.len();
        if pc >= k || pd >= k || pc == pd {
            return Err(GraphError::Invalid("bad walk positions".into()));
        }
        let (c, d) = (walk[pc], walk[pd]);
        if c == d {
            return Err(GraphError::NonSimple("loop".into()));
        }
        if self.has_edge(c, d) {
            return Err(GraphError::NonSimple(format!("edge ({c}, {d}) exists")));
        }
        let prev_c = walk[(pc + k - 1) % k];
        let prev_d = walk[(pd + k - 1) % k];
        let mut rot = self.rot.clone();
        let ic = self.idx_of(c, prev_c).ok_or(GraphError::NotCofacial(c, d, f))?;
        rot[c as usize].insert(ic + 1, d);
        let id = self.idx_of(d, prev_d).ok_or(GraphError::NotCofacial(c, d, f))?;
        rot[d as usize].insert(id + 1, c);

        let outer = if f == faces.outer {
            let collect = |from: usize, to: usize| -> Vec<VertexId> {
                let mut s = Vec::new();
                let mut i = from;
                loop {
                    s.push(walk[i]);
                    if i == to {
                        break;
                    }
                    i = (i + 1) % k;
                }
                s
            };
            let side1 = collect(pc, pd);
            let side2 = collect(pd, pc);
            let pick = |want: (VertexId, VertexId)| -> Option<Vec<VertexId>> {
                for s in [&side1, &side2] {
                    for j in 0..s.len() {
                        let a = s[j];
                        let b = if j + 1 < s.len() { s[j + 1] } else { s[0] };
                        if (a, b) == want {
                            return Some(s.clone());
                        }
                    }
                }
                None
            };
            match witness {
                Some(w) => pick(w).ok_or_else(|| {
                    GraphError::Invalid(format!("witness edge {w:?} not on either side"))
                })?,
                None => {
                    let w0 = (walk[0], walk[1 % k]);
                    pick(w0).unwrap_or(side1)
                }
            }
        } else {
            self.outer.clone()
        };
        PlaneGraph::from_parts_trusted(rot, self.present.clone(), outer)
    }

    /// Insert edge (c, d) inside face `f` where each endpoint occurs exactly
    /// once on the walk.
    pub fn add_edge_in_face(
        &self,
        c: VertexId,
        d: VertexId,
        f: usize,
        witness: Option<(VertexId, VertexId)>,
    ) -> Result<PlaneGraph, GraphError> {
        let faces = self.faces();
        if f >= faces.walks.len() {
            return Err(GraphError::NotAFace(f));
        }
        let walk = &faces.walks[f];
        let occ = |x: VertexId| -> Vec<usize> {
            walk.iter()
                .enumerate()
                .filter(|(_, &v)| v == x)
                .map(|(i, _)| i)
                .collect()
        };
        let (oc, od) = (occ(c), occ(d));
        if oc.len() != 1 || od.len() != 1 {
            return Err(GraphError::NotCofacial(c, d, f));
        }
        self.add_edge_at_walk_positions(f, oc[0], od[0], witness)
    }

    /// Spec operation: insert a cofacial edge, returning the graph unchanged
    /// when the edge already exists.
    pub fn add_cofacial_edge(
        &self,
        c: VertexId,
        d: VertexId,
        f: usize,
    ) -> Result<PlaneGraph, GraphError> {
        if self.has_edge(c, d) {
            return Ok(self.clone());
        }
        self.add_edge_in_face(c, d, f, None)
    }

    /// Insert a fresh vertex inside face `f`, adjacent to the walk vertices at
    /// the given (strictly increasing) walk positions. For the outer face a
    /// witness directed edge of the old walk selects the new outer side.
    pub fn insert_vertex_in_face(
        &self,
        f: usize,
        positions: &[usize],
        witness: Option<(VertexId, VertexId)>,
    ) -> Result<(PlaneGraph, VertexId), GraphError> {
        let faces = self.faces();
        if f >= faces.walks.len() {
            return Err(GraphError::NotAFace(f));
        }
        let is_outer = f == faces.outer;
        let walk = faces.walks[f].clone();
        let k = walk.len();
        if positions.is_empty() || positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GraphError::Invalid("positions must be increasing".into()));
        }
        if *positions.last().unwrap() >= k {
            return Err(GraphError::Invalid("position out of range".into()));
        }
        {
            let mut cs: Vec<VertexId> = positions.iter().map(|&i| walk[i]).collect();
            cs.sort_unstable();
            if cs.windows(2).any(|w| w[0] == w[1]) {
                return Err(GraphError::NonSimple("repeated corner".into()));
            }
        }
        let z = self.max_id() + 1;
        let mut rot = self.rot.clone();
        for &i in positions {
            let c = walk[i];
            let prev = walk[(i + k - 1) % k];
            let ic = self.idx_of(c, prev).ok_or(GraphError::NotCofacial(c, z, f))?;
            rot[c as usize].insert(ic + 1, z);
        }
        let mut rz: Vec<VertexId> = positions.iter().map(|&i| walk[i]).collect();
        rz.reverse();
        rot.push(rz);
        let mut present = self.present.clone();
        present.push(true);

        let outer = if is_outer {
            // the old region splits into |positions| faces; the witness edge
            // stays on the walk arc of exactly one side
            let w = witness.ok_or_else(|| {
                GraphError::Invalid("outer insertion needs a witness edge".into())
            })?;
            let np = positions.len();
            let mut chosen: Option<Vec<VertexId>> = None;
            for a in 0..np {
                let b = (a + 1) % np;
                // side walk: z, walk[positions[a]] .. walk[positions[b]]
                let mut s = vec![z];
                let mut i = positions[a];
                loop {
                    s.push(walk[i]);
                    if i == positions[b] {
                        break;
                    }
                    i = (i + 1) % k;
                }
                let on_side = (0..s.len()).any(|j| {
                    let x = s[j];
                    let y = s[(j + 1) % s.len()];
                    (x, y) == w
                });
                if on_side {
                    chosen = Some(s);
                    break;
                }
                if np == 1 {
                    // degree-1 insertion: face does not split
                    let mut s2 = vec![z];
                    let mut i2 = positions[0];
                    for _ in 0..k {
                        s2.push(walk[i2]);
                        i2 = (i2 + 1) % k;
                    }
                    s2.push(walk[positions[0]]);
                    chosen = Some(s2);
                    break;
                }
            }
            chosen.ok_or_else(|| GraphError::Invalid("witness not found on any side".into()))?
        } else {
            self.outer.clone()
        };
        let g = PlaneGraph::from_parts_trusted(rot, present, outer)?;
        Ok((g, z))
    }

    /// Contract edge (a, b), merging a into b. Fails if a and b share a
    /// neighbor (the result would not be simple).
    pub fn contract_edge_into(&self, a: VertexId, b: VertexId) -> Result<PlaneGraph, GraphError> {
        if !self.has_edge(a, b) {
            return Err(GraphError::NoSuchEdge(a, b));
        }
        for &x in &self.rot[a as usize] {
            if x != b && self.has_edge(b, x) {
                return Err(GraphError::NonSimple(format!(
                    "contraction of ({a},{b}) duplicates edge to {x}"
                )));
            }
        }
        let mut rot = self.rot.clone();
        let ra = &self.rot[a as usize];
        let ia = self.idx_of(a, b).unwrap();
        let mut fan: Vec<VertexId> = Vec::with_capacity(ra.len() - 1);
        for off in 1..ra.len() {
            fan.push(ra[(ia + off) % ra.len()]);
        }
        let ib = self.idx_of(b, a).unwrap();
        let mut rb = rot[b as usize].clone();
        rb.remove(ib);
        for (off, &x) in fan.iter().enumerate() {
            rb.insert(ib + off, x);
        }
        rot[b as usize] = rb;
        for &x in fan.iter() {
            let ix = self.idx_of(x, a).unwrap();
            rot[x as usize][ix] = b;
        }
        rot[a as usize] = Vec::new();
        let mut present = self.present.clone();
        present[a as usize] = false;
        let outer: Vec<VertexId> = {
            let mut w: Vec<VertexId> = self
                .outer
                .iter()
                .map(|&v| if v == a { b } else { v })
                .collect();
            w.dedup();
            while w.len() > 1 && w.first() == w.last() {
                w.pop();
            }
            w
        };
        PlaneGraph::from_parts_trusted(rot, present, outer)
    }

    /// Restriction to the vertices and edges accepted by the predicates.
    /// The result must be connected with at least one edge.
    pub fn restrict(
        &self,
        keep_v: impl Fn(VertexId) -> bool,
        keep_e: impl Fn(VertexId, VertexId) -> bool,
    ) -> Result<(PlaneGraph, SubInfo), GraphError> {
        let faces = self.faces();
        let keep_edge = |u: VertexId, v: VertexId| keep_v(u) && keep_v(v) && keep_e(u, v);
        let mut rot: Vec<Vec<VertexId>> = vec![Vec::new(); self.rot.len()];
        let mut present = vec![false; self.present.len()];
        for v in self.vertices() {
            if !keep_v(v) {
                continue;
            }
            let r: Vec<VertexId> = self.rot[v as usize]
                .iter()
                .copied()
                .filter(|&u| keep_edge(v, u))
                .collect();
            if r.is_empty() {
                continue;
            }
            present[v as usize] = true;
            rot[v as usize] = r;
        }
        // union-find over old faces: each removed edge merges its two sides
        let nf = faces.walks.len();
        let mut uf: Vec<u32> = (0..nf as u32).collect();
        fn find(uf: &mut [u32], x: u32) -> u32 {
            let mut r = x;
            while uf[r as usize] != r {
                r = uf[r as usize];
            }
            let mut c = x;
            while uf[c as usize] != r {
                let nx = uf[c as usize];
                uf[c as usize] = r;
                c = nx;
            }
            r
        }
        for (u, v) in self.edges() {
            if !keep_edge(u, v) {
                let f1 = faces.face_of(self, u, v).unwrap() as u32;
                let f2 = faces.face_of(self, v, u).unwrap() as u32;
                let (r1, r2) = (find(&mut uf, f1), find(&mut uf, f2));
                if r1 != r2 {
                    uf[r1 as usize] = r2;
                }
            }
        }
        let class_of_old: Vec<u32> = (0..nf as u32).map(|f| find(&mut uf, f)).collect();

        let rs = build_sorted(&rot, &present);
        let m2: usize = rot.iter().map(|r| r.len()).sum();
        let n = present.iter().filter(|&&p| p).count();
        if m2 == 0 {
            return Err(GraphError::Invalid("restriction has no edges".into()));
        }
        let tmp = PlaneGraph {
            rot,
            present,
            rot_sorted: rs,
            n,
            m: m2 / 2,
            outer: Vec::new(),
            faces: OnceCell::new(),
        };
        if !tmp.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let (walks, face_at) = tmp.trace_all_faces()?;
        let mut new_face_of_class: HashMap<u32, u32> = HashMap::new();
        for v in tmp.vertices() {
            for (i, &u) in tmp.rot[v as usize].iter().enumerate() {
                let old_f = faces.face_of(self, v, u).unwrap() as u32;
                let c = class_of_old[old_f as usize];
                let nf = face_at[v as usize][i];
                let e = new_face_of_class.entry(c).or_insert(nf);
                debug_assert_eq!(*e, nf, "face class maps to a single new face");
            }
        }
        let outer_class = class_of_old[faces.outer];
        let new_outer = *new_face_of_class
            .get(&outer_class)
            .ok_or_else(|| GraphError::Invalid("outer region lost all edges".into()))?;
        let outer_walk = walks[new_outer as usize].clone();
        let g = PlaneGraph::from_parts_trusted(tmp.rot, tmp.present, outer_walk)?;
        Ok((
            g,
            SubInfo {
                class_of_old,
                new_face_of_class,
            },
        ))
    }

    pub fn without_vertices(&self, drop: &[VertexId]) -> Result<(PlaneGraph, SubInfo), GraphError> {
        let mut gone = vec![false; self.present.len()];
        for &v in drop {
            gone[v as usize] = true;
        }
        self.restrict(|v| !gone[v as usize], |_, _| true)
    }

    pub fn without_edge(
        &self,
        u: VertexId,
        v: VertexId,
    ) -> Result<(PlaneGraph, SubInfo), GraphError> {
        if !self.has_edge(u, v) {
            return Err(GraphError::NoSuchEdge(u, v));
        }
        let k = edge_key(u, v);
        self.restrict(|_| true, |a, b| edge_key(a, b) != k)
    }

    /// Side graph for a 2-separator {c, d}: keep `side` vertices (which must
    /// include c and d), drop everything else, and ensure the edge cd exists,
    /// inserting it in the gap left by the removed material when absent.
    /// Returns (graph, true) when cd was added.
    pub fn separator_side(
        &self,
        side: &[bool],
        c: VertexId,
        d: VertexId,
        outer_witness: Option<(VertexId, VertexId)>,
    ) -> Result<(PlaneGraph, bool), GraphError> {
        debug_assert!(side[c as usize] && side[d as usize]);
        let mut rot: Vec<Vec<VertexId>> = vec![Vec::new(); self.rot.len()];
        let mut present = vec![false; self.present.len()];
        let had_cd = self.has_edge(c, d);
        for v in self.vertices() {
            if !side[v as usize] {
                continue;
            }
            let mut r: Vec<VertexId> = Vec::with_capacity(self.rot[v as usize].len());
            let mut dropped_at: Option<usize> = None;
            for &u in &self.rot[v as usize] {
                if side[u as usize] {
                    r.push(u);
                } else if dropped_at.is_none() {
                    dropped_at = Some(r.len());
                }
            }
            if !had_cd {
                // the virtual edge goes where the removed fan began
                if v == c {
                    r.insert(dropped_at.unwrap_or(r.len()), d);
                } else if v == d {
                    r.insert(dropped_at.unwrap_or(r.len()), c);
                }
            }
            if r.is_empty() {
                continue;
            }
            present[v as usize] = true;
            rot[v as usize] = r;
        }
        let rs = build_sorted(&rot, &present);
        let m2: usize = rot.iter().map(|r| r.len()).sum();
        let n = present.iter().filter(|&&p| p).count();
        let tmp = PlaneGraph {
            rot,
            present,
            rot_sorted: rs,
            n,
            m: m2 / 2,
            outer: Vec::new(),
            faces: OnceCell::new(),
        };
        if !tmp.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let (walks, face_at) = tmp.trace_all_faces()?;
        // outer face: prefer the face holding the witness directed edge, else
        // the face holding a surviving old outer edge, else the cd face
        let locate = |want: (VertexId, VertexId)| -> Option<usize> {
            let (u, v) = want;
            if !tmp.contains_vertex(u) {
                return None;
            }
            let i = tmp.idx_of(u, v)?;
            Some(face_at[u as usize][i] as usize)
        };
        let mut chosen: Option<usize> = None;
        if let Some(w) = outer_witness {
            chosen = locate(w);
        }
        if chosen.is_none() {
            let k = self.outer.len();
            for i in 0..k {
                let (a, b) = (self.outer[i], self.outer[(i + 1) % k]);
                if let Some(f) = locate((a, b)) {
                    chosen = Some(f);
                    break;
                }
            }
        }
        if chosen.is_none() {
            chosen = locate((c, d));
        }
        let outer_id =
            chosen.ok_or_else(|| GraphError::Invalid("no outer witness survives".into()))?;
        let outer_walk = walks[outer_id].clone();
        let g = PlaneGraph::from_parts_trusted(tmp.rot, tmp.present, outer_walk)?;
        Ok((g, !had_cd))
    }

    /// Label-invariant canonical encoding of (rotation system, outer face),
    /// minimized over outer-walk starting edges and both chiralities. Used to
    /// deduplicate catalog graphs; intended for small graphs.
    pub fn canonical_code(&self) -> Vec<u32> {
        let mut best: Option<Vec<u32>> = None;
        for mirror in [false, true] {
            let g = if mirror { self.mirror() } else { self.clone() };
            let k = g.outer.len();
            for s in 0..k {
                let a = g.outer[s];
                let b = g.outer[(s + 1) % k];
                let code = g.bfs_code(a, b, s);
                if best.as_ref().map(|c| code < *c).unwrap_or(true) {
                    best = Some(code);
                }
            }
        }
        best.unwrap()
    }

    fn bfs_code(&self, root: VertexId, first: VertexId, outer_start: usize) -> Vec<u32> {
        let mut label: HashMap<VertexId, u32> = HashMap::new();
        let mut order: Vec<(VertexId, VertexId)> = Vec::new();
        label.insert(root, 0);
        label.insert(first, 1);
        order.push((root, first));
        order.push((first, root));
        let mut qi = 0usize;
        while qi < order.len() {
            let (v, anchor) = order[qi];
            qi += 1;
            let r = &self.rot[v as usize];
            let ai = r.iter().position(|&x| x == anchor).unwrap();
            for off in 0..r.len() {
                let u = r[(ai + off) % r.len()];
                if !label.contains_key(&u) {
                    let l = label.len() as u32;
                    label.insert(u, l);
                    order.push((u, v));
                }
            }
        }
        let mut code: Vec<u32> = Vec::with_capacity(2 * self.m + self.n + 4);
        code.push(self.n as u32);
        code.push(self.m as u32);
        for &(v, anchor) in &order {
            let r = &self.rot[v as usize];
            let ai = r.iter().position(|&x| x == anchor).unwrap();
            code.push(u32::MAX);
            for off in 0..r.len() {
                code.push(label[&r[(ai + off) % r.len()]]);
            }
        }
        code.push(u32::MAX - 1);
        let k = self.outer.len();
        for j in 0..k {
            code.push(label[&self.outer[(outer_start + j) % k]]);
        }
        code
    }
}

fn build_sorted(rot: &[Vec<VertexId>], present: &[bool]) -> Vec<Vec<(VertexId, u32)>> {
    rot.iter()
        .enumerate()
        .map(|(v, r)| {
            if !present[v] {
                return Vec::new();
            }
            let mut s: Vec<(VertexId, u32)> =
                r.iter().enumerate().map(|(i, &u)| (u, i as u32)).collect();
            s.sort_unstable();
            s
        })
        .collect()
}

/// One end of a clockwise arc: a vertex, or an edge which the arc excludes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcEnd {
    V(VertexId),
    E(VertexId, VertexId),
}

/// Clockwise arc of `cycle` from `from` to `to` per the xCy / xCe convention:
/// edge endpoints resolve so the edge itself is excluded, and xCx is the
/// single vertex x.
pub fn clockwise_arc(
    cycle: &[VertexId],
    from: ArcEnd,
    to: ArcEnd,
) -> Result<Vec<VertexId>, GraphError> {
    let k = cycle.len();
    let pos = |v: VertexId| cycle.iter().position(|&x| x == v);
    let edge_pos = |a: VertexId, b: VertexId| -> Option<(usize, usize)> {
        (0..k).find_map(|i| {
            let (x, y) = (cycle[i], cycle[(i + 1) % k]);
            if (x, y) == (a, b) || (x, y) == (b, a) {
                Some((i, (i + 1) % k))
            } else {
                None
            }
        })
    };
    let s = match from {
        ArcEnd::V(v) => pos(v).ok_or(GraphError::NotOnCycle)?,
        ArcEnd::E(a, b) => edge_pos(a, b).ok_or(GraphError::NotOnCycle)?.1,
    };
    let t = match to {
        ArcEnd::V(v) => pos(v).ok_or(GraphError::NotOnCycle)?,
        ArcEnd::E(a, b) => edge_pos(a, b).ok_or(GraphError::NotOnCycle)?.0,
    };
    let mut arc = Vec::new();
    let mut i = s;
    loop {
        arc.push(cycle[i]);
        if i == t {
            break;
        }
        i = (i + 1) % k;
    }
    Ok(arc)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn tri() -> PlaneGraph {
        PlaneGraph::build(
            vec![(1, vec![2, 3]), (2, vec![3, 1]), (3, vec![1, 2])],
            vec![1, 2, 3],
        )
        .unwrap()
    }

    pub fn c4() -> PlaneGraph {
        PlaneGraph::build(
            vec![
                (1, vec![2, 4]),
                (2, vec![3, 1]),
                (3, vec![4, 2]),
                (4, vec![1, 3]),
            ],
            vec![1, 2, 3, 4],
        )
        .unwrap()
    }

    pub fn cycle(n: u32) -> PlaneGraph {
        let rots: Vec<(VertexId, Vec<VertexId>)> = (1..=n)
            .map(|v| {
                let prev = if v == 1 { n } else { v - 1 };
                let next = if v == n { 1 } else { v + 1 };
                (v, vec![next, prev])
            })
            .collect();
        PlaneGraph::build(rots, (1..=n).collect()).unwrap()
    }

    /// K4 with outer triangle (1,2,3) and center 4.
    pub fn k4() -> PlaneGraph {
        PlaneGraph::build(
            vec![
                (1, vec![3, 4, 2]),
                (2, vec![1, 4, 3]),
                (3, vec![2, 4, 1]),
                (4, vec![3, 2, 1]),
            ],
            vec![1, 3, 2],
        )
        .unwrap()
    }

    /// Wheel: rim (1,2,3,4) outer, hub 5.
    pub fn w4() -> PlaneGraph {
        PlaneGraph::build(
            vec![
                (1, vec![2, 5, 4]),
                (2, vec![3, 5, 1]),
                (3, vec![4, 5, 2]),
                (4, vec![1, 5, 3]),
                (5, vec![1, 2, 3, 4]),
            ],
            vec![1, 2, 3, 4],
        )
        .unwrap()
    }

    /// Cycle 1..6 with chord 2-5, outer the hexagon.
    pub fn ladder6() -> PlaneGraph {
        PlaneGraph::build(
            vec![
                (1, vec![2, 6]),
                (2, vec![3, 5, 1]),
                (3, vec![4, 2]),
                (4, vec![5, 3]),
                (5, vec![6, 2, 4]),
                (6, vec![1, 5]),
            ],
            vec![1, 2, 3, 4, 5, 6],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn tri_faces() {
        let g = tri();
        assert_eq!(g.faces().len(), 2);
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn c4_two_quad_walks() {
        let g = c4();
        let f = g.faces();
        assert_eq!(f.len(), 2);
        assert!(f.walks.iter().all(|w| w.len() == 4));
    }

    #[test]
    fn k4_faces_and_handshake() {
        let g = k4();
        let f = g.faces();
        assert_eq!(f.len(), 4);
        let deg_sum: usize = f.walks.iter().map(|w| w.len()).sum();
        assert_eq!(deg_sum, 2 * g.edge_count());
    }

    #[test]
    fn w4_faces() {
        assert_eq!(w4().faces().len(), 5);
    }

    #[test]
    fn inconsistent_rotation_rejected() {
        let r = PlaneGraph::build(vec![(1, vec![2]), (2, vec![])], vec![1, 2]);
        assert!(matches!(r, Err(GraphError::InconsistentRotation(_))));
    }

    #[test]
    fn duplicate_neighbor_rejected() {
        let r = PlaneGraph::build(vec![(1, vec![2, 2]), (2, vec![1, 1])], vec![1, 2]);
        assert!(matches!(r, Err(GraphError::NonSimple(_))));
    }

    #[test]
    fn bad_outer_rejected() {
        let r = PlaneGraph::build(
            vec![(1, vec![2, 3]), (2, vec![3, 1]), (3, vec![1, 2])],
            vec![1, 2],
        );
        assert!(r.is_err());
    }

    #[test]
    fn mirror_is_involution() {
        for g in [tri(), c4(), k4(), w4(), ladder6()] {
            assert_eq!(g.mirror().mirror(), g);
        }
    }

    #[test]
    fn mirror_preserves_face_multiset() {
        let g = k4();
        let norm = |g: &PlaneGraph| {
            let mut a: Vec<Vec<VertexId>> = g
                .faces()
                .walks
                .iter()
                .map(|w| {
                    let mut s = w.clone();
                    s.sort_unstable();
                    s
                })
                .collect();
            a.sort();
            a
        };
        assert_eq!(norm(&g), norm(&g.mirror()));
    }

    #[test]
    fn reroot_k4_inner_face() {
        let g = k4();
        let f = g
            .faces()
            .walks
            .iter()
            .position(|w| {
                let mut s = w.clone();
                s.sort_unstable();
                s == vec![1, 2, 4]
            })
            .unwrap();
        let r = g.reroot_outer_face(f).unwrap();
        assert_eq!(normalize_cycle(r.outer_walk()), normalize_cycle(&[1, 2, 4]));
        let old = r
            .faces()
            .walks
            .iter()
            .position(|w| normalize_cycle(w) == normalize_cycle(g.outer_walk()))
            .unwrap();
        assert_eq!(r.reroot_outer_face(old).unwrap(), g);
    }

    #[test]
    fn reroot_identity() {
        let g = k4();
        let o = g.faces().outer;
        assert_eq!(g.reroot_outer_face(o).unwrap(), g);
    }

    #[test]
    fn subdivide_c4_gives_c5() {
        let g = c4();
        let (h, z) = g.subdivide_edge(1, 2).unwrap();
        assert_eq!(h.vertex_count(), 5);
        assert_eq!(h.edge_count(), 5);
        assert_eq!(z, 5);
        assert_eq!(h.faces().len(), 2);
        assert!(h.has_edge(1, z) && h.has_edge(z, 2) && !h.has_edge(1, 2));
    }

    #[test]
    fn subdivide_grows_incident_faces() {
        let g = k4();
        let (a, b) = {
            let f = g.faces();
            (
                f.face_of(&g, 1, 2).unwrap(),
                f.face_of(&g, 2, 1).unwrap(),
            )
        };
        let sizes_before: Vec<usize> = g.faces().walks.iter().map(|w| w.len()).collect();
        let (h, _) = g.subdivide_edge(1, 2).unwrap();
        let mut after: Vec<usize> = h.faces().walks.iter().map(|w| w.len()).collect();
        let mut expect = sizes_before;
        expect[a] += 1;
        expect[b] += 1;
        after.sort_unstable();
        expect.sort_unstable();
        assert_eq!(after, expect);
    }

    #[test]
    fn add_chord_inside_c4() {
        let g = c4();
        let inner = 1 - g.faces().outer;
        let h = g.add_cofacial_edge(1, 3, inner).unwrap();
        assert_eq!(h.edge_count(), 5);
        assert_eq!(h.faces().len(), 3);
        assert_eq!(
            normalize_cycle(h.outer_walk()),
            normalize_cycle(g.outer_walk())
        );
    }

    #[test]
    fn add_existing_edge_unchanged() {
        let g = c4();
        let inner = 1 - g.faces().outer;
        assert_eq!(g.add_cofacial_edge(1, 2, inner).unwrap(), g);
    }

    #[test]
    fn add_chord_outside_c4() {
        let g = c4();
        let outer = g.faces().outer;
        let h = g.add_edge_in_face(2, 4, outer, None).unwrap();
        assert_eq!(h.edge_count(), 5);
        assert_eq!(h.faces().len(), 3);
        assert_eq!(h.outer_walk().len(), 3);
    }

    #[test]
    fn restrict_tracks_outer() {
        let g = w4();
        let (h, _) = g.without_vertices(&[5]).unwrap();
        assert_eq!(
            normalize_cycle(h.outer_walk()),
            normalize_cycle(&[1, 2, 3, 4])
        );
        assert_eq!(h.faces().len(), 2);
        let (h2, _) = g.without_vertices(&[1]).unwrap();
        assert_eq!(h2.vertex_count(), 4);
        assert!(h2.is_on_outer(5));
    }

    #[test]
    fn restrict_hole_face_found() {
        let g = ladder6();
        let f_old = g.faces().face_of(&g, 3, 4).unwrap();
        let (h, info) = g.without_vertices(&[3, 4]).unwrap();
        let hole = info.new_face_of(f_old).unwrap();
        let w = &h.faces().walks[hole];
        assert!(w.contains(&2) && w.contains(&5));
    }

    #[test]
    fn separator_side_ladder() {
        let g = ladder6();
        // side {1,2,5,6}: chord 2-5 already exists, nothing added
        let mut side = vec![false; 7];
        for v in [1u32, 2, 5, 6] {
            side[v as usize] = true;
        }
        let (s, added) = g.separator_side(&side, 2, 5, None).unwrap();
        assert!(!added);
        assert_eq!(s.vertex_count(), 4);
        assert_eq!(s.edge_count(), 4);
        // side {2,3,4,5}: no edge 2-5 on that side view? chord is retained
        let mut side2 = vec![false; 7];
        for v in [2u32, 3, 4, 5] {
            side2[v as usize] = true;
        }
        let (s2, added2) = g.separator_side(&side2, 2, 5, None).unwrap();
        assert!(!added2);
        assert_eq!(s2.vertex_count(), 4);
    }

    #[test]
    fn separator_side_c6_adds_virtual() {
        let g = cycle(6);
        let mut side = vec![false; 7];
        for v in [4u32, 5, 6, 1] {
            side[v as usize] = true;
        }
        let (s, added) = g.separator_side(&side, 1, 4, None).unwrap();
        assert!(added);
        assert!(s.has_edge(1, 4));
        assert_eq!(s.vertex_count(), 4);
        assert_eq!(s.edge_count(), 4);
        assert_eq!(s.faces().len(), 2);
    }

    #[test]
    fn arc_basics() {
        let c = vec![1, 2, 3, 4];
        assert_eq!(
            clockwise_arc(&c, ArcEnd::V(1), ArcEnd::V(3)).unwrap(),
            vec![1, 2, 3]
        );
        assert_eq!(
            clockwise_arc(&c, ArcEnd::V(1), ArcEnd::E(3, 4)).unwrap(),
            vec![1, 2, 3]
        );
        assert_eq!(
            clockwise_arc(&c, ArcEnd::V(1), ArcEnd::V(1)).unwrap(),
            vec![1]
        );
        assert_eq!(
            clockwise_arc(&c, ArcEnd::E(4, 1), ArcEnd::V(3)).unwrap(),
            vec![1, 2, 3]
        );
        assert!(clockwise_arc(&c, ArcEnd::V(9), ArcEnd::V(1)).is_err());
    }

    #[test]
    fn arc_complement_covers_cycle() {
        let c = vec![1, 2, 3, 4, 5];
        let a = clockwise_arc(&c, ArcEnd::V(2), ArcEnd::V(4)).unwrap();
        let b = clockwise_arc(&c, ArcEnd::V(4), ArcEnd::V(2)).unwrap();
        assert_eq!(a.len() + b.len(), c.len() + 2);
        assert_eq!(a.first(), b.last());
        assert_eq!(a.last(), b.first());
    }

    #[test]
    fn contract_c4_edge() {
        let h = c4().contract_edge_into(1, 2).unwrap();
        assert_eq!(h.vertex_count(), 3);
        assert_eq!(h.edge_count(), 3);
        assert!(h.has_edge(2, 4) && h.has_edge(2, 3) && h.has_edge(3, 4));
    }

    #[test]
    fn insert_vertex_in_inner_face() {
        let g = tri();
        let inner = 1 - g.faces().outer;
        let walk_len = g.face_walk(inner).len();
        assert_eq!(walk_len, 3);
        let (h, z) = g
            .insert_vertex_in_face(inner, &[0, 1, 2], None)
            .unwrap();
        assert_eq!(h.vertex_count(), 4);
        assert_eq!(h.edge_count(), 6);
        assert_eq!(h.faces().len(), 4);
        assert_eq!(h.degree(z), 3);
    }

    #[test]
    fn canonical_code_invariant_under_relabel() {
        let g = ladder6();
        let rots: Vec<(VertexId, Vec<VertexId>)> = g
            .vertices()
            .map(|v| (v + 10, g.neighbors(v).iter().map(|&u| u + 10).collect()))
            .collect();
        let outer: Vec<VertexId> = g.outer_walk().iter().map(|&v| v + 10).collect();
        let h = PlaneGraph::build(rots, outer).unwrap();
        assert_eq!(g.canonical_code(), h.canonical_code());
        assert_eq!(g.canonical_code(), g.mirror().canonical_code());
    }
}

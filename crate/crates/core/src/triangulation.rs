//! Core data model: tetrahedra, face gluings, vertex and edge classes.

use serde::{Deserialize, Serialize};

use crate::error::TriError;
use crate::perm::{complement, edge_index, Perm, EDGE_ENDS, IDENTITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Ideal,
    Material,
}

/// Where face `f` of a tetrahedron goes: the target tetrahedron and the corner map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gluing {
    pub tet: usize,
    pub perm: Perm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexClass {
    pub id: usize,
    pub kind: VertexKind,
    pub corners: Vec<(usize, u8)>,
    pub euler: i64,
}

/// One step of the walk around an edge: tetrahedron `tet` holds the edge as `a b`;
/// the walk leaves through the face opposite `y` and arrived through the face opposite `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeStep {
    pub tet: usize,
    pub a: u8,
    pub b: u8,
    pub x: u8,
    pub y: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeClass {
    pub id: usize,
    /// Cyclically ordered walk; position `k` also names the triangle crossed between
    /// step `k` and step `k + 1`.
    pub steps: Vec<EdgeStep>,
    pub ends: (usize, usize),
    pub embedded: bool,
}

impl EdgeClass {
    pub fn degree(&self) -> usize {
        self.steps.len()
    }

    /// (tetrahedron, edge index) pairs in cyclic order.
    pub fn incidences(&self) -> Vec<(usize, usize)> {
        self.steps.iter().map(|s| (s.tet, edge_index(s.a, s.b))).collect()
    }

    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    tets: Vec<[Gluing; 4]>,
    kinds: Vec<[VertexKind; 4]>,
    vertices: Vec<VertexClass>,
    edges: Vec<EdgeClass>,
    vertex_of: Vec<[usize; 4]>,
    edge_of: Vec<[usize; 6]>,
    position_of: Vec<[usize; 6]>,
}

impl PartialEq for Triangulation {
    fn eq(&self, other: &Self) -> bool {
        self.tets == other.tets && self.kinds == other.kinds
    }
}

impl Triangulation {
    /// Builds a triangulation from gluings and per-corner kinds, validating everything.
    pub fn new(tets: Vec<[Gluing; 4]>, kinds: Vec<[VertexKind; 4]>) -> Result<Self, TriError> {
        assert_eq!(tets.len(), kinds.len());
        check_gluings(&tets)?;
        let (vertex_of, mut vertices) = vertex_classes(&tets);
        for v in &vertices {
            let kind = kinds[v.corners[0].0][v.corners[0].1 as usize];
            if v.corners.iter().any(|&(t, c)| kinds[t][c as usize] != kind) {
                return Err(TriError::MixedVertexKinds { vertex: v.id });
            }
        }
        for v in vertices.iter_mut() {
            v.kind = kinds[v.corners[0].0][v.corners[0].1 as usize];
        }
        let (edges, edge_of, position_of) = edge_classes(&tets, &vertex_of)?;
        let mut ends_at = vec![0i64; vertices.len()];
        for e in &edges {
            ends_at[e.ends.0] += 1;
            ends_at[e.ends.1] += 1;
        }
        for v in vertices.iter_mut() {
            // V - E + F with E = 3F/2
            v.euler = ends_at[v.id] - (v.corners.len() as i64) / 2;
            if v.kind == VertexKind::Material && v.euler != 2 {
                return Err(TriError::MaterialLinkNotSphere { vertex: v.id, euler: v.euler });
            }
        }
        Ok(Triangulation { tets, kinds, vertices, edges, vertex_of, edge_of, position_of })
    }

    /// Builds from gluings with one kind per vertex class (classes numbered by first corner).
    pub fn with_class_kinds(
        tets: Vec<[Gluing; 4]>,
        class_kinds: &[(usize, VertexKind)],
    ) -> Result<Self, TriError> {
        check_gluings(&tets)?;
        let (vertex_of, vertices) = vertex_classes(&tets);
        let mut kinds = vec![[VertexKind::Ideal; 4]; tets.len()];
        for &(id, kind) in class_kinds {
            let v = vertices.get(id).ok_or(TriError::UnknownVertex(id))?;
            for &(t, c) in &v.corners {
                kinds[t][c as usize] = kind;
            }
        }
        debug_assert_eq!(vertex_of.len(), tets.len());
        Triangulation::new(tets, kinds)
    }

    pub fn ideal(tets: Vec<[Gluing; 4]>) -> Result<Self, TriError> {
        let n = tets.len();
        Triangulation::new(tets, vec![[VertexKind::Ideal; 4]; n])
    }

    pub fn size(&self) -> usize {
        self.tets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tets.is_empty()
    }

    pub fn gluing(&self, tet: usize, face: u8) -> Gluing {
        self.tets[tet][face as usize]
    }

    pub fn gluings(&self) -> &[[Gluing; 4]] {
        &self.tets
    }

    pub fn corner_kinds(&self) -> &[[VertexKind; 4]] {
        &self.kinds
    }

    pub fn corner_kind(&self, tet: usize, corner: u8) -> VertexKind {
        self.kinds[tet][corner as usize]
    }

    pub fn vertices(&self) -> &[VertexClass] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeClass] {
        &self.edges
    }

    pub fn vertex_of(&self, tet: usize, corner: u8) -> usize {
        self.vertex_of[tet][corner as usize]
    }

    pub fn edge_of(&self, tet: usize, a: u8, b: u8) -> usize {
        self.edge_of[tet][edge_index(a, b)]
    }

    /// Position of edge `ab` of `tet` in the cyclic walk of its class.
    pub fn position_of(&self, tet: usize, a: u8, b: u8) -> usize {
        self.position_of[tet][edge_index(a, b)]
    }

    pub fn ideal_vertices(&self) -> Vec<usize> {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Ideal).map(|v| v.id).collect()
    }

    pub fn material_vertices(&self) -> Vec<usize> {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Material).map(|v| v.id).collect()
    }

    pub fn is_ideal(&self) -> bool {
        self.vertices.iter().all(|v| v.kind == VertexKind::Ideal)
    }

    /// Canonical face pairs: each pair listed once from its lexicographically smaller end.
    pub fn face_pairs(&self) -> Vec<((usize, u8), (usize, u8))> {
        let mut out = Vec::with_capacity(2 * self.size());
        for t in 0..self.size() {
            for f in 0..4u8 {
                let g = self.gluing(t, f);
                let other = (g.tet, g.perm.apply(f));
                if (t, f) < other {
                    out.push(((t, f), other));
                }
            }
        }
        out
    }

    /// Index into `face_pairs()` for either end of a face.
    pub fn face_pair_index(&self, tet: usize, face: u8) -> usize {
        let g = self.gluing(tet, face);
        let other = (g.tet, g.perm.apply(face));
        let key = std::cmp::min((tet, face), other);
        self.face_pairs().iter().position(|p| p.0 == key).unwrap()
    }

    pub fn partner(&self, tet: usize, face: u8) -> (usize, u8) {
        let g = self.gluing(tet, face);
        (g.tet, g.perm.apply(face))
    }

    /// True when every face pairing reverses orientation.
    pub fn is_oriented(&self) -> bool {
        self.tets.iter().all(|g| g.iter().all(|x| x.perm.is_odd()))
    }

    pub fn is_connected(&self) -> bool {
        if self.tets.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.size()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            for g in &self.tets[t] {
                if !seen[g.tet] {
                    seen[g.tet] = true;
                    stack.push(g.tet);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Relabels tetrahedra so that all pairings are odd, if the triangulation is orientable.
    /// Returns the new triangulation and, per tetrahedron, the relabelling used
    /// (new corner `i` is old corner `sigma[i]`).
    pub fn oriented(&self) -> Option<(Triangulation, Vec<Perm>)> {
        let sigma = orientation_flips(&self.tets)?;
        let (tets, kinds) = relabel(&self.tets, &self.kinds, &sigma);
        Some((Triangulation::new(tets, kinds).expect("relabelling keeps validity"), sigma))
    }

    /// Tetrahedra renumbered by `order` (new index `i` is old `order[i]`) with corners relabelled
    /// by `sigma` (new corner `c` of new tet `i` is old corner `sigma[i][c]`).
    pub fn relabelled(&self, order: &[usize], sigma: &[Perm]) -> Triangulation {
        let n = self.size();
        let mut new_index = vec![0; n];
        for (i, &o) in order.iter().enumerate() {
            new_index[o] = i;
        }
        let mut tets = vec![[Gluing { tet: 0, perm: IDENTITY }; 4]; n];
        let mut kinds = vec![[VertexKind::Ideal; 4]; n];
        for i in 0..n {
            let old = order[i];
            let s = sigma[i];
            for c in 0..4u8 {
                kinds[i][c as usize] = self.kinds[old][s.apply(c) as usize];
                let g = self.tets[old][s.apply(c) as usize];
                let j = new_index[g.tet];
                let sj = sigma[j];
                tets[i][c as usize] = Gluing { tet: j, perm: sj.inverse().compose(g.perm).compose(s) };
            }
        }
        Triangulation::new(tets, kinds).expect("relabelling keeps validity")
    }
}

pub(crate) fn check_gluings(tets: &[[Gluing; 4]]) -> Result<(), TriError> {
    let n = tets.len();
    for (t, gl) in tets.iter().enumerate() {
        for f in 0..4u8 {
            let g = gl[f as usize];
            if g.tet >= n {
                return Err(TriError::BadTarget { tet: t, face: f, target: g.tet });
            }
            let f2 = g.perm.apply(f);
            if g.tet == t && f2 == f {
                return Err(if g.perm == IDENTITY {
                    TriError::SelfGluedIdentity { tet: t, face: f }
                } else {
                    TriError::FaceFolded { tet: t, face: f }
                });
            }
            let back = tets[g.tet][f2 as usize];
            if back.tet != t || back.perm != g.perm.inverse() {
                return Err(TriError::NonInvolutive { tet: t, face: f });
            }
        }
    }
    Ok(())
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn vertex_classes(tets: &[[Gluing; 4]]) -> (Vec<[usize; 4]>, Vec<VertexClass>) {
    let n = tets.len();
    let mut parent: Vec<usize> = (0..4 * n).collect();
    for (t, gl) in tets.iter().enumerate() {
        for f in 0..4u8 {
            let g = gl[f as usize];
            for v in 0..4u8 {
                if v != f {
                    let a = find(&mut parent, 4 * t + v as usize);
                    let b = find(&mut parent, 4 * g.tet + g.perm.apply(v) as usize);
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut id_of_root = vec![usize::MAX; 4 * n];
    let mut vertex_of = vec![[0usize; 4]; n];
    let mut vertices: Vec<VertexClass> = Vec::new();
    for t in 0..n {
        for v in 0..4u8 {
            let r = find(&mut parent, 4 * t + v as usize);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = vertices.len();
                vertices.push(VertexClass {
                    id: vertices.len(),
                    kind: VertexKind::Ideal,
                    corners: Vec::new(),
                    euler: 0,
                });
            }
            let id = id_of_root[r];
            vertex_of[t][v as usize] = id;
            vertices[id].corners.push((t, v));
        }
    }
    (vertex_of, vertices)
}

/// Next step of the edge walk.
#[inline]
pub fn next_step(tets: &[[Gluing; 4]], s: EdgeStep) -> EdgeStep {
    let g = tets[s.tet][s.y as usize];
    let p = g.perm;
    EdgeStep { tet: g.tet, a: p.apply(s.a), b: p.apply(s.b), x: p.apply(s.y), y: p.apply(s.x) }
}

#[allow(clippy::type_complexity)]
fn edge_classes(
    tets: &[[Gluing; 4]],
    vertex_of: &[[usize; 4]],
) -> Result<(Vec<EdgeClass>, Vec<[usize; 6]>, Vec<[usize; 6]>), TriError> {
    let n = tets.len();
    let mut edge_of = vec![[usize::MAX; 6]; n];
    let mut position_of = vec![[0usize; 6]; n];
    let mut edges = Vec::new();
    for t in 0..n {
        for (e, &(a, b)) in EDGE_ENDS.iter().enumerate() {
            if edge_of[t][e] != usize::MAX {
                continue;
            }
            let id = edges.len();
            let (x, y) = complement(a, b);
            let start = EdgeStep { tet: t, a, b, x, y };
            let mut steps = vec![start];
            edge_of[t][e] = id;
            let mut s = next_step(tets, start);
            while s != start {
                let k = edge_index(s.a, s.b);
                if edge_of[s.tet][k] != usize::MAX {
                    return Err(TriError::EdgeReversed { tet: s.tet, edge: k });
                }
                edge_of[s.tet][k] = id;
                position_of[s.tet][k] = steps.len();
                steps.push(s);
                s = next_step(tets, s);
            }
            let mut seen = std::collections::HashSet::new();
            let embedded = steps.iter().all(|s| seen.insert(s.tet));
            let ends = (vertex_of[t][a as usize], vertex_of[t][b as usize]);
            edges.push(EdgeClass { id, steps, ends, embedded });
        }
    }
    Ok((edges, edge_of, position_of))
}

/// Per-tetrahedron relabelling making every pairing odd, or `None` if non-orientable.
pub(crate) fn orientation_flips(tets: &[[Gluing; 4]]) -> Option<Vec<Perm>> {
    let n = tets.len();
    let mut sign: Vec<Option<bool>> = vec![None; n];
    for root in 0..n {
        if sign[root].is_some() {
            continue;
        }
        sign[root] = Some(false);
        let mut stack = vec![root];
        while let Some(t) = stack.pop() {
            let st = sign[t].unwrap();
            for g in &tets[t] {
                // flipped(t) xor flipped(u) must equal "perm is even"
                let want = st ^ !g.perm.is_odd();
                match sign[g.tet] {
                    None => {
                        sign[g.tet] = Some(want);
                        stack.push(g.tet);
                    }
                    Some(s) if s != want => return None,
                    _ => {}
                }
            }
        }
    }
    Some(
        sign.into_iter()
            .map(|s| if s.unwrap() { Perm::transposition(2, 3) } else { IDENTITY })
            .collect(),
    )
}

pub(crate) fn relabel(
    tets: &[[Gluing; 4]],
    kinds: &[[VertexKind; 4]],
    sigma: &[Perm],
) -> (Vec<[Gluing; 4]>, Vec<[VertexKind; 4]>) {
    let n = tets.len();
    let mut out = vec![[Gluing { tet: 0, perm: IDENTITY }; 4]; n];
    let mut out_kinds = vec![[VertexKind::Ideal; 4]; n];
    for t in 0..n {
        let s = sigma[t];
        for c in 0..4u8 {
            out_kinds[t][c as usize] = kinds[t][s.apply(c) as usize];
            let g = tets[t][s.apply(c) as usize];
            out[t][c as usize] =
                Gluing { tet: g.tet, perm: sigma[g.tet].inverse().compose(g.perm).compose(s) };
        }
    }
    (out, out_kinds)
}

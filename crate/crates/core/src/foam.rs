//! Foams: the 2-complex dual to a triangulation, stored as incidences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::TriError;
use crate::perm::Perm;
use crate::triangulation::{Gluing, Triangulation, VertexKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoamError {
    #[error("foam is empty")]
    Empty,
    #[error("foam vertex {0} does not have four edge ends")]
    VertexValence(usize),
    #[error("foam edge {edge} has {sides} face sides, expected 3")]
    EdgeSides { edge: usize, sides: usize },
    #[error("foam edge {0} does not match the vertex ends pointing at it")]
    EdgeMismatch(usize),
    #[error("foam face {0} disagrees with the edges around it")]
    FaceMismatch(usize),
    #[error("region tags do not match the corners they claim")]
    RegionMismatch,
    #[error(transparent)]
    Dual(#[from] TriError),
}

/// One of the four edge ends at a foam vertex; slot `i` is dual to face `i` of the tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoamVertex {
    pub ends: Vec<EdgeEnd>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoamEdge {
    /// `(vertex, slot)` at each end.
    pub ends: [(usize, u8); 2],
    /// How the corners around end 0 match those around end 1.
    pub perm: Perm,
    /// Foam face on each of the sides, listed by the corner pair at end 0.
    pub sides: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoamFace {
    /// Foam edges met going once around the face, as `(edge, end left through)`.
    pub boundary: Vec<(usize, u8)>,
    /// Regions on the two sides (the edge's endpoint classes).
    pub regions: [usize; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    Peripheral { cusp: usize },
    Material,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    /// `(vertex, corner)` octants of the foam vertices facing this region.
    pub corners: Vec<(usize, u8)>,
    pub faces: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Foam {
    pub vertices: Vec<FoamVertex>,
    pub edges: Vec<FoamEdge>,
    pub faces: Vec<FoamFace>,
    pub regions: Vec<Region>,
}

impl Foam {
    pub fn peripheral_regions(&self) -> usize {
        self.regions.iter().filter(|r| matches!(r.kind, RegionKind::Peripheral { .. })).count()
    }

    pub fn material_regions(&self) -> usize {
        self.regions.iter().filter(|r| r.kind == RegionKind::Material).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn dual_of_triangulation(tri: &Triangulation) -> Result<Foam, FoamError> {
    if tri.is_empty() {
        return Err(FoamError::Empty);
    }
    let pairs = tri.face_pairs();
    let mut vertices = vec![FoamVertex { ends: Vec::with_capacity(4) }; tri.size()];
    for v in vertices.iter_mut() {
        v.ends = vec![EdgeEnd { edge: 0, end: 0 }; 4];
    }
    let mut edges = Vec::with_capacity(pairs.len());
    for (i, &((t, f), (u, h))) in pairs.iter().enumerate() {
        vertices[t].ends[f as usize] = EdgeEnd { edge: i, end: 0 };
        vertices[u].ends[h as usize] = EdgeEnd { edge: i, end: 1 };
        let sides = side_pairs(f).iter().map(|&(a, b)| tri.edge_of(t, a, b)).collect();
        edges.push(FoamEdge { ends: [(t, f), (u, h)], perm: tri.gluing(t, f).perm, sides });
    }
    let faces = tri
        .edges()
        .iter()
        .map(|e| FoamFace {
            boundary: e.steps.iter().map(|s| end_of(&vertices, s.tet, s.y)).collect(),
            regions: [e.ends.0, e.ends.1],
        })
        .collect();
    let regions = tri
        .vertices()
        .iter()
        .map(|v| {
            let mut faces: Vec<usize> =
                tri.edges().iter().filter(|e| e.ends.0 == v.id || e.ends.1 == v.id).map(|e| e.id).collect();
            faces.dedup();
            Region {
                kind: match v.kind {
                    VertexKind::Ideal => RegionKind::Peripheral { cusp: v.id },
                    VertexKind::Material => RegionKind::Material,
                },
                corners: v.corners.clone(),
                faces,
            }
        })
        .collect();
    Ok(Foam { vertices, edges, faces, regions })
}

fn end_of(vertices: &[FoamVertex], tet: usize, face: u8) -> (usize, u8) {
    let e = vertices[tet].ends[face as usize];
    (e.edge, e.end)
}

/// Corner pairs spanning the three tetrahedron edges in face `f`.
fn side_pairs(f: u8) -> [(u8, u8); 3] {
    let c = crate::perm::face_corners(f);
    [(c[0], c[1]), (c[0], c[2]), (c[1], c[2])]
}

/// Rebuilds the triangulation, checking the local models and the face and region data.
/// Faces must be numbered like the edge classes of the rebuilt triangulation.
pub fn dual_of_foam(foam: &Foam) -> Result<Triangulation, FoamError> {
    if foam.vertices.is_empty() {
        return Err(FoamError::Empty);
    }
    for (i, e) in foam.edges.iter().enumerate() {
        if e.sides.len() != 3 {
            return Err(FoamError::EdgeSides { edge: i, sides: e.sides.len() });
        }
    }
    let n = foam.vertices.len();
    let mut tets = Vec::with_capacity(n);
    for (t, v) in foam.vertices.iter().enumerate() {
        if v.ends.len() != 4 {
            return Err(FoamError::VertexValence(t));
        }
        let mut row = [Gluing { tet: 0, perm: crate::perm::IDENTITY }; 4];
        for (slot, end) in v.ends.iter().enumerate() {
            let e = foam.edges.get(end.edge).ok_or(FoamError::EdgeMismatch(end.edge))?;
            let me = e.ends[end.end as usize];
            if me != (t, slot as u8) || end.end > 1 {
                return Err(FoamError::EdgeMismatch(end.edge));
            }
            let other = e.ends[1 - end.end as usize];
            let perm = if end.end == 0 { e.perm } else { e.perm.inverse() };
            if perm.apply(slot as u8) != other.1 || other.0 >= n {
                return Err(FoamError::EdgeMismatch(end.edge));
            }
            row[slot] = Gluing { tet: other.0, perm };
        }
        tets.push(row);
    }
    let mut kinds = vec![[VertexKind::Ideal; 4]; n];
    let mut claimed = vec![[false; 4]; n];
    for r in &foam.regions {
        let kind = match r.kind {
            RegionKind::Peripheral { .. } => VertexKind::Ideal,
            RegionKind::Material => VertexKind::Material,
        };
        for &(t, c) in &r.corners {
            if t >= n || c > 3 || claimed[t][c as usize] {
                return Err(FoamError::RegionMismatch);
            }
            claimed[t][c as usize] = true;
            kinds[t][c as usize] = kind;
        }
    }
    if claimed.iter().flatten().any(|&b| !b) {
        return Err(FoamError::RegionMismatch);
    }
    let tri = Triangulation::new(tets, kinds)?;
    if tri.vertices().len() != foam.regions.len() {
        return Err(FoamError::RegionMismatch);
    }
    if tri.edges().len() != foam.faces.len() {
        return Err(FoamError::FaceMismatch(tri.edges().len().min(foam.faces.len())));
    }
    for (i, e) in foam.edges.iter().enumerate() {
        let (t, f) = e.ends[0];
        if side_pairs(f).iter().map(|&(a, b)| tri.edge_of(t, a, b)).ne(e.sides.iter().copied()) {
            return Err(FoamError::EdgeMismatch(i));
        }
    }
    for (i, face) in foam.faces.iter().enumerate() {
        let ok = face.boundary.len() == tri.edges()[i].degree()
            && face.boundary.iter().all(|&(e, _)| foam.edges.get(e).is_some_and(|fe| fe.sides.contains(&i)));
        if !ok {
            return Err(FoamError::FaceMismatch(i));
        }
    }
    Ok(tri)
}

/// Faces with a single edge side on their boundary.
pub fn degree_one_faces(foam: &Foam) -> Vec<usize> {
    foam.faces.iter().enumerate().filter(|(_, f)| f.boundary.len() == 1).map(|(i, _)| i).collect()
}

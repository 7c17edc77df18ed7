use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("tetrahedron {tet} face {face} is not glued (dangling face)")]
    Dangling { tet: usize, face: u8 },
    #[error("tetrahedron {tet} face {face} is glued to missing tetrahedron {target}")]
    BadTarget { tet: usize, face: u8, target: usize },
    #[error("gluing of tetrahedron {tet} face {face} is not involutive")]
    NonInvolutive { tet: usize, face: u8 },
    #[error("tetrahedron {tet} face {face} is glued to itself by the identity")]
    SelfGluedIdentity { tet: usize, face: u8 },
    #[error("tetrahedron {tet} face {face} is folded onto itself")]
    FaceFolded { tet: usize, face: u8 },
    #[error("edge {edge} of tetrahedron {tet} is identified with itself in reverse")]
    EdgeReversed { tet: usize, edge: usize },
    #[error("vertex class {vertex} mixes ideal and material corners")]
    MixedVertexKinds { vertex: usize },
    #[error("material vertex {vertex} has link Euler characteristic {euler}, expected 2")]
    MaterialLinkNotSphere { vertex: usize, euler: i64 },
    #[error("vertex kind given for unknown vertex class {0}")]
    UnknownVertex(usize),
    #[error("triangulation is disconnected")]
    Disconnected,
    #[error("triangulation is empty")]
    Empty,
}

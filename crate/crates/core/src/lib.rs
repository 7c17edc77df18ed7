//! Ideal and partially ideal triangulations of 3-manifolds, their dual foams,
//! elementary moves, snakes, holonomy labels and gluing equations.

pub mod cusp;
pub mod error;
pub mod foam;
pub mod fixtures;
pub mod gluing;
pub mod holonomy;
pub mod homology;
pub mod io;
pub mod isosig;
pub mod mobius;
pub mod moves;
pub mod perm;
pub mod search;
pub mod snakes;
pub mod surgery;
pub mod triangulation;

pub use error::TriError;
pub use perm::Perm;
pub use triangulation::{EdgeClass, EdgeStep, Gluing, Triangulation, VertexClass, VertexKind};

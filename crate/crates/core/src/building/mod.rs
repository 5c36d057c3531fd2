//! The discrete Ã₂ building of SL₃ over Q with the p-adic valuation.
//!
//! Vertices are homothety classes of Z_(p)-lattices in Q³, stored as a
//! canonical basis matrix. Chambers at infinity are rational full flags.

mod chamber;
mod lattice;
mod panel;
mod residue;
mod vertex;

use thiserror::Error;

use crate::arith::ArithError;

pub use chamber::{
    cylinder_representative, flags_opposite, germ_of_chamber, sector_point, u_cylinder_contains,
    ChamberAtInfinity, SectorBasis,
};
pub use lattice::{
    elementary_divisors, lattice_normal_form, primitive_local, reduce_mod_p, smith_adapted,
    SmithAdapted,
};
pub use panel::{
    induced_tree_action, panel_tree_project, tree_distance, TreeVertex, VertexAtInfinity,
};
pub use residue::{
    germ_flag, germ_flag_of_matrix, residue_chambers, residue_opposite, segments_opposite_at,
    ResidueChamber,
};
pub use vertex::{theta_symmetry_check, vector_distance, Theta, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildingError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("objects live over different primes ({0} vs {1})")]
    PrimeMismatch(u64, u64),
    #[error("segment type {0} is not regular; its germ is not a chamber")]
    SingularSegment(String),
    #[error("vector is zero")]
    ZeroVector,
    #[error("flag is not incident: line does not lie in plane")]
    NotIncident,
    #[error("element does not stabilize the vertex at infinity")]
    NotStabilizing,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

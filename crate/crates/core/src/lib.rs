//! Exact computations in the affine building of type Ã₂ attached to SL₃ over
//! the rationals with a p-adic valuation.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: rationals, valuations, Newton polygons, Hensel lifting.
//! * [`coxeter`]: vectors of the model Weyl chamber, the Weyl group S₃ and the
//!   opposition involution.
//! * [`building`]: vertices as lattice classes, vector distance, residues,
//!   chambers at infinity, sectors and panel trees.
//! * [`isometry`]: classification of group elements, attracting flags, axes.
//! * [`dynamics`]: seeded random walks and their Monte Carlo statistics.
//! * [`tits`]: ping-pong certificates and the fixed-point search.

pub mod arith;
pub mod building;
pub mod coxeter;
pub mod dynamics;
pub mod isometry;
pub mod tits;

pub use arith::{Matrix, Prime, Scalar};

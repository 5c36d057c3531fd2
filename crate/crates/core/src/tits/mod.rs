//! Tits-alternative tools: ping-pong certificates for free subgroups and the
//! local-to-global fixed-point test.

mod certificate;
mod fixed;
mod pingpong;

use thiserror::Error;

use crate::building::BuildingError;
use crate::isometry::IsometryError;

pub use certificate::{
    free_group_certificate, verify_certificate, CylinderRecord, PingPongCertificate, Verdict,
    VerifyOutcome, WordCheck,
};
pub use fixed::{
    local_global_fixed_point, tree_translation_length, FixedPointReport, FixedPointVerdict, Word,
    MAX_SEARCHED_VERTICES,
};
pub use pingpong::{
    check_independent, falsify_margins, frames, margin_report, pingpong_power, FalsifierReport,
    Frame, InclusionCheck, MarginReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TitsError {
    #[error("margin infeasible: {0}")]
    MarginInfeasible(String),
    #[error("reduced word {0} evaluates to the identity")]
    WordCollision(String),
    #[error("pair is not independent: {0}")]
    NotIndependent(String),
    #[error(transparent)]
    Isometry(#[from] IsometryError),
    #[error(transparent)]
    Building(#[from] BuildingError),
}

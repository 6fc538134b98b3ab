use thiserror::Error;

use crate::exponents::RelationViolation;
use crate::rat::Rat;
use crate::spectrum::HypothesisViolation;
use crate::systems::ViolationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse rational {0:?}")]
    ParseRat(String),

    #[error("malformed piecewise-linear map: {0}")]
    Malformed(String),

    #[error("point {q} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { q: Rat, lo: Rat, hi: Rat },

    #[error("segment index {index} out of range ({count} segments)")]
    SegmentIndex { index: usize, count: usize },

    #[error("interval [{a}, {b}] has empty interior or lies outside the domain")]
    EmptyInterval { a: Rat, b: Rat },

    #[error("component counts differ ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },

    #[error("right endpoint {left} of the first map differs from left endpoint {right} of the second")]
    EndpointMismatch { left: Rat, right: Rat },

    #[error("values differ at the junction point {at}")]
    JunctionMismatch { at: Rat },

    #[error("axiom violation: {0}")]
    Violation(ViolationReport),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("exponent profile violates {} relation(s)", .0.len())]
    Relations(Vec<RelationViolation>),

    #[error("hypotheses of the finite-set construction fail ({} inequality(ies))", .0.len())]
    Hypotheses(Vec<HypothesisViolation>),

    #[error("lattice search exhausted at q = {q}: {reason}")]
    SearchExhausted { q: f64, reason: String },

    #[error("trajectory invariant broken at q = {q}: {detail}")]
    Trajectory { q: f64, detail: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

use crate::flow::Termination;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid representation: {0}")]
    InvalidRepresentation(&'static str),
    #[error("axis degeneracy at node {node}: radius {radius:e} without a declared cap")]
    AxisDegeneracy { node: usize, radius: f64 },
    #[error("radial graph folds at node {node}: grid is not strictly increasing")]
    NonGraphicalFold { node: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("flow spec mismatch: {0}")]
    SpecMismatch(&'static str),
    #[error("run terminated early: {0}")]
    Terminated(Termination),
    #[error("not enough samples: need {need}, have {have}")]
    TooFewSamples { need: usize, have: usize },
    #[error("material label {0} out of range")]
    LabelOutOfRange(usize),
    #[error("empty window (bound {0})")]
    EmptyWindow(f64),
    #[error("reference time must exceed the snapshot time")]
    TimeNotBeforeReference,
    #[error("expander integration blew up at r = {0}")]
    ExpanderBlowup(f64),
    #[error("expander tolerance {tol:e} not met (best residual {residual:e})")]
    ToleranceNotMet { tol: f64, residual: f64 },
    #[error("incompatible windows: {0}")]
    IncompatibleWindow(&'static str),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(alloc::string::String),
}

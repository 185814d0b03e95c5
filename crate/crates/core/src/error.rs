use thiserror::Error;

use crate::isospectral::IsospectralReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("eigensolver did not converge within {iterations} iterations")]
    EigFail { iterations: usize },
    #[error("group closure exceeded the cap of {cap} elements")]
    GroupTooLarge { cap: usize },
    #[error("invalid permutation for generator {name}: {reason}")]
    BadPermutation { name: String, reason: String },
    #[error("not a homomorphism: rho({g})rho({h}) differs from rho({g}{h}) by {residual:e}")]
    NotAHomomorphism { g: String, h: String, residual: f64 },
    #[error("image of {element} is not unitary (defect {residual:e})")]
    NotUnitary { element: String, residual: f64 },
    #[error("not a subgroup of the given group: {0}")]
    NotASubgroup(String),
    #[error("index {index} out of range for degree {degree}")]
    BadIndex { index: usize, degree: usize },
    #[error("operator is not pi-symmetric: generator {generator} violates by {violation:e}")]
    NotPiSymmetric { generator: String, violation: f64 },
    #[error("incomplete irrep list: {0}")]
    IncompleteIrrepList(String),
    #[error("representations belong to different groups")]
    GroupMismatch,
    #[error("bad vertex partition: {0}")]
    BadVertexPartition(String),
    #[error("A + iB is numerically singular")]
    SingularAiB,
    #[error("A + ikB is numerically singular at k = {k}")]
    SingularAikB { k: f64 },
    #[error("edge {edge} is mapped to its own reversal; insert a dummy vertex at its midpoint")]
    ReversalEdge { edge: String },
    #[error("edge {edge} is mapped onto the reversal of edge {target}; reorient the edges so the action preserves directions")]
    ReversedImage { edge: String, target: String },
    #[error("edge {edge} has nonzero potential; the scattering path supports zero potential only")]
    PotentialUnsupported { edge: String },
    #[error("grid too coarse near k = {k}: an eigenphase branch advanced too far between grid points")]
    GridTooCoarse { k: f64 },
    #[error("induction condition not met; spectra reported but not certified")]
    ConditionNotMet(Box<IsospectralReport>),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("input error: {0}")]
    Input(String),
}

use thiserror::Error;

use crate::bloch::{BlochVector, Gauge, MomentumPoint};

pub type Result<T> = std::result::Result<T, Error>;

/// A grid node at which a gauge-fixed eigenstate cannot be formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularNode {
    pub ix: usize,
    pub iy: usize,
    pub k: MomentumPoint,
    pub r: BlochVector,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("gauge {gauge} is ill-defined at {} node(s), first at k = {} with R = {}",
        nodes.len(), nodes[0].k, nodes[0].r)]
    GaugeSingularity {
        gauge: Gauge,
        nodes: Vec<SingularNode>,
    },

    #[error("m = {m} is critical (gap closes at m = 0, ±2); the Chern number is undefined")]
    CriticalMass { m: f64 },

    #[error("band gap closes at k = {k} for m = {m}")]
    GapClosed { m: f64, k: MomentumPoint },

    #[error("singular field at node ({ix}, {iy}): adjacent overlap modulus {overlap:.3e}; refine the grid or move away from the vortex core")]
    SingularField { ix: usize, iy: usize, overlap: f64 },

    #[error("singular plaquette at node ({ix}, {iy}): link product modulus {modulus:.3e}")]
    SingularPlaquette { ix: usize, iy: usize, modulus: f64 },

    #[error("transition phase undefined on loop sample ({ix}, {iy}); change the loop radius")]
    UndefinedPhaseOnLoop { ix: usize, iy: usize },

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("only {flips} vorticity flip(s) found, at least 3 are needed; raise t_max")]
    InsufficientCycles { flips: usize },

    #[error("ambiguous quench-mass branch: candidates {0} and {1}; supply a branch hint or a second probe")]
    AmbiguousBranch(f64, f64),

    #[error("vorticity flip at t = {t} has no Loschmidt sign change within {window}")]
    UnmatchedFlip { t: f64, window: f64 },

    #[error("series mismatch: {0}")]
    MismatchedSeries(String),

    #[error("probe {0} is not supported here; use (π,π) or (0,0)")]
    UnsupportedProbe(MomentumPoint),

    #[error("at t = {t}: {source}")]
    AtTime { t: f64, source: Box<Error> },
}

impl Error {
    /// Strips any `AtTime` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            other => other,
        }
    }
}

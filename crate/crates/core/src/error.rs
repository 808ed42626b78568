use std::io;

use thiserror::Error;

/// Errors raised by the geometry oracles, the chain and the diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed caller input: wrong dimension, out-of-range parameter, bad schema.
    #[error("invalid input: {0}")]
    Input(String),
    /// A point that should lie on the boundary does not.
    #[error("point not on boundary: {0}")]
    Domain(String),
    /// A chord direction that does not point strictly into the body.
    #[error("direction not inward: {0}")]
    Direction(String),
    /// The body oracle produced an inconsistent answer (no root, chord longer than D).
    #[error("geometry failure: {0}")]
    Geometry(String),
    /// Kernel evaluated at coincident points.
    #[error("kernel singular at coincident points")]
    Singularity,
    /// Iterative numerics failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Self::Geometry(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Self::Numeric(msg.into())
    }
}

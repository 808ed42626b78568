//! Stochastic billiard sampling on the boundary of curvature-bounded convex
//! bodies.
//!
//! From a boundary point `x` the chain draws a direction from the cosine law
//! about the inward normal `n_x` and moves to the other end of the chord. The
//! uniform surface measure is stationary. Besides the chain itself the crate
//! provides the one-step kernel, an arclength discretization of planar
//! kernels with spectral and conductance analysis, and Monte Carlo
//! diagnostics for step sizes, local overlap and mixing.

pub mod chain;
pub mod cli;
pub mod curve2d;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod sampler;
pub mod spectral2d;

pub use chain::{kernel_density, Chain, ChainConfig, ChainState, KernelNormalization, StepRecord};
pub use error::{Error, Result};
pub use geometry::{BodySpec, BoundaryPoint, ConvexBody, Point};
pub use sampler::{DirectionLaw, RngStream};

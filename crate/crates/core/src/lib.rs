//! Explicit radial solutions of the widely degenerate p-Laplacian on a ball,
//! with rearrangement, verification and regularity tooling.

pub mod cli;
pub mod error;
pub mod numerics;
pub mod profile;
pub mod rearrangement;
pub mod solver;
pub mod regularity;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::{QuadratureConfig, ProbeConfig, Finiteness, DivergenceVerdict};
pub use profile::{BallDomain, RadialDatum};
pub use rearrangement::{LorentzNorm, Rearrangement};
pub use solver::{RadialSolution, SolverParams, Hessian};

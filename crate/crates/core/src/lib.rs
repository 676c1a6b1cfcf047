//! Simulation and circuit synthesis for linear open quantum walks.
//!
//! * [`walk`]: walk specifications, exact block-diagonal evolution and the
//!   linear-chain model.
//! * [`analysis`]: the chain's classical Markov predictions (steady state,
//!   success probability, drift-diffusion profile, step estimates).
//! * [`channels`]: dephasing, depolarizing and random-unitary channels
//!   realized as walks with post-selection on the last node.
//! * [`dilation`]: Stinespring, Sz.-Nagy and locality-based unitary
//!   dilations plus dimension and cost accounting.
//! * [`circuit`]: the gate-level construction of the locality dilation, a
//!   density-matrix simulator for it and a CNOT/depth cost model.

pub mod analysis;
pub mod channels;
pub mod circuit;
pub mod dilation;
pub mod error;
pub mod io;
pub mod matrixkit;
pub mod random;
pub mod walk;

pub use error::{OqwError, Result};
pub use matrixkit::{ComplexMatrix, C64};
pub use walk::{DiagonalState, LinearChainSpec, OqwSpec};

/// Default tolerance for end-to-end equivalence checks.
pub const DEFAULT_TOL: f64 = 1e-10;

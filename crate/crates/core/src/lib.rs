//! Computational laboratory for the drifted Majda-Biello system
//!
//! ```text
//! u_t + u_xxx + v v_x = 0
//! v_t + α v_xxx + β_σ v_x + (u v)_x = 0        on [0, 2πσ)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`exact`] and [`quad`] hold the rational and quadratic-surd arithmetic
//!   every exact decision is routed through.
//! * [`diophantine`] estimates biased type indices and decides the critical index.
//! * [`resonance`] evaluates, factors, bounds and counts the resonance function.
//! * [`picard`] computes the first three Picard iterates in closed form and builds
//!   the ill-posedness witness families.
//! * [`solver`] is a Lawson-RK4 pseudospectral integrator on the σ-torus.
//! * [`harness`] is the CLI layer: configuration, dispatch, output files.

pub mod diophantine;
pub mod error;
pub mod exact;
pub mod fit;
pub mod harness;
pub mod par;
pub mod picard;
pub mod quad;
pub mod resonance;
pub mod solver;

pub use error::{Error, Result};

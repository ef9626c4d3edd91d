//! Certified asymptotic key rates for phase-shift-keyed continuous-variable QKD
//! with postselection.
//!
//! The pipeline builds the truncated Fock-space observables and key-map region
//! operators, simulates a phase-invariant Gaussian channel to obtain the
//! constraint set, minimizes the perturbed relative-entropy objective with a
//! Frank-Wolfe method and converts the result into a certified lower bound by
//! a dual step. A loss-only analytical model serves as an independent check.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod keyrate;
pub mod numerics;
pub mod operators;
pub mod protocol;
pub mod sdp;

pub use error::{Error, Result};
pub use faer::c64;

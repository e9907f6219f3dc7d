//! Simulation of memory error profiling under single-error-correcting
//! on-die ECC.
//!
//! [`codec`] models the on-die code, [`error_model`] the cells that fail,
//! [`oracle`] the exact set of bits each word can get wrong, [`profilers`]
//! the strategies that try to find them, and [`experiments`] the Monte-Carlo
//! drivers that compare them.

pub mod cli;
pub mod codec;
pub mod error_model;
pub mod experiments;
pub mod gf2;
pub mod oracle;
mod par;
pub mod profilers;
pub mod rng;

pub use par::Execution;

//! Simulation and deterministic numerics for the maximal displacement `M` of
//! critical branching processes with α-stable offspring tails.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; randomness always arrives as an explicit
//! [`rand::RngCore`] argument or through a per-tree stream from [`rng`].
//! Threading, configuration and file formats live in the `branchmax` crate.

#![no_std]

extern crate alloc;

mod error;

pub mod engine;
pub mod estimator;
pub mod motion;
pub mod offspring;
pub mod rng;
pub mod special;
pub mod theory;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

//! Simulation of McKean–Vlasov jump-diffusions and their interacting
//! particle approximations.
//!
//! The crate covers the `N`-particle system with simultaneous mean-field
//! jumps, the limit equation solved by Picard iteration on measure flows,
//! exact one-dimensional Wasserstein distances, closed-form a priori bounds,
//! and experiments measuring propagation of chaos.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod measure;
pub mod model;
pub mod noise;
pub mod picard;

pub use error::{Error, Result};

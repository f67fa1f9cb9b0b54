//! Periodic triangulated-surface area minimizer for double bubbles in flat
//! three-tori.

pub mod analysis;
pub mod candidates;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod mesh;
pub mod metrics;
pub mod phase;
pub mod relax;

pub use error::{Error, Result};

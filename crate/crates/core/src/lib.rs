//! Regret lower bounds for deterministic MDPs whose simple cycles are
//! edge-disjoint, closed forms for line-search and state-dependent-reward
//! instances, and a seeded simulator that measures learners against the
//! bound.

pub mod bound;
pub mod cli;
pub mod cycles;
pub mod dmdp;
pub mod error;
pub mod generate;
pub mod problem;
pub mod report;
pub mod reward;
pub mod sim;

pub use error::{Error, Result};

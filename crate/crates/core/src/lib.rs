//! Invariants of quasi-ordinary surface branches.

pub mod branch;
pub mod classify;
pub mod cli;
pub mod lattice;
pub mod reduce;
pub mod semigroup;
pub mod series;
pub mod zariski;

//! Zero-temperature random-field Ising laboratory.

pub mod bounds;
pub mod coarsegrain;
pub mod disagreement;
pub mod lattice;
pub mod rfim;
pub mod rng;
pub mod stats;
pub mod tortuosity;

//! Core machinery for susceptible-infected spreading on communication
//! networks: role-labeled static graphs, temporal event logs, topology
//! generators, inter-event-time laws and the spreading engine itself.
//!
//! No IO and no global state; everything is deterministic given explicit
//! seeds. The crate is `no_std` + `alloc` so the simulation kernel can be
//! embedded anywhere; file formats and the CLI live in the companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod events;
pub mod gen;
pub mod graph;
pub mod iet;
pub mod rng;
pub mod si;

pub use events::{Event, EventLog, IetStats, Pooling};
pub use gen::ModelSpec;
pub use graph::{ComponentLabeling, NodeId, NodeRole, RoleGraph};
pub use iet::IetDistribution;
pub use si::{CurveEnsemble, SpreadMode, SpreadRun};

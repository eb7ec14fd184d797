//! Hierarchical planning for multi-robot disassembly of structurally
//! constrained assemblies.
//!
//! The pipeline runs top-down:
//!
//! 1. [`sequence`] picks a removal order with a many-objective GA seeded by
//!    the contact–connection–constraint initializer in [`ccc`].
//! 2. [`task`] assigns each removal to one of two arms.
//! 3. [`motion`] turns the plan into durations, tool changes and rotary-stage
//!    reorientations.
//! 4. [`schedule`] computes makespan-minimal start times over the five
//!    execution resources.
//!
//! [`pipeline`] wires the layers together and writes the artifacts.

#![allow(clippy::needless_range_loop)]

pub mod ccc;
pub mod fixtures;
pub mod model;
pub mod moga;
pub mod motion;
pub mod par;
pub mod pipeline;
pub mod schedule;
pub mod sequence;
pub mod task;

pub use model::{Arm, AssemblyModel, Direction, PartId, PartKind, TaskKind, Tool};
pub use par::Execution;

//! Norm-regulated multi-agent simulation.
//!
//! Normative systems are represented algebraically: grounds are move-conditions
//! ordered by implication, consequences are Boolean combinations of the seven
//! one-agent normative positions, and a norm joins one to the other. From the
//! elementary norms the engine derives, for every situation, the set of
//! prohibited actions; agents then pick the best permissible action and the
//! system advances deterministically.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, traces on disk
//! and the command-line driver live in the companion `dalmas` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod bits;
pub mod bqo;
pub mod condition;
pub mod engine;
mod error;
pub mod normative;
pub mod positions;
pub mod prohibition;
pub mod text;
pub mod waste;

pub use condition::{AgentId, Condition, Denotation, Interpretation, ProbeUniverse};
pub use engine::{DeterministicDalmas, Situation, Trace, World};
pub use error::Error;
pub use normative::{GcSystem, Norm};
pub use positions::{Consequence, MoveTerm, Position, TypedAtom, Vocabulary};
pub use prohibition::{DeonticVerdict, ElimOp, ProhibitionOptions, Quantification};

pub type Result<T, E = Error> = core::result::Result<T, E>;

//! Scenario files, JSONL traces and the command-line driver for `dalmas-core`.

pub mod cli;
mod error;
pub mod scenario;
pub mod trace;

pub use error::{Error, Result};

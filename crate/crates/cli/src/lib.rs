//! Library surface behind the `wglasso` binary: the benchmark harness,
//! graph export, matrix CSV I/O, and the subcommand implementations.

pub mod commands;
pub mod graph;
pub mod harness;
pub mod matio;

pub use harness::{BenchSpec, MethodKind, ModelChoice, RhoPolicy};

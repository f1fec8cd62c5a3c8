//! Support library for the `prwcs` command-line tool: run specifications,
//! scan drivers, fringe fitting and output writers.
//!
//! The binary in `main.rs` only parses arguments and dispatches here, so the
//! integration tests can drive the same code paths directly.

pub mod config;
pub mod emit;
pub mod fit;
pub mod scan;

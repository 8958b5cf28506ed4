//! Benchmark harness and file tooling around the solver core: a
//! line-oriented text format for multi-patch domains, experiment sweeps
//! with CSV/markdown output, and the oracle cross-check.

pub mod bench;
pub mod domfile;

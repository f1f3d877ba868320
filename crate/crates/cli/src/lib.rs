//! Experiment harness: configuration files, runners and report formatting
//! behind the `renyi-extract` binary.

pub mod config;
pub mod report;
pub mod runners;

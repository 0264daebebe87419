//! Command-line and HTTP front ends for `umbra-core`.

pub mod artifacts;
pub mod cli;
pub mod service;

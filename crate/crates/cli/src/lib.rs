//! Command implementations for the `discrepancy` binary.

pub mod commands;
pub mod family;
pub mod report;
pub mod suites;
pub mod svg;
pub mod sweep;

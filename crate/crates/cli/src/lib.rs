//! Config parsing and field export for the receiver solver front end.
//!
//! Lives in a library so the integration tests can drive the binary and
//! then re-read its artifacts with the same readers the format contract
//! is defined by.

pub mod config;
pub mod export;

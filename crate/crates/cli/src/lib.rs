//! Configuration, serialization formats, the named-map registry and the
//! command runners behind the `bottdeg` binary.

pub mod config;
pub mod formats;
pub mod registry;
pub mod runner;

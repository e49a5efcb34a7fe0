//! Standard-library side of geoproof: configuration, the JSON-lines
//! session server, the synthesis cache and the command-line commands.

pub mod cache;
pub mod cli;
pub mod config;
pub mod protocol;

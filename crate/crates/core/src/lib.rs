//! Deductive geometry engine with an interactive proof-session protocol,
//! difficulty-controlled problem synthesis and a complexity-boosting
//! curriculum scheduler.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the
//! JSON-lines protocol and the command-line tool live in the `geoproof`
//! companion crate.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod algebra;
pub mod curriculum;
pub mod deduct;
pub mod diagram;
pub mod dsl;
pub mod engine;
pub mod memory;
pub mod synth;

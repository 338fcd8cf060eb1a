//! The README and the chapters of the guide in `book/src`, one module each,
//! so that `cargo test --doc` runs their code blocks.

#[doc = include_str!("../../../README.md")]
pub mod readme {}
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/bloch.md")]
pub mod bloch {}
#[doc = include_str!("../../../book/src/polyhedra.md")]
pub mod polyhedra {}
#[doc = include_str!("../../../book/src/certification.md")]
pub mod certification {}
#[doc = include_str!("../../../book/src/exploration.md")]
pub mod exploration {}
#[doc = include_str!("../../../book/src/witnesses.md")]
pub mod witnesses {}
#[doc = include_str!("../../../book/src/incompatibility.md")]
pub mod incompatibility {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/config.md")]
pub mod config {}

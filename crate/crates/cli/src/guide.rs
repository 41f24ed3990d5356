//! The user guide, one module per chapter of `book/`.
//!
//! mdBook cannot run Rust snippets as tests, so the chapters are also
//! included here as rustdoc pages: `cargo test --doc` compiles and runs
//! every fenced example, keeping the book in lockstep with the API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/shell-model.md")]
pub mod shell_model {}

#[doc = include_str!("../../../book/src/qubit-mapping.md")]
pub mod qubit_mapping {}

#[doc = include_str!("../../../book/src/simulator.md")]
pub mod simulator {}

#[doc = include_str!("../../../book/src/shadows.md")]
pub mod shadows {}

#[doc = include_str!("../../../book/src/qsd.md")]
pub mod qsd {}

#[doc = include_str!("../../../book/src/fngfmc.md")]
pub mod fngfmc {}

#[doc = include_str!("../../../book/src/oracles.md")]
pub mod oracles {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

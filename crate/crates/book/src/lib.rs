//! Runs every code block in the guide as a doctest.
//!
//! mdbook cannot execute snippets against this workspace's crates, so each
//! chapter is included here as a module doc comment and `cargo test --doc`
//! does the work. One module per chapter keeps test failures attributable
//! to the right file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/series.md")]
pub mod series {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/calibration.md")]
pub mod calibration {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[doc = include_str!("../../../book/src/data_and_cli.md")]
pub mod data_and_cli {}

#[doc = include_str!("../../../book/src/reproduction.md")]
pub mod reproduction {}

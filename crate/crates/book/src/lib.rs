//! The chapters of the guide in `book/src`, included here so that their
//! Rust listings run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/format.md")]
pub mod format {}

#[doc = include_str!("../../../book/src/qualitative.md")]
pub mod qualitative {}

#[doc = include_str!("../../../book/src/quantitative.md")]
pub mod quantitative {}

#[doc = include_str!("../../../book/src/oracles.md")]
pub mod oracles {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

//! Hybrid component fault trees.
//!
//! Components of a system carry either a component fault tree (basic events
//! and AND/OR gates) or a component Markov chain (states, rated transitions,
//! error states). Failure modes flow between components through ports. This
//! crate parses and validates such models, derives minimal cut sets of any
//! output failure mode, and computes failure rates and MTBF by combining
//! Markov-chain numerics with fault-tree rate arithmetic.
//!
//! Modules:
//! - [`model`]: domain types and validation.
//! - [`format`]: the `.ghcft` text format.
//! - [`qualitative`]: chain-to-tree transformation, flattening, cut sets.
//! - [`quantitative`]: generators, hitting times, stationary frequencies,
//!   transient integration, and system-level rate evaluation.
//! - [`oracle`]: Monte-Carlo and brute-force cross-checks.
//! - [`report`]: text tables and serializable reports.

pub mod format;
pub mod model;
pub mod oracle;
pub mod qualitative;
pub mod quantitative;
pub mod reference;
pub mod report;

//! The mdbook chapters under `book/` double as documentation tests: each
//! chapter is attached to a module here, so `cargo test --doc` compiles
//! and runs every fenced Rust snippet in the guide.

#![cfg(doctest)]

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/deterioration-model.md")]
pub mod deterioration_model {}

#[doc = include_str!("../../../book/src/gaussian-beliefs.md")]
pub mod gaussian_beliefs {}

#[doc = include_str!("../../../book/src/value-iteration.md")]
pub mod value_iteration {}

#[doc = include_str!("../../../book/src/tree-search.md")]
pub mod tree_search {}

#[doc = include_str!("../../../book/src/q-network.md")]
pub mod q_network {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

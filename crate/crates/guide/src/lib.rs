//! The chapters of `book/`, one module each. `cargo test -p scldpc-guide`
//! runs every example in the book.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/ensemble.md")]
pub mod ensemble {}

#[doc = include_str!("../../../book/src/peeling.md")]
pub mod peeling {}

#[doc = include_str!("../../../book/src/window.md")]
pub mod window {}

#[doc = include_str!("../../../book/src/evolution.md")]
pub mod evolution {}

#[doc = include_str!("../../../book/src/scaling.md")]
pub mod scaling {}

#[doc = include_str!("../../../book/src/montecarlo.md")]
pub mod montecarlo {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

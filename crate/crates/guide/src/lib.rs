//! The guide under `book/`, compiled so that `cargo test` runs every snippet.
//! One module per chapter keeps failures traceable to their chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/chaos.md")]
pub mod chaos {}

#[doc = include_str!("../../../book/src/malliavin.md")]
pub mod malliavin {}

#[doc = include_str!("../../../book/src/tensor.md")]
pub mod tensor {}

#[doc = include_str!("../../../book/src/girsanov.md")]
pub mod girsanov {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}

//! mdbook has no way to build snippets against a local crate, so every
//! chapter is pulled in here as a doc comment and `cargo test` runs the code
//! blocks as doctests. One module per chapter so failures point somewhere.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/instances.md")]
pub mod instances {}
#[doc = include_str!("src/poise.md")]
pub mod poise {}
#[doc = include_str!("src/coverage.md")]
pub mod coverage {}
#[doc = include_str!("src/directed.md")]
pub mod directed {}
#[doc = include_str!("src/undirected.md")]
pub mod undirected {}
#[doc = include_str!("src/schedules.md")]
pub mod schedules {}
#[doc = include_str!("src/command-line.md")]
pub mod command_line {}

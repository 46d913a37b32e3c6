pub mod cli;
pub mod cover;
pub mod directed;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod schedule;
pub mod undirected;

pub use error::{Error, Result};

//! Corpus files, model book files, export formats, the `rampforge` command
//! line and the HTTP service, on top of [`rampforge_core`].

pub mod book;
pub mod cli;
pub mod corpus;
pub mod export;
pub mod server;
pub mod state;
pub mod train;

pub use rampforge_core as core;

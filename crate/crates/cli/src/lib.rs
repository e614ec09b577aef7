//! IO, file formats and the command-line front end for the SI spreading
//! toolkit; the algorithms live in `sispread-core`.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod graphio;
pub mod ingest;

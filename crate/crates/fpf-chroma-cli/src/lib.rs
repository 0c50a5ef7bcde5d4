//! Library surface of the CLI: configuration loading, command
//! implementations, report formats, and SVG rendering. The binary in
//! `main.rs` is a thin clap wrapper over [`commands`].

pub mod commands;
pub mod config;
pub mod reports;
pub mod svg;

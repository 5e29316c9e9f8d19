//! Library side of the `cheshire` command-line tool.

pub mod commands;
pub mod config;
pub mod tables;

//! Library surface of the despeckling CLI: phantom scenes, run and suite
//! configuration, benchmark orchestration, and the subcommand bodies.

pub mod bench;
pub mod commands;
pub mod config;
pub mod phantom;
pub mod report;

//! Command-line front end for `qstat`: CSV ingestion and subcommands.

pub mod app;
pub mod data;

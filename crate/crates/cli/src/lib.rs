//! Batch driver for the embedding/VQE experiments: configuration, commands
//! and artifact output.

pub mod commands;
pub mod config;
pub mod output;

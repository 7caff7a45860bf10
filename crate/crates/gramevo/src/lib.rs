//! Std companion to `gramevo-core`: grammar and dataset files, run
//! configuration, CSV reports, rayon-backed fitness evaluation and the
//! `gramevo` command line.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;

pub use error::Error;
pub use gramevo_core as engine;

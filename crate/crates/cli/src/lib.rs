//! Experiment harness and file formats around `doa-core`: configuration
//! ingestion, Monte-Carlo orchestration and CSV/metadata reports. The `doa`
//! binary is a thin shell over this library.

pub mod config;
pub mod formats;
pub mod harness;
pub mod selftest;

//! Ingestion, file formats, evaluation harness and HTTP service around the
//! `ars-core` recommender.

pub mod bench;
pub mod cli;
pub mod config;
pub mod edge_list;
mod error;
pub mod eval;
pub mod ingest;
pub mod service;

pub use error::{Error, Result};

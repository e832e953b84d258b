//! File formats, configuration, regression fixtures and the curation
//! service around [`semgest_core`].

pub mod config;
pub mod error;
pub mod fixtures;
pub mod formats;
pub mod server;

pub use config::{Config, Overrides};
pub use error::{Error, Result};
pub use semgest_core as core;

//! Station-data ingestion, parallel batch drivers, artifact IO and the
//! `geofeat` command line, built on [`geofeat_core`].

pub mod batch;
pub mod cli;
pub mod config;
pub mod error;
pub mod ingest;
pub mod io;

pub use geofeat_core as core;

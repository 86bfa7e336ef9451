//! Scale-free feature extraction for seasonal (monthly) geophysical time
//! series, plus the analysis machinery built on top of the features:
//! auto-scaled PCA, correlograms with significance tests, random forests,
//! unsupervised forest clustering and forest-based spatial interpolation.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parsers,
//! parallel batch drivers and the command-line front end live in the
//! `geofeat` companion crate.
//!
//! ```
//! use geofeat_core::{extract_all, TimeSeries, YearMonth, FEATURE_NAMES};
//!
//! let values: Vec<f64> = (0..480)
//!     .map(|t| (2.0 * core::f64::consts::PI * (t + 1) as f64 / 12.0).sin() + 0.01 * ((t * 7919) % 13) as f64)
//!     .collect();
//! let ts = TimeSeries::new("demo", values, 12, YearMonth::new(1980, 1).unwrap()).unwrap();
//! let fv = extract_all(&ts, 42);
//! assert_eq!(fv.values().len(), FEATURE_NAMES.len());
//! ```
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod ar;
pub mod cluster;
pub mod decomposition;
pub mod extractor;
pub mod features;
pub mod forest;
pub mod linalg;
pub mod optim;
pub mod rng;
pub mod series;
pub mod special;
pub mod statlearn;
pub mod stats;

mod error;

pub use error::{AnalysisError, FeatureError, SeriesError};
pub use extractor::{
    extract_all, extract_all_with, impute_missing, ExtractionParams, FeatureMatrix, FeatureVector, FEATURE_NAMES,
    N_FEATURES,
};
pub use series::{TimeSeries, YearMonth};

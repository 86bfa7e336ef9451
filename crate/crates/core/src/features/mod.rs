//! The feature families. Every function takes the raw values and returns
//! plain scalars; [`crate::extractor`] assembles them into the fixed
//! 59-entry vector.

pub mod correlation;
pub mod distribution;
pub mod model;
pub mod stl;
pub mod window;

use crate::error::FeatureError;

/// A single feature value or the reason it is missing.
pub type Feature = Result<f64, FeatureError>;

pub(crate) fn finite(v: f64) -> Feature {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FeatureError::Undefined)
    }
}

pub(crate) fn sum_sq_first(acf: &[f64], k: usize, len: usize) -> Feature {
    if acf.len() < k {
        return Err(FeatureError::LagTooLarge { lag: k, len });
    }
    Ok(acf[..k].iter().map(|r| r * r).sum())
}

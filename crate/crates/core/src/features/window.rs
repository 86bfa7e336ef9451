//! Tiled- and sliding-window features.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::FeatureError;
use crate::series::zscore;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiledStats {
    pub lumpiness: f64,
    pub stability: f64,
}

/// Variance of the per-tile variances and of the per-tile means over
/// non-overlapping tiles of `width` points; the ragged tail is dropped.
pub fn tiled_stats(x: &[f64], width: usize) -> Result<TiledStats, FeatureError> {
    if width < 2 || x.len() < 2 * width {
        return Err(FeatureError::TooShort { len: x.len(), needed: 2 * width.max(2) });
    }
    let z = zscore(x)?;
    let (means, vars): (Vec<f64>, Vec<f64>) = z.chunks_exact(width).map(|c| (stats::mean(c), stats::var(c))).unzip();
    Ok(TiledStats { lumpiness: stats::var(&vars), stability: stats::var(&means) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftFeatures {
    pub max_level_shift: f64,
    pub time_level_shift: usize,
    pub max_var_shift: f64,
    pub time_var_shift: usize,
    pub max_kl_shift: f64,
    pub time_kl_shift: usize,
}

pub const KL_EPSILON: f64 = 1e-8;

/// Closed-form `KL(N(m1, v1) || N(m2, v2))`.
pub fn gaussian_kl(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    0.5 * ((v2 / v1).ln() + (v1 + (m1 - m2) * (m1 - m2)) / v2 - 1.0)
}

/// Window statistics `(mean, sample variance)` of `z[start..start + width]`.
fn window_moments(z: &[f64], start: usize, width: usize) -> (f64, f64) {
    let w = &z[start..start + width];
    (stats::mean(w), stats::var(w))
}

/// Largest change between the adjacent windows `[t - w + 1, t]` and
/// `[t + 1, t + w]` (1-based) for `t` in `w..=n - w`. Times are the 1-based
/// offset `t` of the first maximum.
pub fn shift_suite(x: &[f64], width: usize) -> Result<ShiftFeatures, FeatureError> {
    let n = x.len();
    if width < 2 || n < 2 * width + 1 {
        return Err(FeatureError::TooShort { len: n, needed: 2 * width.max(2) + 1 });
    }
    let z = zscore(x)?;
    let mut out = ShiftFeatures {
        max_level_shift: -1.0,
        time_level_shift: width,
        max_var_shift: -1.0,
        time_var_shift: width,
        max_kl_shift: -1.0,
        time_kl_shift: width,
    };
    for t in width..=n - width {
        let (ma, va) = window_moments(&z, t - width, width);
        let (mb, vb) = window_moments(&z, t, width);
        let level = (mb - ma).abs();
        let var = (vb - va).abs();
        let kl = gaussian_kl(ma, va + KL_EPSILON, mb, vb + KL_EPSILON);
        if level > out.max_level_shift {
            out.max_level_shift = level;
            out.time_level_shift = t;
        }
        if var > out.max_var_shift {
            out.max_var_shift = var;
            out.time_var_shift = t;
        }
        if kl > out.max_kl_shift {
            out.max_kl_shift = kl;
            out.time_kl_shift = t;
        }
    }
    Ok(out)
}

//! Features of an STL decomposition: trend and seasonal strength, spike,
//! trend shape, remainder autocorrelation and seasonal peak/trough.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{sum_sq_first, Feature};
use crate::decomposition::{stl, Decomposition, StlOptions};
use crate::error::FeatureError;
use crate::series::sample_acf;
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct StlFeatures {
    pub trend: Feature,
    pub spike: Feature,
    pub linearity: Feature,
    pub curvature: Feature,
    pub e_acf1: Feature,
    pub e_acf10: Feature,
    pub seasonal_strength: Feature,
    pub peak: Feature,
    pub trough: Feature,
}

impl StlFeatures {
    fn missing(e: FeatureError) -> Self {
        Self {
            trend: Err(e),
            spike: Err(e),
            linearity: Err(e),
            curvature: Err(e),
            e_acf1: Err(e),
            e_acf10: Err(e),
            seasonal_strength: Err(e),
            peak: Err(e),
            trough: Err(e),
        }
    }
}

/// `clamp(1 - var(r) / var(r + component), 0, 1)`.
pub fn strength(remainder: &[f64], component: &[f64]) -> Feature {
    let combined: Vec<f64> = remainder.iter().zip(component).map(|(r, c)| r + c).collect();
    let denom = stats::var(&combined);
    if !(denom > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    Ok((1.0 - stats::var(remainder) / denom).clamp(0.0, 1.0))
}

/// Variance of the `n` leave-one-out sample variances.
pub fn spike(r: &[f64]) -> Feature {
    let n = r.len();
    if n < 4 {
        return Err(FeatureError::TooShort { len: n, needed: 4 });
    }
    let nf = n as f64;
    let m = stats::mean(r);
    let ss: f64 = r.iter().map(|v| (v - m) * (v - m)).sum();
    // Removing x_i lowers the sum of squares by n/(n-1) (x_i - m)^2.
    let loo: Vec<f64> = r.iter().map(|v| (ss - nf / (nf - 1.0) * (v - m) * (v - m)) / (nf - 2.0)).collect();
    Ok(stats::var(&loo))
}

/// Orthonormal basis of `{1, t, t^2}` on `t = 1..=n` by Gram-Schmidt.
pub fn orthonormal_quadratic(n: usize) -> [Vec<f64>; 3] {
    let raw: [Vec<f64>; 3] =
        [vec![1.0; n], (1..=n).map(|t| t as f64).collect(), (1..=n).map(|t| (t * t) as f64).collect()];
    let mut basis: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for k in 0..3 {
        let mut v = raw[k].clone();
        // Two passes keep the basis orthogonal to rounding.
        for _ in 0..2 {
            for b in basis.iter().take(k) {
                let proj: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                v.iter_mut().zip(b).for_each(|(a, c)| *a -= proj * c);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis[k] = v;
    }
    basis
}

/// Coefficients of the degree-1 and degree-2 orthonormal regressors.
pub fn trend_shape(trend: &[f64]) -> Result<(f64, f64), FeatureError> {
    if trend.len() < 3 {
        return Err(FeatureError::TooShort { len: trend.len(), needed: 3 });
    }
    let basis = orthonormal_quadratic(trend.len());
    let dot = |b: &[f64]| trend.iter().zip(b).map(|(a, c)| a * c).sum::<f64>();
    Ok((dot(&basis[1]), dot(&basis[2])))
}

/// 1-based cycle positions of the largest and smallest mean seasonal value.
pub fn peak_trough(seasonal: &[f64], period: usize) -> (usize, usize) {
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (i, s) in seasonal.iter().enumerate() {
        sums[i % period] += s;
        counts[i % period] += 1;
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c.max(1) as f64).collect();
    let mut peak = 0;
    let mut trough = 0;
    for (i, &m) in means.iter().enumerate() {
        if m > means[peak] {
            peak = i;
        }
        if m < means[trough] {
            trough = i;
        }
    }
    (peak + 1, trough + 1)
}

pub fn features_from_decomposition(dec: &Decomposition, period: usize) -> StlFeatures {
    let r = &dec.remainder;
    let acf = sample_acf(r, 10.min(r.len() - 1));
    let shape = trend_shape(&dec.trend);
    let (peak, trough) = peak_trough(&dec.seasonal, period);
    StlFeatures {
        trend: strength(r, &dec.trend),
        spike: spike(r),
        linearity: shape.map(|s| s.0),
        curvature: shape.map(|s| s.1),
        e_acf1: acf.as_ref().map(|a| a[0]).map_err(|e| *e),
        e_acf10: acf.as_ref().map_err(|e| *e).and_then(|a| sum_sq_first(a, 10, r.len())),
        seasonal_strength: strength(r, &dec.seasonal),
        peak: Ok(peak as f64),
        trough: Ok(trough as f64),
    }
}

pub fn stl_feature_suite(x: &[f64], opts: &StlOptions) -> StlFeatures {
    match stl(x, opts) {
        Ok(dec) => features_from_decomposition(&dec, opts.period),
        Err(_) => StlFeatures::missing(FeatureError::Decomposition),
    }
}

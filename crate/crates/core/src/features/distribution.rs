//! Distributional and complexity features: sample entropy, derivative
//! spread, histogram mode, outlier inclusion, fluctuation analysis, median
//! crossings, spectral entropy and flat spots.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{finite, Feature};
use crate::ar::fit_yule_walker_aic;
use crate::error::FeatureError;
use crate::series::zscore;
use crate::stats;

/// Standard deviation of the first differences of the z-scored series.
pub fn std1st_der(x: &[f64]) -> Feature {
    if x.len() < 3 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 3 });
    }
    let z = zscore(x)?;
    let d: Vec<f64> = z.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(stats::sd(&d))
}

/// Index of the equal-width bin (out of `bins`) over `[lo, hi]`.
fn bin_of(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let b = ((v - lo) / (hi - lo) * bins as f64).floor();
    (b.max(0.0) as usize).min(bins - 1)
}

/// Centre of the most populated of 10 equal-width bins of the z-scored
/// series; ties go to the lowest bin.
pub fn histogram_mode_10(x: &[f64]) -> Feature {
    let z = zscore(x)?;
    let (lo, hi) = stats::min_max(&z);
    let mut counts = [0usize; 10];
    for &v in &z {
        counts[bin_of(v, lo, hi, 10)] += 1;
    }
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    let width = (hi - lo) / 10.0;
    Ok(lo + width * (best as f64 + 0.5))
}

/// Median of the normalized median time index of the points with
/// `|z| >= threshold`, as the threshold sweeps from 0 to `max |z|` in steps
/// of 0.01.
pub fn outlierinclude_mdrmd(x: &[f64]) -> Feature {
    let z = zscore(x)?;
    let n = z.len() as f64;
    let max_dev = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut medians = Vec::new();
    let mut idx: Vec<usize> = Vec::with_capacity(z.len());
    let mut j = 0usize;
    loop {
        let threshold = 0.01 * j as f64;
        if threshold > max_dev {
            break;
        }
        idx.clear();
        idx.extend((0..z.len()).filter(|&t| z[t].abs() >= threshold).map(|t| t + 1));
        if idx.len() < 2 {
            break;
        }
        let k = idx.len();
        let med = if k % 2 == 1 { idx[k / 2] as f64 } else { 0.5 * (idx[k / 2 - 1] + idx[k / 2]) as f64 };
        medians.push(med / n - 0.5);
        j += 1;
    }
    if medians.is_empty() {
        return Err(FeatureError::Undefined);
    }
    Ok(stats::median(&medians))
}

/// Number of times the series crosses its median; values equal to the
/// median count as "above".
pub fn crossing_points(x: &[f64]) -> Feature {
    if x.len() < 2 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 2 });
    }
    let med = stats::median(x);
    let above: Vec<bool> = x.iter().map(|&v| v >= med).collect();
    Ok(above.windows(2).filter(|w| w[0] != w[1]).count() as f64)
}

/// Longest run of consecutive values falling in the same of ten
/// equal-width bins over `[min, max]`.
pub fn flat_spots(x: &[f64]) -> Feature {
    if x.is_empty() {
        return Err(FeatureError::TooShort { len: 0, needed: 1 });
    }
    let (lo, hi) = stats::min_max(x);
    let mut best = 1usize;
    let mut run = 1usize;
    let mut prev = bin_of(x[0], lo, hi, 10);
    for &v in &x[1..] {
        let b = bin_of(v, lo, hi, 10);
        if b == prev {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
            prev = b;
        }
    }
    Ok(best as f64)
}

/// Template-match counts for sample entropy: `b` pairs of length-`m`
/// templates and `a` pairs of length-`m + 1` templates within Chebyshev
/// distance `r`, over the first `n - m` templates, self-matches excluded.
pub fn sampen_counts(z: &[f64], m: usize, r: f64) -> (u64, u64) {
    let n = z.len();
    if n <= m + 1 {
        return (0, 0);
    }
    let templates = n - m;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..templates - 1 {
        'pairs: for j in i + 1..templates {
            for k in 0..m {
                if (z[i + k] - z[j + k]).abs() > r {
                    continue 'pairs;
                }
            }
            b += 1;
            if (z[i + m] - z[j + m]).abs() <= r {
                a += 1;
            }
        }
    }
    (a, b)
}

pub const SAMPEN_M: usize = 2;
pub const SAMPEN_R: f64 = 0.3;

/// Sample entropy with embedding 2 and tolerance 0.3 on the z-scored
/// series. When no length-3 template matches, the value is `ln(B (B - 1))`.
pub fn sampen_first(x: &[f64]) -> Feature {
    if x.len() < 20 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 20 });
    }
    let z = zscore(x)?;
    let (a, b) = sampen_counts(&z, SAMPEN_M, SAMPEN_R);
    if b == 0 {
        return Err(FeatureError::Undefined);
    }
    if a == 0 {
        return finite(((b * (b - 1)) as f64).ln());
    }
    Ok(-(a as f64 / b as f64).ln())
}

pub const SPECTRUM_POINTS: usize = 500;

/// Normalized Shannon entropy of the AR (Yule-Walker, AIC order) spectral
/// density on 500 frequencies in `(0, pi]`.
pub fn spectral_entropy(x: &[f64]) -> Feature {
    let z = zscore(x)?;
    let fit = fit_yule_walker_aic(&z, None)?;
    let density: Vec<f64> = (1..=SPECTRUM_POINTS)
        .map(|i| fit.spectral_density(core::f64::consts::PI * i as f64 / SPECTRUM_POINTS as f64))
        .collect();
    let total: f64 = density.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(FeatureError::FitFailure);
    }
    let h: f64 = density.iter().map(|d| d / total).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum();
    Ok((h / (SPECTRUM_POINTS as f64).ln()).clamp(0.0, 1.0))
}

/// Log-spaced integer scales from 5 to `n / 2`, deduplicated.
pub fn fluctuation_scales(n: usize) -> Vec<usize> {
    let lo = 5.0f64.ln();
    let hi = (n as f64 / 2.0).ln();
    let mut scales: Vec<usize> = (0..50).map(|i| (lo + (hi - lo) * i as f64 / 49.0).exp().round() as usize).collect();
    scales.dedup();
    scales
}

/// Root-mean-square of per-buffer residual ranges after a linear detrend of
/// the cumulative-sum profile, per scale.
pub fn fluctuation_function(z: &[f64], scales: &[usize]) -> Vec<f64> {
    let mut profile = Vec::with_capacity(z.len());
    let mut acc = 0.0;
    for v in z {
        acc += v;
        profile.push(acc);
    }
    scales
        .iter()
        .map(|&tau| {
            let buffers = profile.len() / tau;
            let xm = (tau as f64 - 1.0) / 2.0;
            let sxx: f64 = (0..tau).map(|i| (i as f64 - xm).powi(2)).sum();
            let mut sq = 0.0;
            for b in 0..buffers {
                let seg = &profile[b * tau..(b + 1) * tau];
                let ym = stats::mean(seg);
                let sxy: f64 = seg.iter().enumerate().map(|(i, y)| (i as f64 - xm) * (y - ym)).sum();
                let slope = sxy / sxx;
                let (lo, hi) = seg.iter().enumerate().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (i, y)| {
                    let r = y - ym - slope * (i as f64 - xm);
                    (lo.min(r), hi.max(r))
                });
                sq += (hi - lo).powi(2);
            }
            (sq / buffers as f64).sqrt()
        })
        .collect()
}

fn line_sse(x: &[f64], y: &[f64]) -> f64 {
    let xm = stats::mean(x);
    let ym = stats::mean(y);
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    x.iter().zip(y).map(|(a, b)| (b - ym - slope * (a - xm)).powi(2)).sum()
}

/// Split point of a two-segment linear fit to `(log tau, log F)`, as a
/// proportion of the number of scales. Each segment keeps at least three
/// scales.
pub fn fluctanal_prop_r1(x: &[f64]) -> Feature {
    if x.len() < 50 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 50 });
    }
    let z = zscore(x)?;
    let scales = fluctuation_scales(z.len());
    let f = fluctuation_function(&z, &scales);
    if f.iter().any(|&v| !(v > 0.0)) {
        return Err(FeatureError::Undefined);
    }
    let m = scales.len();
    if m < 6 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 50 });
    }
    let lx: Vec<f64> = scales.iter().map(|&s| (s as f64).ln()).collect();
    let ly: Vec<f64> = f.iter().map(|v| v.ln()).collect();
    let mut best_k = 3;
    let mut best = f64::INFINITY;
    for k in 3..=m - 3 {
        let sse = line_sse(&lx[..k], &ly[..k]) + line_sse(&lx[k..], &ly[k..]);
        if sse < best {
            best = sse;
            best_k = k;
        }
    }
    Ok(best_k as f64 / m as f64)
}

/// Bin counts of equal-width bins over `[lo, hi]`; used by histogram reports.
pub fn histogram(x: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0usize; bins];
    for &v in x {
        if v >= lo && v <= hi {
            counts[bin_of(v, lo, hi, bins)] += 1;
        }
    }
    counts
}

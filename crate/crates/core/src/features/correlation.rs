//! Autocorrelation-family features: ACF/PACF summaries, 2-D embedding,
//! nonlinear autocorrelation, binary motifs, the walker, local-prediction
//! residual lags and the random-segment stationarity measure.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use super::{sum_sq_first, Feature};
use crate::error::FeatureError;
use crate::rng::{rng_from_seed, stream_seed};
use crate::series::{difference, first_local_min, first_zero_crossing, full_acf, pacf_from_acf, sample_acf, zscore};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct AcfFeatures {
    pub x_acf1: Feature,
    pub ac_9: Feature,
    pub x_acf10: Feature,
    pub diff1_acf1: Feature,
    pub diff1_acf10: Feature,
    pub diff2_acf1: Feature,
    pub diff2_acf10: Feature,
    pub seas_acf1: Feature,
    pub firstzero_ac: Feature,
    pub firstmin_ac: Feature,
}

fn lag(acf: &Result<Vec<f64>, FeatureError>, k: usize, len: usize) -> Feature {
    let acf = acf.as_ref().map_err(|e| *e)?;
    acf.get(k - 1).copied().ok_or(FeatureError::LagTooLarge { lag: k, len })
}

fn short_acf(x: &[f64], lags: usize) -> Result<Vec<f64>, FeatureError> {
    sample_acf(x, lags.min(x.len().saturating_sub(1)))
}

pub fn acf_suite(x: &[f64], period: usize) -> AcfFeatures {
    let n = x.len();
    let acf = full_acf(x);
    let d1 = difference(x, 1);
    let d2 = difference(x, 2);
    let acf_d1 = d1.as_ref().map_err(|e| *e).and_then(|d| short_acf(d, 10));
    let acf_d2 = d2.as_ref().map_err(|e| *e).and_then(|d| short_acf(d, 10));
    let sum10 = |a: &Result<Vec<f64>, FeatureError>, len: usize| -> Feature {
        sum_sq_first(a.as_ref().map_err(|e| *e)?, 10, len)
    };
    AcfFeatures {
        x_acf1: lag(&acf, 1, n),
        ac_9: lag(&acf, 9, n),
        x_acf10: sum10(&acf, n),
        diff1_acf1: lag(&acf_d1, 1, n - 1),
        diff1_acf10: sum10(&acf_d1, n - 1),
        diff2_acf1: lag(&acf_d2, 1, n - 2),
        diff2_acf10: sum10(&acf_d2, n - 2),
        seas_acf1: lag(&acf, period, n),
        firstzero_ac: acf.as_ref().map(|a| first_zero_crossing(a) as f64).map_err(|e| *e),
        firstmin_ac: acf.as_ref().map(|a| first_local_min(a) as f64).map_err(|e| *e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacfFeatures {
    pub x_pacf5: Feature,
    pub diff1x_pacf5: Feature,
    pub diff2x_pacf5: Feature,
    pub seas_pacf: Feature,
}

fn pacf_upto(x: &[f64], lags: usize) -> Result<Vec<f64>, FeatureError> {
    if 2 * lags >= x.len() {
        return Err(FeatureError::LagTooLarge { lag: lags, len: x.len() });
    }
    pacf_from_acf(&sample_acf(x, lags)?)
}

pub fn pacf_suite(x: &[f64], period: usize) -> PacfFeatures {
    let pacf5 = |y: &[f64]| -> Feature { sum_sq_first(&pacf_upto(y, 5)?, 5, y.len()) };
    PacfFeatures {
        x_pacf5: pacf5(x),
        diff1x_pacf5: difference(x, 1).and_then(|d| pacf5(&d)),
        diff2x_pacf5: difference(x, 2).and_then(|d| pacf5(&d)),
        seas_pacf: pacf_upto(x, period).map(|p| p[period - 1]),
    }
}

/// Embedding delay: first zero crossing of the ACF, 1 if that is degenerate.
fn embedding_delay(z: &[f64]) -> usize {
    match full_acf(z) {
        Ok(acf) if !acf.is_empty() => first_zero_crossing(&acf).max(1),
        _ => 1,
    }
}

/// Proportion of delay-embedded points `(z_t, z_{t+tau})` with
/// `z_t^2 + z_{t+tau}^2 < boundary`.
pub fn embed2_incircle(x: &[f64], boundary: f64) -> Feature {
    let z = zscore(x)?;
    let tau = embedding_delay(&z);
    if z.len() < tau + 2 {
        return Err(FeatureError::TooShort { len: z.len(), needed: tau + 2 });
    }
    let pairs = z.len() - tau;
    let inside = z[..pairs].iter().zip(&z[tau..]).filter(|(a, b)| *a * *a + *b * *b < boundary).count();
    Ok(inside as f64 / pairs as f64)
}

/// Mean cubed lag-1 increment of the z-scored series.
pub fn trev_num(x: &[f64]) -> Feature {
    let z = zscore(x)?;
    let n = z.len() - 1;
    Ok(z.windows(2).map(|w| (w[1] - w[0]).powi(3)).sum::<f64>() / n as f64)
}

/// Shannon entropy (natural log) of overlapping 3-letter words of the
/// above/below-mean symbolization.
pub fn motiftwo_entro3(x: &[f64]) -> Feature {
    if x.len() < 4 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 4 });
    }
    let m = stats::mean(x);
    let bits: Vec<usize> = x.iter().map(|&v| usize::from(v > m)).collect();
    let mut counts = [0usize; 8];
    for w in bits.windows(3) {
        counts[w[0] << 2 | w[1] << 1 | w[2]] += 1;
    }
    let total = (bits.len() - 2) as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum())
}

/// Fraction of steps at which a walker, closing 10% of its gap to the
/// z-scored series each step, crosses the series.
pub fn walker_propcross(x: &[f64]) -> Feature {
    if x.len() < 3 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 3 });
    }
    let z = zscore(x)?;
    let n = z.len();
    let mut w = Vec::with_capacity(n);
    w.push(0.0);
    for t in 1..n {
        let prev = w[t - 1];
        w.push(prev + 0.1 * (z[t - 1] - prev));
    }
    let crossings = (0..n - 1).filter(|&t| (w[t] - z[t]) * (w[t + 1] - z[t + 1]) < 0.0).count();
    Ok(crossings as f64 / (n - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalPredictor {
    /// Previous value.
    Mean1,
    /// Least-squares line through the previous three values, extrapolated
    /// one step.
    Lfit3,
}

/// First zero crossing of the ACF of one-step local-prediction residuals.
pub fn localsimple_tau(x: &[f64], mode: LocalPredictor) -> Feature {
    if x.len() < 10 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 10 });
    }
    let z = zscore(x)?;
    let residuals: Vec<f64> = match mode {
        LocalPredictor::Mean1 => z.windows(2).map(|w| w[1] - w[0]).collect(),
        LocalPredictor::Lfit3 => z
            .windows(4)
            .map(|w| {
                let pred = (4.0 * w[2] + w[1] - 2.0 * w[0]) / 3.0;
                w[3] - pred
            })
            .collect(),
    };
    let scale = residuals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale <= 1e-9 {
        return Err(FeatureError::ZeroVariance);
    }
    Ok(first_zero_crossing(&full_acf(&residuals)?) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentRule {
    /// Segments of 50 points.
    Fixed50,
    /// Segments of twice the first zero crossing of the full-series ACF.
    Ac2,
}

pub const SPREAD_SEGMENTS: usize = 100;

/// Mean first-zero-crossing lag over 100 random contiguous segments.
/// Deterministic in `(x, rule, seed)`; segments with no spread are skipped.
pub fn spreadrandomlocal(x: &[f64], rule: SegmentRule, seed: u64) -> Feature {
    let z = zscore(x)?;
    let n = z.len();
    let segment = match rule {
        SegmentRule::Fixed50 => 50,
        SegmentRule::Ac2 => 2 * first_zero_crossing(&full_acf(&z)?),
    };
    if segment < 2 || segment >= n {
        return Err(FeatureError::SegmentTooLong { segment, len: n });
    }
    let stream = match rule {
        SegmentRule::Fixed50 => 0,
        SegmentRule::Ac2 => 1,
    };
    let mut rng = rng_from_seed(stream_seed(seed, stream));
    let mut total = 0.0;
    let mut used = 0usize;
    for _ in 0..SPREAD_SEGMENTS {
        let start = rng.random_range(0..=n - segment);
        if let Ok(acf) = full_acf(&z[start..start + segment]) {
            total += first_zero_crossing(&acf) as f64;
            used += 1;
        }
    }
    if used == 0 {
        return Err(FeatureError::Undefined);
    }
    Ok(total / used as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn motif_entropy_of_alternation() {
        let x: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let h = motiftwo_entro3(&x).unwrap();
        assert!((h - core::f64::consts::LN_2).abs() < 1e-12);
        let ramp: Vec<f64> = (0..100).map(|t| t as f64).collect();
        // Only the words 000, 001, 011 and 111 occur in a ramp.
        assert!(motiftwo_entro3(&ramp).unwrap() <= 4.0f64.ln() + 1e-12);
    }

    #[test]
    fn motif_entropy_is_bounded() {
        let x: Vec<f64> = (0..257).map(|t| ((t * 2654435761u64 as usize) % 1000) as f64).collect();
        let h = motiftwo_entro3(&x).unwrap();
        assert!(h >= 0.0 && h <= 8.0f64.ln() + 1e-12);
    }

    #[test]
    fn walker_on_ramp_and_alternation() {
        let ramp: Vec<f64> = (0..480).map(|t| t as f64).collect();
        assert!(walker_propcross(&ramp).unwrap() <= 2.0 / 479.0);
        let alt: Vec<f64> = (0..480).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(walker_propcross(&alt).unwrap() >= 0.8);
    }

    #[test]
    fn trev_antisymmetry_and_sawtooth() {
        let saw: Vec<f64> = (0..240).map(|t| (t % 12) as f64).collect();
        let v = trev_num(&saw).unwrap();
        assert!(v < 0.0);
        let rev: Vec<f64> = saw.iter().rev().copied().collect();
        assert!((trev_num(&rev).unwrap() + v).abs() < 1e-12);
    }

    #[test]
    fn incircle_is_nested_and_zero_far_out() {
        let x: Vec<f64> = (0..200).map(|t| ((t * 37) % 17) as f64).collect();
        let a = embed2_incircle(&x, 1.0).unwrap();
        let b = embed2_incircle(&x, 2.0).unwrap();
        assert!(b >= a);
        // Two-level signal: every |z| is about 1, so z_t^2 + z_{t+tau}^2 ~ 2 > 1.
        let y: Vec<f64> = (0..200).map(|t| if (t / 3) % 2 == 0 { 5.0 } else { -5.0 }).collect();
        assert_eq!(embed2_incircle(&y, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn localsimple_degenerate_line() {
        let line: Vec<f64> = (0..50).map(|t| 2.0 * t as f64 + 1.0).collect();
        assert_eq!(localsimple_tau(&line, LocalPredictor::Lfit3), Err(FeatureError::ZeroVariance));
    }

    #[test]
    fn spread_segment_errors() {
        let x: Vec<f64> = (0..40).map(|t| ((t * 7) % 5) as f64).collect();
        assert!(matches!(spreadrandomlocal(&x, SegmentRule::Fixed50, 1), Err(FeatureError::SegmentTooLong { .. })));
    }

    #[test]
    fn suites_on_short_difference() {
        let x = vec![0.0, 1.0, 0.5, 2.0, 1.0, 3.0, 0.0, 1.0, 2.0, 0.5, 1.5, 0.2, 0.9, 1.1];
        let s = acf_suite(&x, 4);
        assert!(s.x_acf1.is_ok());
        assert!(s.x_acf10.is_ok());
        assert!(s.diff2_acf10.is_ok());
        let p = pacf_suite(&x, 4);
        assert!(p.x_pacf5.is_ok());
        assert!(p.diff2x_pacf5.is_ok());
        let p = pacf_suite(&x[..11], 4);
        assert!(p.x_pacf5.is_ok());
        assert!(p.diff1x_pacf5.is_err());
        assert!(p.diff2x_pacf5.is_err());
    }
}

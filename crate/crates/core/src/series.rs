//! Series containers and the sample (partial) autocorrelation machinery
//! that every feature family builds on.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::ar::durbin_levinson;
use crate::error::{FeatureError, SeriesError};
use crate::stats;

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self, SeriesError> {
        if !(1..=12).contains(&month) {
            return Err(SeriesError::BadMonth { year, month });
        }
        Ok(Self { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    /// Months since year 0, January.
    pub fn ordinal(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(12) as i32;
        let month = ordinal.rem_euclid(12) as u32 + 1;
        Self { year, month }
    }

    pub fn plus_months(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn days_in_month(self) -> u32 {
        match self.month {
            4 | 6 | 9 | 11 => 30,
            2 if is_leap_year(self.year) => 29,
            2 => 28,
            _ => 31,
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

/// One station's complete record: no gaps, at least two full cycles.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeSeries {
    id: String,
    values: Vec<f64>,
    period: usize,
    start: YearMonth,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, values: Vec<f64>, period: usize, start: YearMonth) -> Result<Self, SeriesError> {
        let id = id.into();
        if period < 2 {
            return Err(SeriesError::BadPeriod(period));
        }
        if values.len() < 2 * period {
            return Err(SeriesError::TooShort { id, len: values.len(), needed: 2 * period });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite { id, index });
        }
        Ok(Self { id, values, period, start })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Calendar month of the last observation.
    pub fn end(&self) -> YearMonth {
        self.start.plus_months(self.values.len() as i64 - 1)
    }

    /// The z-scored series (same id, period and start).
    pub fn zscored(&self) -> Result<Self, FeatureError> {
        Ok(Self { values: zscore(&self.values)?, ..self.clone() })
    }
}

/// Sample autocorrelations and partial autocorrelations up to `max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpectrum {
    /// `r_1 ..= r_L`
    pub acf: Vec<f64>,
    /// `phi_11 ..= phi_LL`
    pub pacf: Vec<f64>,
}

impl CorrelationSpectrum {
    pub fn compute(x: &[f64], max_lag: usize) -> Result<Self, FeatureError> {
        let acf = sample_acf(x, max_lag)?;
        let pacf = pacf_from_acf(&acf)?;
        Ok(Self { acf, pacf })
    }

    pub fn max_lag(&self) -> usize {
        self.acf.len()
    }
}

/// `min(n - 1, floor(10 log10 n))`.
pub fn default_max_lag(n: usize) -> usize {
    if n < 2 {
        return 0;
    }
    let l = (10.0 * (n as f64).log10()).floor() as usize;
    l.min(n - 1).max(1)
}

pub(crate) fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

/// Biased (divisor `n`) sample autocorrelations `r_1 ..= r_max_lag`.
pub fn sample_acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>, FeatureError> {
    let n = x.len();
    if max_lag >= n {
        return Err(FeatureError::LagTooLarge { lag: max_lag, len: n });
    }
    if is_constant(x) {
        return Err(FeatureError::ZeroVariance);
    }
    let m = stats::mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    let denom: f64 = c.iter().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    Ok((1..=max_lag)
        .map(|k| {
            let num: f64 = c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum();
            num / denom
        })
        .collect())
}

/// Partial autocorrelations by Durbin-Levinson recursion on the sample ACF.
pub fn sample_pacf(x: &[f64], max_lag: usize) -> Result<Vec<f64>, FeatureError> {
    if 2 * max_lag >= x.len() {
        return Err(FeatureError::LagTooLarge { lag: max_lag, len: x.len() });
    }
    let acf = sample_acf(x, max_lag)?;
    pacf_from_acf(&acf)
}

pub fn pacf_from_acf(acf: &[f64]) -> Result<Vec<f64>, FeatureError> {
    let mut autocorr = Vec::with_capacity(acf.len() + 1);
    autocorr.push(1.0);
    autocorr.extend_from_slice(acf);
    Ok(durbin_levinson(&autocorr, acf.len())?.pacf)
}

/// `order`-times differenced values.
pub fn difference(x: &[f64], order: usize) -> Result<Vec<f64>, FeatureError> {
    if x.len() <= order {
        return Err(FeatureError::TooShort { len: x.len(), needed: order + 1 });
    }
    let mut y = x.to_vec();
    for _ in 0..order {
        y = y.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(y)
}

/// Mean 0, sample standard deviation (divisor `n - 1`) 1.
pub fn zscore(x: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if x.len() < 2 || is_constant(x) {
        return Err(FeatureError::ZeroVariance);
    }
    let m = stats::mean(x);
    let s = stats::sd(x);
    if !(s > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    Ok(x.iter().map(|v| (v - m) / s).collect())
}

/// Smallest lag `k` with `r_k <= 0`; saturates at the last available lag.
pub fn first_zero_crossing(acf: &[f64]) -> usize {
    acf.iter().position(|&r| r <= 0.0).map_or(acf.len(), |i| i + 1)
}

/// Smallest lag `k` with `r_{k-1} > r_k < r_{k+1}` (with `r_0 = 1`);
/// saturates at the last available lag.
pub fn first_local_min(acf: &[f64]) -> usize {
    let l = acf.len();
    for k in 1..l {
        let prev = if k == 1 { 1.0 } else { acf[k - 2] };
        let cur = acf[k - 1];
        if prev > cur && cur < acf[k] {
            return k;
        }
    }
    l
}

/// Full-length ACF (`r_1 ..= r_{n-1}`), the range used by the
/// first-crossing style features.
pub fn full_acf(x: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if x.len() < 2 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 2 });
    }
    sample_acf(x, x.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn acf_of_alternating_sequence() {
        let r = sample_acf(&[1.0, -1.0, 1.0, -1.0], 1).unwrap();
        assert!((r[0] + 0.75).abs() < 1e-15);
    }

    #[test]
    fn acf_errors() {
        assert_eq!(sample_acf(&[2.0; 5], 1), Err(FeatureError::ZeroVariance));
        assert!(matches!(sample_acf(&[1.0, 2.0], 2), Err(FeatureError::LagTooLarge { .. })));
    }

    #[test]
    fn pacf_base_case_equals_acf() {
        let x = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let r = sample_acf(&x, 2).unwrap();
        let p = sample_pacf(&x, 2).unwrap();
        assert_eq!(p[0], r[0]);
    }

    #[test]
    fn differencing() {
        assert_eq!(difference(&[1.0, 2.0, 4.0], 1).unwrap(), vec![1.0, 2.0]);
        assert_eq!(difference(&[1.0, 2.0, 4.0], 2).unwrap(), vec![1.0]);
        let ramp: Vec<f64> = (0..20).map(|t| 3.0 * t as f64 - 1.0).collect();
        assert!(difference(&ramp, 1).unwrap().iter().all(|&d| d == 3.0));
        assert!(difference(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn zscore_two_points() {
        let z = zscore(&[0.0, 2.0]).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((z[0] + h).abs() < 1e-15 && (z[1] - h).abs() < 1e-15);
        assert_eq!(zscore(&[1.0, 1.0, 1.0]), Err(FeatureError::ZeroVariance));
    }

    #[test]
    fn zscore_is_idempotent_and_affine_invariant() {
        let x: Vec<f64> = (0..50).map(|t| ((t * 37) % 11) as f64 + 0.5 * t as f64).collect();
        let z = zscore(&x).unwrap();
        let zz = zscore(&z).unwrap();
        let y: Vec<f64> = x.iter().map(|v| 4.5 * v - 3.0).collect();
        let zy = zscore(&y).unwrap();
        for i in 0..x.len() {
            assert!((z[i] - zz[i]).abs() < 1e-12);
            assert!((z[i] - zy[i]).abs() < 1e-12);
        }
        assert!(stats::mean(&z).abs() < 1e-12);
        assert!((stats::sd(&z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_crossing_and_minimum() {
        assert_eq!(first_zero_crossing(&[0.5, 0.2, -0.1, 0.3]), 3);
        assert_eq!(first_zero_crossing(&[-0.4, 0.1]), 1);
        assert_eq!(first_zero_crossing(&[0.9; 48]), 48);
        assert_eq!(first_local_min(&[0.3, 0.1, 0.2]), 2);
        let decreasing: Vec<f64> = (0..10).map(|k| 0.9 - 0.05 * k as f64).collect();
        assert_eq!(first_local_min(&decreasing), 10);
    }

    #[test]
    fn sinusoid_first_minimum_is_half_period() {
        let x: Vec<f64> = (1..=480).map(|t| (2.0 * core::f64::consts::PI * t as f64 / 10.0).sin()).collect();
        let acf = sample_acf(&x, default_max_lag(480)).unwrap();
        assert_eq!(first_local_min(&acf), 5);
        assert_eq!(first_zero_crossing(&acf), 3);
    }

    #[test]
    fn year_month_arithmetic() {
        let ym = YearMonth::new(1999, 11).unwrap();
        assert_eq!(ym.plus_months(3), YearMonth::new(2000, 2).unwrap());
        assert_eq!(YearMonth::new(2000, 2).unwrap().days_in_month(), 29);
        assert_eq!(YearMonth::new(1900, 2).unwrap().days_in_month(), 28);
        assert!(YearMonth::new(2000, 13).is_err());
        assert_eq!(alloc::format!("{}", ym), "1999-11");
    }

    #[test]
    fn series_invariants() {
        let start = YearMonth::new(1980, 1).unwrap();
        assert!(TimeSeries::new("a", vec![0.0; 23], 12, start).is_err());
        assert!(TimeSeries::new("a", vec![0.0; 24], 1, start).is_err());
        let mut v = vec![0.0; 24];
        v[5] = f64::NAN;
        assert_eq!(TimeSeries::new("a", v, 12, start), Err(SeriesError::NonFinite { id: "a".into(), index: 5 }));
        let ts = TimeSeries::new("a", vec![1.0; 24], 12, start).unwrap();
        assert_eq!(ts.end(), YearMonth::new(1981, 12).unwrap());
    }
}

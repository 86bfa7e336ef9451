//! Additive seasonal decompositions `x_t = S_t + T_t + R_t`: the classical
//! moving-average method and STL (Cleveland et al., 1990) without
//! robustness iterations.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DecompositionError {
    #[error("series of length {len} is shorter than two periods of {period}")]
    TooShort { len: usize, period: usize },
    #[error("period must be at least 2")]
    BadPeriod,
    #[error("loess windows must be odd and at least 3 (got {0})")]
    BadWindow(usize),
    #[error("degenerate loess neighbourhood")]
    NonconvergentLoess,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    Classical,
    Stl(StlOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub seasonal: Vec<f64>,
    pub trend: Vec<f64>,
    pub remainder: Vec<f64>,
    pub method: Method,
}

/// Classical additive decomposition.
///
/// The trend is the centred moving average of width `period` (the
/// half-weighted `2 x period` average for even periods). Trend values the
/// filter cannot reach (the first and last `period / 2` points) repeat the
/// nearest defined value so every component has full length.
pub fn classical_additive(x: &[f64], period: usize) -> Result<Decomposition, DecompositionError> {
    let n = x.len();
    if period < 2 {
        return Err(DecompositionError::BadPeriod);
    }
    if n < 2 * period {
        return Err(DecompositionError::TooShort { len: n, period });
    }
    let half = period / 2;
    let mut trend = vec![f64::NAN; n];
    for t in half..n - half {
        trend[t] = if period.is_multiple_of(2) {
            let inner: f64 = x[t + 1 - half..t + half].iter().sum();
            (inner + 0.5 * (x[t - half] + x[t + half])) / period as f64
        } else {
            x[t - half..=t + half].iter().sum::<f64>() / period as f64
        };
    }

    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for t in half..n - half {
        sums[t % period] += x[t] - trend[t];
        counts[t % period] += 1;
    }
    let mut phase: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let centre = phase.iter().sum::<f64>() / period as f64;
    phase.iter_mut().for_each(|p| *p -= centre);

    let first = trend[half];
    let last = trend[n - half - 1];
    trend[..half].iter_mut().for_each(|v| *v = first);
    trend[n - half..].iter_mut().for_each(|v| *v = last);

    let seasonal: Vec<f64> = (0..n).map(|t| phase[t % period]).collect();
    let remainder = (0..n).map(|t| x[t] - seasonal[t] - trend[t]).collect();
    Ok(Decomposition { seasonal, trend, remainder, method: Method::Classical })
}

/// STL parameters. Windows are loess spans in observations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StlOptions {
    pub period: usize,
    pub seasonal_window: usize,
    pub trend_window: usize,
    pub lowpass_window: usize,
    pub seasonal_degree: u8,
    pub trend_degree: u8,
    pub lowpass_degree: u8,
    pub inner_iterations: usize,
}

impl StlOptions {
    /// Seasonal window 13, degree 1 everywhere, two inner iterations; the
    /// trend window is the smallest odd integer `>= 1.5 p / (1 - 1.5 / 13)`
    /// and the low-pass window the smallest odd integer `>= p`.
    pub fn for_period(period: usize) -> Self {
        let seasonal_window = 13;
        let raw = 1.5 * period as f64 / (1.0 - 1.5 / seasonal_window as f64);
        Self {
            period,
            seasonal_window,
            trend_window: next_odd(raw.ceil() as usize).max(3),
            lowpass_window: next_odd(period).max(3),
            seasonal_degree: 1,
            trend_degree: 1,
            lowpass_degree: 1,
            inner_iterations: 2,
        }
    }

    fn validate(&self) -> Result<(), DecompositionError> {
        if self.period < 2 {
            return Err(DecompositionError::BadPeriod);
        }
        for w in [self.seasonal_window, self.trend_window, self.lowpass_window] {
            if w < 3 || w % 2 == 0 {
                return Err(DecompositionError::BadWindow(w));
            }
        }
        Ok(())
    }
}

fn next_odd(v: usize) -> usize {
    if v.is_multiple_of(2) {
        v + 1
    } else {
        v
    }
}

fn jump_for(window: usize) -> usize {
    window.div_ceil(10).max(1)
}

pub fn stl(x: &[f64], opts: &StlOptions) -> Result<Decomposition, DecompositionError> {
    opts.validate()?;
    let n = x.len();
    let np = opts.period;
    if n < 2 * np {
        return Err(DecompositionError::TooShort { len: n, period: np });
    }
    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut detrended = vec![0.0; n];
    let mut cycle = vec![0.0; n + 2 * np];

    for _ in 0..opts.inner_iterations.max(1) {
        for t in 0..n {
            detrended[t] = x[t] - trend[t];
        }
        smooth_cycle_subseries(&detrended, np, opts, &mut cycle)?;
        let lowpass = low_pass(&cycle, np, opts)?;
        for t in 0..n {
            seasonal[t] = cycle[np + t] - lowpass[t];
        }
        let deseasoned: Vec<f64> = (0..n).map(|t| x[t] - seasonal[t]).collect();
        trend = loess_smooth(&deseasoned, opts.trend_window, opts.trend_degree, jump_for(opts.trend_window))?;
    }
    let remainder = (0..n).map(|t| x[t] - seasonal[t] - trend[t]).collect();
    Ok(Decomposition { seasonal, trend, remainder, method: Method::Stl(*opts) })
}

/// Loess-smooths every cycle subseries, extended by one extrapolated point
/// at each end. Output index `t + np` corresponds to input index `t`.
fn smooth_cycle_subseries(y: &[f64], np: usize, opts: &StlOptions, out: &mut [f64]) -> Result<(), DecompositionError> {
    let n = y.len();
    let window = opts.seasonal_window;
    for phase in 0..np {
        let sub: Vec<f64> = y.iter().skip(phase).step_by(np).copied().collect();
        let k = sub.len();
        let smoothed = loess_smooth(&sub, window, opts.seasonal_degree, jump_for(window))?;
        let right = window.min(k);
        let before = local_fit(&sub, window, opts.seasonal_degree, 0.0, 1, right).unwrap_or(smoothed[0]);
        let left = if k >= window { k - window + 1 } else { 1 };
        let after = local_fit(&sub, window, opts.seasonal_degree, (k + 1) as f64, left, k).unwrap_or(smoothed[k - 1]);
        out[phase] = before;
        for (i, v) in smoothed.iter().enumerate() {
            out[phase + (i + 1) * np] = *v;
        }
        let tail = phase + (k + 1) * np;
        if tail < n + 2 * np {
            out[tail] = after;
        }
    }
    Ok(())
}

/// Moving averages of widths `np`, `np`, 3 followed by a loess pass.
fn low_pass(c: &[f64], np: usize, opts: &StlOptions) -> Result<Vec<f64>, DecompositionError> {
    let a = moving_average(c, np);
    let b = moving_average(&a, np);
    let m = moving_average(&b, 3);
    loess_smooth(&m, opts.lowpass_window, opts.lowpass_degree, jump_for(opts.lowpass_window))
}

fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let out_len = x.len() + 1 - width;
    let mut out = Vec::with_capacity(out_len);
    let mut acc: f64 = x[..width].iter().sum();
    out.push(acc / width as f64);
    for i in width..x.len() {
        acc += x[i] - x[i - width];
        out.push(acc / width as f64);
    }
    out
}

/// Loess smoothing of `y` at every index, fitting directly every `jump`-th
/// point and interpolating linearly in between.
pub(crate) fn loess_smooth(y: &[f64], window: usize, degree: u8, jump: usize) -> Result<Vec<f64>, DecompositionError> {
    let n = y.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![y[0]]);
    }
    let jump = jump.min(n - 1).max(1);
    let half = window.div_ceil(2);
    // 1-based inclusive neighbourhood for position `pos`.
    let neighbourhood = |pos: usize| -> (usize, usize) {
        if window >= n {
            (1, n)
        } else if pos < half {
            (1, window)
        } else if pos > n - half {
            (n - window + 1, n)
        } else {
            (pos + 1 - half, pos + window - half)
        }
    };
    let mut out = vec![0.0; n];
    let mut fitted = vec![false; n];
    let mut pos = 1;
    let fit_at = |pos: usize, out: &mut [f64], fitted: &mut [bool]| {
        let (l, r) = neighbourhood(pos);
        let v = local_fit(y, window, degree, pos as f64, l, r).ok_or(DecompositionError::NonconvergentLoess)?;
        out[pos - 1] = v;
        fitted[pos - 1] = true;
        Ok::<(), DecompositionError>(())
    };
    while pos <= n {
        fit_at(pos, &mut out, &mut fitted)?;
        pos += jump;
    }
    if !fitted[n - 1] {
        fit_at(n, &mut out, &mut fitted)?;
    }
    if jump > 1 {
        let mut last = 0;
        for i in 1..n {
            if fitted[i] {
                let gap = i - last;
                for j in last + 1..i {
                    let w = (j - last) as f64 / gap as f64;
                    out[j] = out[last] + w * (out[i] - out[last]);
                }
                last = i;
            }
        }
    }
    Ok(out)
}

/// Tricube-weighted local polynomial (degree 0 or 1) estimate at position
/// `xs` (1-based) from points `left..=right`. `None` when no point gets a
/// positive weight.
fn local_fit(y: &[f64], window: usize, degree: u8, xs: f64, left: usize, right: usize) -> Option<f64> {
    let n = y.len();
    let range = n as f64 - 1.0;
    let mut h = (xs - left as f64).max(right as f64 - xs);
    if window > n {
        h += ((window - n) / 2) as f64;
    }
    let h_hi = 0.999 * h;
    let h_lo = 0.001 * h;
    let mut w = vec![0.0; right + 1 - left];
    let mut total = 0.0;
    for (k, j) in (left..=right).enumerate() {
        let r = (j as f64 - xs).abs();
        if r <= h_hi {
            w[k] = if r <= h_lo { 1.0 } else { (1.0 - (r / h).powi(3)).powi(3) };
            total += w[k];
        }
    }
    if !(total > 0.0) {
        return None;
    }
    w.iter_mut().for_each(|v| *v /= total);
    if h > 0.0 && degree > 0 {
        let centre: f64 = (left..=right).zip(&w).map(|(j, wk)| wk * j as f64).sum();
        let spread: f64 = (left..=right).zip(&w).map(|(j, wk)| wk * (j as f64 - centre).powi(2)).sum();
        if spread.sqrt() > 0.001 * range {
            let b = (xs - centre) / spread;
            for (j, wk) in (left..=right).zip(w.iter_mut()) {
                *wk *= b * (j as f64 - centre) + 1.0;
            }
        }
    }
    Some((left..=right).zip(&w).map(|(j, wk)| wk * y[j - 1]).sum())
}

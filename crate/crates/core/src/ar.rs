//! Durbin-Levinson recursion and Yule-Walker autoregressive fits.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::FeatureError;
use crate::series::{default_max_lag, is_constant};
use crate::stats;

const PACF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Levinson {
    /// `phi_kk` for `k = 1..=order`.
    pub pacf: Vec<f64>,
    /// AR coefficients of the final order.
    pub coeffs: Vec<f64>,
    /// One-step prediction variances `v_0 ..= v_order`, in units of `gamma[0]`.
    pub variances: Vec<f64>,
}

/// Durbin-Levinson recursion on autocovariances (or autocorrelations)
/// `gamma[0] ..= gamma[order]`.
pub fn durbin_levinson(gamma: &[f64], order: usize) -> Result<Levinson, FeatureError> {
    assert!(gamma.len() > order, "need gamma_0..=gamma_order");
    let mut phi = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut pacf = Vec::with_capacity(order);
    let mut variances = Vec::with_capacity(order + 1);
    let mut v = gamma[0];
    if !(v > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    variances.push(v);
    for k in 1..=order {
        let mut num = gamma[k];
        for j in 1..k {
            num -= prev[j - 1] * gamma[k - j];
        }
        let a = num / v;
        if !a.is_finite() || a.abs() > 1.0 + PACF_TOL {
            return Err(FeatureError::DegeneratePacf { lag: k });
        }
        phi[k - 1] = a;
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - a * prev[k - j - 1];
        }
        v *= 1.0 - a * a;
        pacf.push(a);
        variances.push(v.max(0.0));
        prev[..k].copy_from_slice(&phi[..k]);
    }
    Ok(Levinson { pacf, coeffs: phi, variances })
}

/// Biased autocovariances `gamma_0 ..= gamma_max_lag` of the demeaned series.
pub fn autocovariance(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let m = stats::mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect()
}

/// An AR(p) model fitted by Yule-Walker.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub order: usize,
    pub coeffs: Vec<f64>,
    pub innovation_var: f64,
    pub mean: f64,
}

impl ArFit {
    /// Demeaned one-step residuals for `t >= order`.
    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let p = self.order;
        (p..x.len())
            .map(|t| {
                let pred: f64 = self.coeffs.iter().enumerate().map(|(k, a)| a * (x[t - k - 1] - self.mean)).sum();
                x[t] - self.mean - pred
            })
            .collect()
    }

    /// Spectral density (up to the constant `1 / 2pi`) at angular frequency `w`.
    pub fn spectral_density(&self, w: f64) -> f64 {
        let (mut re, mut im) = (1.0, 0.0);
        for (k, a) in self.coeffs.iter().enumerate() {
            let arg = w * (k + 1) as f64;
            re -= a * arg.cos();
            im += a * arg.sin();
        }
        self.innovation_var / (re * re + im * im)
    }
}

/// Yule-Walker fit with the order chosen by AIC over `0..=max_order`
/// (`None` means `min(n - 1, 10 log10 n)`).
pub fn fit_yule_walker_aic(x: &[f64], max_order: Option<usize>) -> Result<ArFit, FeatureError> {
    let n = x.len();
    if n < 3 {
        return Err(FeatureError::TooShort { len: n, needed: 3 });
    }
    if is_constant(x) {
        return Err(FeatureError::ZeroVariance);
    }
    let max_order = max_order.unwrap_or_else(|| default_max_lag(n)).min(n - 1);
    let gamma = autocovariance(x, max_order);
    let full = durbin_levinson(&gamma, max_order).map_err(|_| FeatureError::FitFailure)?;
    let mut best = 0;
    let mut best_aic = f64::INFINITY;
    for (p, v) in full.variances.iter().enumerate() {
        if !(*v > 0.0) {
            break;
        }
        let aic = n as f64 * v.ln() + 2.0 * p as f64;
        if aic < best_aic {
            best_aic = aic;
            best = p;
        }
    }
    let fit = durbin_levinson(&gamma, best).map_err(|_| FeatureError::FitFailure)?;
    Ok(ArFit { order: best, coeffs: fit.coeffs, innovation_var: fit.variances[best], mean: stats::mean(x) })
}

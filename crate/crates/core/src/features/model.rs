//! Model-fit features: conditional heteroscedasticity (ARCH/GARCH),
//! Holt-Winters smoothing parameters, the Teräsvirta nonlinearity
//! statistic, the KPSS statistic and the ARFIMA Hurst parameter.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{sum_sq_first, Feature};
use crate::ar::fit_yule_walker_aic;
use crate::decomposition::classical_additive;
use crate::error::FeatureError;
use crate::linalg::{least_squares, Matrix};
use crate::optim::{bracketed_minimize, nelder_mead, NelderMeadOptions};
use crate::series::{sample_acf, zscore};
use crate::stats;

/// Residuals of an AIC-selected Yule-Walker AR fit, re-centred to mean 0.
pub fn prewhiten_ar(x: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if x.len() < 30 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 30 });
    }
    let m = stats::mean(x);
    let centred: Vec<f64> = x.iter().map(|v| v - m).collect();
    let fit = fit_yule_walker_aic(&centred, None)?;
    let mut res = fit.residuals(&centred);
    let rm = stats::mean(&res);
    res.iter_mut().for_each(|r| *r -= rm);
    Ok(res)
}

/// Gaussian GARCH(1,1) fit.
#[derive(Debug, Clone, PartialEq)]
pub struct GarchFit {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Standardized residuals `y_t / sigma_t`.
    pub residuals: Vec<f64>,
    pub neg_log_likelihood: f64,
    pub converged: bool,
}

fn garch_nll(y: &[f64], var0: f64, p: &[f64]) -> f64 {
    let (omega, alpha, beta) = (p[0], p[1], p[2]);
    if !(omega > 0.0) || alpha < 0.0 || beta < 0.0 || alpha + beta >= 0.9999 {
        return f64::INFINITY;
    }
    let mut s2 = var0;
    let mut nll = 0.0;
    for t in 0..y.len() {
        if t > 0 {
            s2 = omega + alpha * y[t - 1] * y[t - 1] + beta * s2;
        }
        nll += 0.5 * (s2.ln() + y[t] * y[t] / s2);
    }
    nll
}

/// Maximum-likelihood GARCH(1,1) with `sigma_0^2` at the sample variance.
/// The series is rescaled to unit variance internally; `omega` is reported
/// on the original scale.
pub fn fit_garch11(y: &[f64]) -> Result<GarchFit, FeatureError> {
    if y.len() < 10 {
        return Err(FeatureError::TooShort { len: y.len(), needed: 10 });
    }
    let scale = stats::sd(y);
    if !(scale > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    let ys: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let var0 = ys.iter().map(|v| v * v).sum::<f64>() / ys.len() as f64;
    let opts = NelderMeadOptions { max_evals: 3000, ftol: 1e-11, xtol: 1e-2, step: 0.05 };
    let m =
        nelder_mead(|p| garch_nll(&ys, var0, p), &[0.1 * var0, 0.1, 0.8], &[1e-8, 0.0, 0.0], &[10.0, 1.0, 1.0], opts);
    let (omega, alpha, beta) = (m.x[0], m.x[1], m.x[2]);
    let converged = m.converged && m.fx.is_finite() && omega > 0.0 && alpha + beta < 1.0;
    let mut s2 = var0;
    let residuals = ys
        .iter()
        .enumerate()
        .map(|(t, v)| {
            if t > 0 {
                s2 = omega + alpha * ys[t - 1] * ys[t - 1] + beta * s2;
            }
            v / s2.sqrt()
        })
        .collect();
    Ok(GarchFit { omega: omega * scale * scale, alpha, beta, residuals, neg_log_likelihood: m.fx, converged })
}

/// R^2 of an AR(`lags`) least-squares regression with intercept.
pub fn ar_r2(y: &[f64], lags: usize) -> Feature {
    let n = y.len();
    if n <= 2 * lags + 1 {
        return Err(FeatureError::TooShort { len: n, needed: 2 * lags + 2 });
    }
    let rows = n - lags;
    let mut design = Matrix::zeros(rows, lags + 1);
    let mut target = Vec::with_capacity(rows);
    for (i, t) in (lags..n).enumerate() {
        design[(i, 0)] = 1.0;
        for k in 1..=lags {
            design[(i, k)] = y[t - k];
        }
        target.push(y[t]);
    }
    let tm = stats::mean(&target);
    let sst: f64 = target.iter().map(|v| (v - tm).powi(2)).sum();
    if !(sst > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    let fit = least_squares(&design, &target)?;
    Ok((1.0 - fit.sse / sst).clamp(0.0, 1.0))
}

fn squared(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| v * v).collect()
}

fn acf_sum12(y: &[f64]) -> Feature {
    let acf = sample_acf(y, 12.min(y.len().saturating_sub(1)))?;
    sum_sq_first(&acf, 12, y.len())
}

/// Intermediate results of the heteroscedasticity features.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityFit {
    pub prewhitened: Vec<f64>,
    pub garch: Result<GarchFit, FeatureError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityFeatures {
    pub arch_acf: Feature,
    pub garch_acf: Feature,
    pub arch_r2: Feature,
    pub garch_r2: Feature,
    pub arch_lm: Feature,
}

pub fn heterogeneity_fit(x: &[f64]) -> Result<HeterogeneityFit, FeatureError> {
    if x.len() < 60 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 60 });
    }
    let z = zscore(x)?;
    let prewhitened = prewhiten_ar(&z)?;
    let garch =
        fit_garch11(&prewhitened).and_then(|g| if g.converged { Ok(g) } else { Err(FeatureError::OptimizerFailure) });
    Ok(HeterogeneityFit { prewhitened, garch })
}

/// ARCH.LM is the AR(12) R^2 of the squared demeaned input itself.
pub fn arch_lm(x: &[f64]) -> Feature {
    let m = stats::mean(x);
    let sq: Vec<f64> = x.iter().map(|v| (v - m) * (v - m)).collect();
    ar_r2(&sq, 12)
}

pub fn heterogeneity_suite(x: &[f64]) -> HeterogeneityFeatures {
    let arch_lm = arch_lm(x);
    match heterogeneity_fit(x) {
        Ok(fit) => {
            let y2 = squared(&fit.prewhitened);
            let e2 = fit.garch.as_ref().map(|g| squared(&g.residuals)).map_err(|e| *e);
            HeterogeneityFeatures {
                arch_acf: acf_sum12(&y2),
                garch_acf: e2.as_ref().map_err(|e| *e).and_then(|e2| acf_sum12(e2)),
                arch_r2: ar_r2(&y2, 12),
                garch_r2: e2.as_ref().map_err(|e| *e).and_then(|e2| ar_r2(e2, 12)),
                arch_lm,
            }
        }
        Err(e) => {
            HeterogeneityFeatures { arch_acf: Err(e), garch_acf: Err(e), arch_r2: Err(e), garch_r2: Err(e), arch_lm }
        }
    }
}

/// Additive Holt-Winters smoothing parameters. `beta` is the trend
/// smoothing parameter relative to the level (often written `beta*`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoltWintersFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sse: f64,
}

pub const HW_STARTS: [[f64; 3]; 3] = [[0.3, 0.1, 0.1], [0.7, 0.3, 0.3], [0.1, 0.01, 0.5]];
pub const HW_LOWER: f64 = 1e-4;
pub const HW_UPPER: f64 = 0.9999;

/// One-step squared-error sum of additive Holt-Winters, states initialised
/// from the first two cycles, errors accumulated from the second cycle on.
pub fn holt_winters_sse(x: &[f64], period: usize, params: &[f64]) -> f64 {
    let (alpha, beta, gamma) = (params[0], params[1], params[2]);
    let m = period;
    let first = stats::mean(&x[..m]);
    let second = stats::mean(&x[m..2 * m]);
    let mut level = first;
    let mut trend = (second - first) / m as f64;
    let mut season: Vec<f64> = x[..m].iter().map(|v| v - first).collect();
    let mut sse = 0.0;
    for t in m..x.len() {
        let s = season[t % m];
        let err = x[t] - (level + trend + s);
        sse += err * err;
        let new_level = alpha * (x[t] - s) + (1.0 - alpha) * (level + trend);
        let new_trend = beta * (new_level - level) + (1.0 - beta) * trend;
        season[t % m] = gamma * (x[t] - level - trend) + (1.0 - gamma) * s;
        level = new_level;
        trend = new_trend;
    }
    sse
}

pub fn holt_winters_params(x: &[f64], period: usize) -> Result<HoltWintersFit, FeatureError> {
    if period < 2 || x.len() < 3 * period {
        return Err(FeatureError::TooShort { len: x.len(), needed: 3 * period.max(2) });
    }
    let lower = [HW_LOWER; 3];
    let upper = [HW_UPPER; 3];
    let opts = NelderMeadOptions { max_evals: 1500, ftol: 1e-12, xtol: 1e-7, step: 0.1 };
    let mut best: Option<HoltWintersFit> = None;
    for start in HW_STARTS {
        let m = nelder_mead(|p| holt_winters_sse(x, period, p), &start, &lower, &upper, opts);
        if !m.fx.is_finite() {
            continue;
        }
        if best.is_none_or(|b| m.fx < b.sse) {
            best = Some(HoltWintersFit { alpha: m.x[0], beta: m.x[1], gamma: m.x[2], sse: m.fx });
        }
    }
    best.ok_or(FeatureError::OptimizerFailure)
}

/// `10 X^2 / T` for the lag-1 Teräsvirta neural-network test with the
/// squared and cubed lag appended.
pub fn nonlinearity_terasvirta(x: &[f64]) -> Feature {
    if x.len() < 30 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 30 });
    }
    let z = zscore(x)?;
    let rows = z.len() - 1;
    let mut restricted = Matrix::zeros(rows, 2);
    let mut full = Matrix::zeros(rows, 4);
    let mut target = Vec::with_capacity(rows);
    for t in 1..z.len() {
        let l = z[t - 1];
        let i = t - 1;
        restricted[(i, 0)] = 1.0;
        restricted[(i, 1)] = l;
        full[(i, 0)] = 1.0;
        full[(i, 1)] = l;
        full[(i, 2)] = l * l;
        full[(i, 3)] = l * l * l;
        target.push(z[t]);
    }
    let sse0 = least_squares(&restricted, &target)?.sse;
    let sse1 = least_squares(&full, &target)?.sse;
    if !(sse0 > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    let t = rows as f64;
    let chi2 = t * (sse0 - sse1).max(0.0) / sse0;
    Ok(10.0 * chi2 / t)
}

/// KPSS statistic around a linear trend with Bartlett long-run variance at
/// truncation lag 1.
pub fn kpss_stat(x: &[f64]) -> Feature {
    let n = x.len();
    if n < 20 {
        return Err(FeatureError::TooShort { len: n, needed: 20 });
    }
    let tm = (n as f64 - 1.0) / 2.0;
    let xm = stats::mean(x);
    let stt: f64 = (0..n).map(|t| (t as f64 - tm).powi(2)).sum();
    let sxt: f64 = x.iter().enumerate().map(|(t, v)| (t as f64 - tm) * (v - xm)).sum();
    let slope = sxt / stt;
    let u: Vec<f64> = x.iter().enumerate().map(|(t, v)| v - xm - slope * (t as f64 - tm)).collect();
    let gamma0 = u.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let gamma1 = u.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / n as f64;
    let lrv = gamma0 + 2.0 * (1.0 - 1.0 / 2.0) * gamma1;
    let scale = x.iter().map(|v| (v - xm).powi(2)).sum::<f64>() / n as f64;
    if !(lrv > 1e-14 * scale) {
        return Err(FeatureError::ZeroVariance);
    }
    let mut s = 0.0;
    let mut acc = 0.0;
    for v in &u {
        s += v;
        acc += s * s;
    }
    Ok(acc / (n as f64 * n as f64 * lrv))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalFit {
    pub d: f64,
    pub hurst: f64,
}

/// Autoregressive truncation of the ARFIMA predictor.
pub const ARFIMA_TRUNCATION: usize = 100;
pub const D_BOUND: f64 = 0.499;

/// Profile `-2 log L` (up to constants) of ARFIMA(0, d, 0) for a demeaned
/// series. Predictors are exact (Durbin-Levinson) for the first `trunc`
/// observations and the order-`trunc` predictor afterwards.
pub fn arfima_objective(y: &[f64], d: f64, trunc: usize) -> f64 {
    let n = y.len();
    let order_cap = trunc.min(n.saturating_sub(1));
    let mut rho = Vec::with_capacity(order_cap + 1);
    rho.push(1.0);
    for k in 1..=order_cap {
        let prev = rho[k - 1];
        rho.push(prev * (k as f64 - 1.0 + d) / (k as f64 - d));
    }
    let mut phi: Vec<f64> = vec![0.0; order_cap];
    let mut prev = vec![0.0; order_cap];
    let mut v = 1.0;
    let mut order = 0;
    let mut sum_sq = 0.0;
    let mut sum_log_v = 0.0;
    for t in 0..n {
        if t > 0 && order < order_cap {
            let k = order + 1;
            let mut num = rho[k];
            for j in 1..k {
                num -= prev[j - 1] * rho[k - j];
            }
            let a = num / v;
            phi[k - 1] = a;
            for j in 1..k {
                phi[j - 1] = prev[j - 1] - a * prev[k - j - 1];
            }
            v *= 1.0 - a * a;
            prev[..k].copy_from_slice(&phi[..k]);
            order = k;
        }
        let pred: f64 = (0..order).map(|j| phi[j] * y[t - j - 1]).sum();
        let e = y[t] - pred;
        sum_sq += e * e / v;
        sum_log_v += v.ln();
    }
    n as f64 * (sum_sq / n as f64).ln() + sum_log_v
}

/// Maximum-likelihood fractional differencing order of the classically
/// deseasonalized series; `hurst = 0.5 + d`.
pub fn hurst_arfima(x: &[f64], period: usize) -> Result<FractionalFit, FeatureError> {
    if x.len() < 4 * period {
        return Err(FeatureError::TooShort { len: x.len(), needed: 4 * period });
    }
    let z = zscore(x)?;
    let dec = classical_additive(&z, period).map_err(|_| FeatureError::Decomposition)?;
    let deseasoned: Vec<f64> = z.iter().zip(&dec.seasonal).map(|(a, s)| a - s).collect();
    let m = stats::mean(&deseasoned);
    let y: Vec<f64> = deseasoned.iter().map(|v| v - m).collect();
    if y.iter().all(|v| v.abs() < 1e-12) {
        return Err(FeatureError::ZeroVariance);
    }
    let best = bracketed_minimize(|d| arfima_objective(&y, d, ARFIMA_TRUNCATION), -D_BOUND, D_BOUND, 21, 1e-6);
    if !best.converged {
        return Err(FeatureError::OptimizerFailure);
    }
    let d = best.x[0].clamp(-D_BOUND, D_BOUND);
    Ok(FractionalFit { d, hurst: 0.5 + d })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn kpss_is_nonnegative() {
        let x = lcg_noise(200, 3);
        assert!(kpss_stat(&x).unwrap() >= 0.0);
        let line: Vec<f64> = (0..50).map(|t| t as f64).collect();
        assert_eq!(kpss_stat(&line), Err(FeatureError::ZeroVariance));
    }

    #[test]
    fn r2_bounds() {
        let x = lcg_noise(300, 9);
        let r2 = ar_r2(&x, 12).unwrap();
        assert!((0.0..=1.0).contains(&r2));
    }

    #[test]
    fn holt_winters_fit_is_boxed_and_not_worse_than_starts() {
        let x: Vec<f64> = lcg_noise(240, 5)
            .iter()
            .enumerate()
            .map(|(t, e)| (2.0 * core::f64::consts::PI * t as f64 / 12.0).sin() + 0.01 * t as f64 + 0.05 * e)
            .collect();
        let fit = holt_winters_params(&x, 12).unwrap();
        for p in [fit.alpha, fit.beta, fit.gamma] {
            assert!((HW_LOWER..=HW_UPPER).contains(&p));
        }
        for s in HW_STARTS {
            assert!(fit.sse <= holt_winters_sse(&x, 12, &s));
        }
        let var: f64 = crate::stats::var(&x) * x.len() as f64;
        assert!(fit.sse / var <= 0.05);
    }

    #[test]
    fn garch_constraints_hold() {
        let x = lcg_noise(400, 11);
        let g = fit_garch11(&x).unwrap();
        assert!(g.omega > 0.0 && g.alpha >= 0.0 && g.beta >= 0.0);
        if g.converged {
            assert!(g.alpha + g.beta < 1.0);
        }
        assert_eq!(g.residuals.len(), x.len());
    }

    #[test]
    fn arfima_objective_is_exact_for_short_series() {
        // With n <= truncation the objective is the exact Gaussian profile
        // likelihood; at d = 0 every prediction is 0 with unit variance.
        let y = lcg_noise(50, 2);
        let got = arfima_objective(&y, 0.0, 100);
        let s2 = y.iter().map(|v| v * v).sum::<f64>() / 50.0;
        assert!((got - 50.0 * s2.ln()).abs() < 1e-10);
    }

    #[test]
    fn hurst_in_unit_interval() {
        let x = lcg_noise(240, 4);
        let f = hurst_arfima(&x, 12).unwrap();
        assert!(f.hurst > 0.0 && f.hurst < 1.0);
    }

    #[test]
    fn prewhitened_residuals_are_centred() {
        let x = lcg_noise(100, 8);
        let r = prewhiten_ar(&x).unwrap();
        assert!(stats::mean(&r).abs() <= 1e-8);
    }
}

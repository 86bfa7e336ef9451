#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use geofeat_core::{TimeSeries, YearMonth};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
}

pub fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let e = normals(n + 200, seed);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for (t, v) in e.iter().enumerate() {
        x = phi * x + v;
        if t >= 200 {
            out.push(x);
        }
    }
    out
}

/// `sin(2 pi t / period)` for `t = 1..=n`.
pub fn sinusoid(n: usize, period: f64) -> Vec<f64> {
    (1..=n).map(|t| (2.0 * std::f64::consts::PI * t as f64 / period).sin()).collect()
}

pub fn garch11(n: usize, omega: f64, alpha: f64, beta: f64, seed: u64) -> Vec<f64> {
    let e = normals(n + 500, seed);
    let mut s2 = omega / (1.0 - alpha - beta);
    let mut prev = 0.0f64;
    let mut out = Vec::with_capacity(n);
    for (t, z) in e.iter().enumerate() {
        s2 = omega + alpha * prev * prev + beta * s2;
        prev = s2.sqrt() * z;
        if t >= 500 {
            out.push(prev);
        }
    }
    out
}

/// Exact ARFIMA(0, d, 0) sample by Durbin-Levinson on the true
/// autocorrelations.
pub fn arfima(n: usize, d: f64, seed: u64) -> Vec<f64> {
    let e = normals(n, seed);
    let mut rho = vec![1.0];
    for k in 1..n {
        let p = rho[k - 1];
        rho.push(p * (k as f64 - 1.0 + d) / (k as f64 - d));
    }
    let mut x = Vec::with_capacity(n);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    x.push(e[0]);
    for t in 1..n {
        let mut num = rho[t];
        for j in 1..t {
            num -= phi[j - 1] * rho[t - j];
        }
        let a = num / v;
        let mut next = vec![0.0; t];
        for j in 1..t {
            next[j - 1] = phi[j - 1] - a * phi[t - j - 1];
        }
        next[t - 1] = a;
        phi = next;
        v *= 1.0 - a * a;
        let mean: f64 = (0..t).map(|j| phi[j] * x[t - 1 - j]).sum();
        x.push(mean + v.sqrt() * e[t]);
    }
    x
}

pub fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::new("s", values, 12, YearMonth::new(1980, 1).unwrap()).unwrap()
}

pub fn uniform(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random_range(lo..hi)).collect()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    assert!(n > 0, "median of nothing");
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Several seasonal shapes with trend and noise, for bound and invariance
/// checks.
pub fn random_monthly(seed: u64, n: usize) -> Vec<f64> {
    let mut r = rng(seed);
    let kind = r.random_range(0..5);
    let amp: f64 = r.random_range(0.0..5.0);
    let slope: f64 = r.random_range(-0.02..0.02);
    let noise: f64 = r.random_range(0.1..2.0);
    let e = normals(n, seed.wrapping_add(7919));
    let mut ar = 0.0;
    (0..n)
        .map(|t| {
            let s = amp * (2.0 * std::f64::consts::PI * t as f64 / 12.0).cos();
            ar = 0.6 * ar + e[t];
            match kind {
                0 => e[t],
                1 => s + noise * e[t],
                2 => s + slope * t as f64 + noise * ar,
                3 => (s + noise * e[t]).exp().min(1e6),
                _ => (s + noise * e[t]).max(0.0) + 0.01 * e[t].abs(),
            }
        })
        .collect()
}

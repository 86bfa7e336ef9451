#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use geofeat_core::linalg::Matrix;
use geofeat_core::{TimeSeries, YearMonth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
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

pub fn monthly(id: &str, values: Vec<f64>) -> TimeSeries {
    TimeSeries::new(id, values, 12, YearMonth::new(1980, 1).unwrap()).unwrap()
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

/// Seasonal shapes with trend, persistence and skew.
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

pub fn xor(n: usize, seed: u64) -> (Matrix, Vec<usize>) {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = ((i % 2) as f64, ((i / 2) % 2) as f64);
        let ea: f64 = StandardNormal.sample(&mut r);
        let eb: f64 = StandardNormal.sample(&mut r);
        rows.push(vec![a + 0.1 * ea, b + 0.1 * eb]);
        y.push(((i % 2) ^ ((i / 2) % 2)) + 1);
    }
    (Matrix::from_rows(&rows), y)
}

/// `k` Gaussian blobs in `p` dimensions, centres 10 apart along distinct
/// axes, `per` points each.
pub fn blobs(k: usize, p: usize, per: usize, sigma: f64, seed: u64) -> (Matrix, Vec<usize>) {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for c in 0..k {
        for _ in 0..per {
            let row: Vec<f64> = (0..p)
                .map(|j| {
                    let centre = if j % k == c { 10.0 } else { 0.0 };
                    let e: f64 = StandardNormal.sample(&mut r);
                    centre + sigma * e
                })
                .collect();
            rows.push(row);
            y.push(c);
        }
    }
    (Matrix::from_rows(&rows), y)
}

/// A synthetic station: five climate regimes laid out in separate
/// longitude bands.
pub struct Station {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub regime: usize,
    pub start: YearMonth,
    /// Monthly values in degrees C.
    pub values: Vec<f64>,
}

pub fn stations(n: usize, months: usize, seed: u64) -> Vec<Station> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let regime = i % 5;
            let lat = 10.0 * regime as f64 - 20.0 + r.random_range(-4.0..4.0);
            let lon = 20.0 * regime as f64 - 50.0 + r.random_range(-8.0..8.0);
            let e = normals(months, seed.wrapping_mul(31).wrapping_add(i as u64));
            let (amp, phi, noise, drift) = match regime {
                0 => (12.0, 0.2, 1.0, 0.0),
                1 => (1.0, 0.9, 0.6, 0.0),
                2 => (6.0, 0.0, 2.5, 0.004),
                3 => (0.3, 0.5, 1.0, 0.01),
                _ => (8.0, 0.6, 0.3, 0.0),
            };
            let mut ar = 0.0;
            let values = (0..months)
                .map(|t| {
                    ar = phi * ar + e[t];
                    let s = amp * (2.0 * std::f64::consts::PI * (t as f64 + 0.5 * regime as f64) / 12.0).cos();
                    let v = 15.0 + s + drift * t as f64 + noise * ar;
                    (v * 100.0).round() / 100.0
                })
                .collect();
            Station { id: format!("ST{:09}", i + 1), lat, lon, regime, start: YearMonth::new(1970, 1).unwrap(), values }
        })
        .collect()
}

pub fn long_csv(stations: &[Station]) -> String {
    let mut s = String::from("id,date,value\n");
    for st in stations {
        for (k, v) in st.values.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", st.id, st.start.plus_months(k as i64), v);
        }
    }
    s
}

pub fn stations_csv(stations: &[Station]) -> String {
    let mut s = String::from("id,latitude,longitude\n");
    for st in stations {
        let _ = writeln!(s, "{},{:.4},{:.4}", st.id, st.lat, st.lon);
    }
    s
}

/// GHCN-M v4 `.dat` text for whole years of the stations.
pub fn ghcn_dat(stations: &[Station]) -> String {
    let mut s = String::new();
    for st in stations {
        assert_eq!(st.start.month(), 1);
        for (y, year) in st.values.chunks(12).enumerate() {
            let _ = write!(s, "{:<11}{:04}TAVG", st.id, st.start.year() + y as i32);
            for v in year {
                let _ = write!(s, "{:>5}  k", (v * 100.0).round() as i64);
            }
            s.push('\n');
        }
    }
    s
}

pub fn ghcn_inv(stations: &[Station]) -> String {
    let mut s = String::new();
    for st in stations {
        let _ = writeln!(s, "{:<11} {:>8.4} {:>9.4} {:>6.1} SYNTHETIC", st.id, st.lat, st.lon, 100.0);
    }
    s
}

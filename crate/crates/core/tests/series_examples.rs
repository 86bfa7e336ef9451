#![allow(clippy::needless_range_loop)]

mod common;

use common::{ar1, median, normals, rng, sinusoid};
use geofeat_core::decomposition::{classical_additive, stl, StlOptions};
use geofeat_core::features::correlation::{
    acf_suite, embed2_incircle, localsimple_tau, motiftwo_entro3, pacf_suite, spreadrandomlocal, trev_num,
    walker_propcross, LocalPredictor, SegmentRule,
};
use geofeat_core::features::distribution::{
    crossing_points, flat_spots, fluctanal_prop_r1, fluctuation_scales, histogram_mode_10, outlierinclude_mdrmd,
    sampen_counts, sampen_first, spectral_entropy, std1st_der,
};
use geofeat_core::features::stl::strength;
use geofeat_core::series::{
    difference, first_local_min, first_zero_crossing, full_acf, sample_acf, sample_pacf, zscore,
};
use geofeat_core::FeatureError;
use rand::Rng;

const SEEDS: u64 = 200;

fn over_seeds(seeds: u64, f: impl Fn(u64) -> f64) -> Vec<f64> {
    (0..seeds).map(f).collect()
}

fn share(v: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    v.iter().filter(|&&x| pred(x)).count() as f64 / v.len() as f64
}

fn var(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

#[test]
fn white_noise_lag_one_within_bartlett_band() {
    let r1 = over_seeds(SEEDS, |s| sample_acf(&normals(480, s), 1).unwrap()[0]);
    assert!(share(&r1, |r| r.abs() <= 1.96 / 480f64.sqrt()) >= 0.9);
}

#[test]
fn pacf_of_ar1() {
    let x = ar1(2000, 0.5, 1);
    let p = sample_pacf(&x, 8).unwrap();
    assert!((p[0] - 0.5).abs() <= 0.05, "{}", p[0]);
    assert_eq!(p[0], sample_acf(&x, 1).unwrap()[0]);
    let tail: Vec<f64> = p[1..].iter().map(|v| v.abs()).collect();
    assert!(median(&tail) <= 0.05);
}

#[test]
fn difference_examples() {
    assert_eq!(difference(&[1.0, 2.0, 4.0], 1).unwrap(), vec![1.0, 2.0]);
    assert_eq!(difference(&[1.0, 2.0, 4.0], 2).unwrap(), vec![1.0]);
    let ramp: Vec<f64> = (0..50).map(|t| 3.0 + 0.5 * t as f64).collect();
    assert!(difference(&ramp, 1).unwrap().iter().all(|&d| d == 0.5));
    assert!(difference(&[1.0, 2.0], 2).is_err());
}

#[test]
fn zscore_examples() {
    let z = zscore(&[0.0, 2.0]).unwrap();
    assert!((z[0] + 0.5f64.sqrt()).abs() < 1e-12 && (z[1] - 0.5f64.sqrt()).abs() < 1e-12);
    let x = normals(100, 4);
    let z = zscore(&x).unwrap();
    let zz = zscore(&z).unwrap();
    let affine: Vec<f64> = x.iter().map(|v| 3.5 * v - 11.0).collect();
    let za = zscore(&affine).unwrap();
    for i in 0..100 {
        assert!((z[i] - zz[i]).abs() < 1e-12);
        assert!((z[i] - za[i]).abs() < 1e-12);
    }
    assert_eq!(zscore(&[2.0; 10]), Err(FeatureError::ZeroVariance));
}

#[test]
fn crossing_and_minimum_conventions() {
    assert_eq!(first_zero_crossing(&[0.5, 0.2, -0.1, 0.3]), 3);
    assert_eq!(first_zero_crossing(&[-0.4, 0.1]), 1);
    assert_eq!(first_zero_crossing(&[0.9; 48]), 48);
    let decreasing: Vec<f64> = (0..20).map(|k| 0.9 - 0.04 * k as f64).collect();
    assert_eq!(first_local_min(&decreasing), 20);
    assert_eq!(first_local_min(&[0.3, 0.1, 0.2]), 2);
    let acf = full_acf(&sinusoid(480, 12.0)).unwrap();
    assert_eq!(first_local_min(&acf), 6);
}

#[test]
fn acf_is_affine_invariant() {
    let x = ar1(300, 0.6, 9);
    let y: Vec<f64> = x.iter().map(|v| -250.0 * v + 1e3).collect();
    let a = sample_acf(&x, 30).unwrap();
    let b = sample_acf(&y, 30).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() <= 1e-10);
    }
}

fn assert_additive(x: &[f64], d: &geofeat_core::decomposition::Decomposition) {
    for t in 0..x.len() {
        assert!((d.seasonal[t] + d.trend[t] + d.remainder[t] - x[t]).abs() <= 1e-9);
    }
}

#[test]
fn noiseless_seasonal_signal_has_no_remainder() {
    let x = sinusoid(480, 12.0);
    let v = var(&x);
    let c = classical_additive(&x, 12).unwrap();
    assert_additive(&x, &c);
    assert!(var(&c.remainder[6..474]) <= 1e-6 * v);
    for t in 12..480 {
        assert!((c.seasonal[t] - c.seasonal[t - 12]).abs() < 1e-12);
    }
    let s = stl(&x, &StlOptions::for_period(12)).unwrap();
    assert_additive(&x, &s);
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(s.remainder[24..456].iter().all(|r| r.abs() <= 1e-6 * max));
}

#[test]
fn ramp_has_no_seasonal_component() {
    let x: Vec<f64> = (0..480).map(|t| t as f64).collect();
    let c = classical_additive(&x, 12).unwrap();
    assert!(c.seasonal.iter().all(|s| s.abs() <= 1e-9));
    let s = stl(&x, &StlOptions::for_period(12)).unwrap();
    assert_additive(&x, &s);
    assert!(s.seasonal.iter().all(|v| v.abs() <= 1e-6), "{:?}", &s.seasonal[..12]);
}

#[test]
fn recovers_known_seasonal_pattern() {
    let pattern = [1.0, 0.6, -0.2, -1.1, 0.4, 0.0, 0.9, -0.7, 0.3, -0.5, 0.2, 0.1];
    let mean = pattern.iter().sum::<f64>() / 12.0;
    let noise: Vec<f64> = normals(480, 77).iter().map(|e| 0.1 * e).collect();
    let x: Vec<f64> = (0..480).map(|t| pattern[t % 12] - mean + 0.002 * t as f64 + noise[t]).collect();
    let phase_mean = |v: &[f64], ph: usize| {
        let vals: Vec<f64> = (ph..480).step_by(12).map(|t| v[t]).collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    // The per-phase noise means are indistinguishable from seasonality, so
    // the recoverable truth includes them.
    let noise_all = noise.iter().sum::<f64>() / 480.0;
    for d in [classical_additive(&x, 12).unwrap(), stl(&x, &StlOptions::for_period(12)).unwrap()] {
        assert_additive(&x, &d);
        for ph in 0..12 {
            let truth = pattern[ph] - mean + phase_mean(&noise, ph) - noise_all;
            let m = phase_mean(&d.seasonal, ph);
            assert!((m - truth).abs() <= 0.02, "phase {ph}: {m} vs {truth}");
        }
    }
}

#[test]
fn seasonal_strength_of_sinusoid_with_drift() {
    let x: Vec<f64> =
        (1..=480).map(|t| (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin() + 0.01 * t as f64).collect();
    let d = stl(&x, &StlOptions::for_period(12)).unwrap();
    assert!(strength(&d.remainder, &d.seasonal).unwrap() >= 0.99);
}

#[test]
fn white_noise_seasonal_share_is_small() {
    let ratio = over_seeds(SEEDS, |s| {
        let x = normals(480, s);
        let d = stl(&x, &StlOptions::for_period(12)).unwrap();
        var(&d.seasonal) / var(&x)
    });
    assert!(share(&ratio, |r| r <= 0.25) >= 0.9);
}

#[test]
fn seas_acf1_of_sinusoid() {
    let a = acf_suite(&sinusoid(480, 12.0), 12);
    assert!(a.seas_acf1.unwrap() >= 0.97);
}

#[test]
fn white_noise_acf_and_pacf_envelopes() {
    let n = 480.0f64;
    let acf10 = over_seeds(SEEDS, |s| acf_suite(&normals(480, s), 12).x_acf10.unwrap());
    assert!(share(&acf10, |v| v <= 10.0 * (3.0 / n.sqrt()).powi(2)) >= 0.9);
    let pacf5 = over_seeds(SEEDS, |s| pacf_suite(&normals(480, s), 12).x_pacf5.unwrap());
    assert!(median(&pacf5) <= 5.0 * (2.0 / n.sqrt()).powi(2));
}

#[test]
fn ar1_pacf5() {
    let v = pacf_suite(&ar1(2000, 0.5, 2), 12).x_pacf5.unwrap();
    assert!((v - 0.25).abs() <= 0.05, "{v}");
}

#[test]
fn embedding_examples() {
    // Every z-score of a balanced two-level series exceeds 1 in magnitude,
    // so no embedded point lies inside the unit circle.
    let two_level: Vec<f64> = (0..100).map(|t| if (t / 3) % 2 == 0 { 4.0 } else { -4.0 }).collect();
    assert_eq!(embed2_incircle(&two_level, 1.0).unwrap(), 0.0);
    let props = over_seeds(SEEDS, |s| {
        let z = zscore(&normals(480, s)).unwrap();
        let (a, b) = (embed2_incircle(&z, 1.0).unwrap(), embed2_incircle(&z, 2.0).unwrap());
        assert!(b >= a);
        a
    });
    let target = 1.0 - (-0.5f64).exp();
    assert!((median(&props) - target).abs() <= 0.04);
}

#[test]
fn trev_examples() {
    let t = over_seeds(SEEDS, |s| trev_num(&zscore(&normals(480, s)).unwrap()).unwrap());
    assert!(median(&t).abs() <= 0.05);
    let z = zscore(&ar1(200, 0.3, 5)).unwrap();
    let rev: Vec<f64> = z.iter().rev().copied().collect();
    let (a, b) = (trev_num(&z).unwrap(), trev_num(&rev).unwrap());
    assert!((a + b).abs() < 1e-12 && a != 0.0);
    let saw: Vec<f64> = (0..240).map(|t| (t % 10) as f64).collect();
    assert!(trev_num(&zscore(&saw).unwrap()).unwrap() < 0.0);
}

#[test]
fn motif_examples() {
    let alt: Vec<f64> = (0..480).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
    assert!((motiftwo_entro3(&alt).unwrap() - 2f64.ln()).abs() < 1e-12);
    for s in 0..50 {
        assert!(motiftwo_entro3(&normals(480, s)).unwrap() <= 8f64.ln() + 1e-12);
    }
}

#[test]
fn walker_examples() {
    let ramp = zscore(&(0..480).map(|t| t as f64).collect::<Vec<_>>()).unwrap();
    assert!(walker_propcross(&ramp).unwrap() <= 2.0 / 479.0);
    let alt: Vec<f64> = (0..480).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
    assert!(walker_propcross(&alt).unwrap() >= 0.8);
    for s in 0..50 {
        let v = walker_propcross(&zscore(&ar1(480, 0.7, s)).unwrap()).unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn local_prediction_examples() {
    let taus = over_seeds(50, |s| localsimple_tau(&normals(480, s), LocalPredictor::Mean1).unwrap());
    assert_eq!(median(&taus), 1.0);
    let line: Vec<f64> = (0..480).map(|t| 0.3 * t as f64).collect();
    assert!(localsimple_tau(&line, LocalPredictor::Lfit3).is_err());
    let persistent = over_seeds(50, |s| localsimple_tau(&ar1(480, 0.9, s), LocalPredictor::Mean1).unwrap());
    assert!(persistent.iter().all(|&t| t >= 1.0));
    assert!(median(&persistent) >= median(&taus));
}

#[test]
fn spreadrandomlocal_examples() {
    let x = normals(480, 3);
    for rule in [SegmentRule::Fixed50, SegmentRule::Ac2] {
        assert_eq!(spreadrandomlocal(&x, rule, 9), spreadrandomlocal(&x, rule, 9));
    }
    let wn = over_seeds(SEEDS, |s| spreadrandomlocal(&normals(480, s), SegmentRule::Fixed50, s).unwrap());
    assert!(median(&wn) <= 3.0);
    let sin = spreadrandomlocal(&sinusoid(480, 12.0), SegmentRule::Fixed50, 1).unwrap();
    assert!((sin - 3.0).abs() <= 1.0, "{sin}");
}

#[test]
fn std1st_der_examples() {
    let v = over_seeds(SEEDS, |s| std1st_der(&normals(480, s)).unwrap());
    assert!((median(&v) - 2f64.sqrt()).abs() <= 0.05);
    let ramp: Vec<f64> = (0..480).map(|t| t as f64).collect();
    assert!(std1st_der(&ramp).unwrap() <= 0.1);
}

#[test]
fn histogram_mode_examples() {
    let modes = over_seeds(SEEDS, |s| {
        let z = zscore(&normals(480, s)).unwrap();
        let v = histogram_mode_10(&z).unwrap();
        let lo = z.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(v >= lo && v <= hi);
        v.abs()
    });
    assert!(median(&modes) <= 0.5);
    let mut r = rng(8);
    let bimodal: Vec<f64> = (0..480)
        .map(|i| if i % 3 == 0 { 1.5 + 0.1 * r.random::<f64>() } else { -1.0 + 0.1 * r.random::<f64>() })
        .collect();
    assert!(histogram_mode_10(&bimodal).unwrap() < 0.0);
}

#[test]
fn outlier_timing_examples() {
    let v = over_seeds(SEEDS, |s| outlierinclude_mdrmd(&normals(480, s)).unwrap());
    assert!(median(&v).abs() <= 0.1);
    let mut late = normals(480, 1).iter().map(|v| 0.1 * v).collect::<Vec<_>>();
    for (k, t) in (432..480).step_by(3).enumerate() {
        late[t] = 3.0 + 0.1 * k as f64;
    }
    assert!(outlierinclude_mdrmd(&late).unwrap() > 0.25);
    let x = normals(480, 12);
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    let (a, b) = (outlierinclude_mdrmd(&x).unwrap(), outlierinclude_mdrmd(&rev).unwrap());
    assert!((a + b).abs() <= 0.02, "{a} {b}");
}

#[test]
fn crossing_point_examples() {
    assert_eq!(crossing_points(&[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap(), 5.0);
    assert_eq!(crossing_points(&(0..20).map(|t| t as f64).collect::<Vec<_>>()).unwrap(), 1.0);
    assert_eq!(crossing_points(&[4.0; 20]).unwrap(), 0.0);
}

#[test]
fn flat_spot_examples() {
    assert_eq!(flat_spots(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap(), 4.0);
    assert_eq!(flat_spots(&[1.0; 480]).unwrap(), 480.0);
    assert_eq!(flat_spots(&(0..480).map(|t| t as f64).collect::<Vec<_>>()).unwrap(), 48.0);
}

#[test]
fn sampen_examples() {
    let periodic: Vec<f64> = (0..480).map(|t| (t % 2) as f64).collect();
    assert!(sampen_first(&periodic).unwrap().abs() < 1e-3);
    let v = over_seeds(SEEDS, |s| {
        let z = zscore(&normals(480, s)).unwrap();
        let (a, b) = sampen_counts(&z, 2, 0.3);
        assert!(a <= b);
        sampen_first(&z).unwrap()
    });
    // For iid Gaussian data P(|z_i - z_j| <= r) = erf(r / 2), so the
    // sample entropy tends to -ln(erf(0.15)).
    let erf_015 = 0.167_995_971_427_363;
    assert!((median(&v) + f64::ln(erf_015)).abs() <= 0.1, "{}", median(&v));
    assert!(v.iter().all(|&s| s >= 0.0));
}

#[test]
fn spectral_entropy_examples() {
    let wn = over_seeds(SEEDS, |s| spectral_entropy(&normals(480, s)).unwrap());
    assert!(median(&wn) >= 0.95);
    let noise = normals(480, 4);
    let x: Vec<f64> = sinusoid(480, 12.0).iter().zip(&noise).map(|(s, e)| s + 0.05 * e).collect();
    assert!(spectral_entropy(&x).unwrap() <= 0.35);
}

#[test]
fn fluctuation_split_examples() {
    let m = fluctuation_scales(480).len() as f64;
    let wn = over_seeds(50, |s| {
        let v = fluctanal_prop_r1(&normals(480, s)).unwrap();
        assert!(v >= 3.0 / m - 1e-12 && v <= (m - 3.0) / m + 1e-12);
        v
    });
    let two = over_seeds(50, |s| {
        let e = normals(480, 1000 + s);
        let mut x = Vec::with_capacity(480);
        let mut level = 0.0;
        for (t, v) in e.iter().enumerate() {
            if t < 240 {
                x.push(*v);
            } else {
                level += v;
                x.push(level);
            }
        }
        fluctanal_prop_r1(&x).unwrap()
    });
    assert!((median(&two) - median(&wn)).abs() >= 0.1, "{} {}", median(&two), median(&wn));
}

#[test]
fn distribution_features_are_affine_invariant() {
    for s in 0..20 {
        let x = common::random_monthly(s, 480);
        let y: Vec<f64> = x.iter().map(|v| 42.0 * v + 17.0).collect();
        type F = fn(&[f64]) -> geofeat_core::features::Feature;
        let fs: [F; 7] = [
            std1st_der,
            histogram_mode_10,
            outlierinclude_mdrmd,
            crossing_points,
            flat_spots,
            spectral_entropy,
            sampen_first,
        ];
        for f in fs {
            match (f(&x), f(&y)) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} {b}"),
                (a, b) => assert_eq!(a.is_ok(), b.is_ok()),
            }
        }
    }
}

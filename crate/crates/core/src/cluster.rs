//! Clustering on random-forest proximities and forest-based spatial
//! interpolation of cluster labels.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::AnalysisError;
use crate::forest::{synthetic_contrast, Forest, ForestParams, ProximityMatrix, TrainingSet};
use crate::linalg::Matrix;
use crate::rng::stream_seed;

pub const PAM_MAX_SWAPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Pam {
    /// Medoid row indices, ascending; cluster `c` (label `c + 1`) is the
    /// one around `medoids[c]`.
    pub medoids: Vec<usize>,
    /// Labels in `1..=k`.
    pub labels: Vec<usize>,
    pub cost: f64,
    pub build_cost: f64,
    pub swaps: usize,
    pub converged: bool,
}

fn check_square(d: &Matrix) -> Result<(), AnalysisError> {
    let n = d.rows();
    if d.cols() != n {
        return Err(AnalysisError::MalformedDissimilarity);
    }
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return Err(AnalysisError::MalformedDissimilarity);
        }
        for j in i + 1..n {
            let (a, b) = (d[(i, j)], d[(j, i)]);
            if !a.is_finite() || a < 0.0 || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(AnalysisError::MalformedDissimilarity);
            }
        }
    }
    Ok(())
}

fn total_cost(d: &Matrix, medoids: &[usize]) -> f64 {
    (0..d.rows()).map(|i| medoids.iter().map(|&m| d[(i, m)]).fold(f64::INFINITY, f64::min)).sum()
}

/// Partitioning around medoids: greedy BUILD, then best-improvement SWAP
/// until no swap lowers the cost (at most [`PAM_MAX_SWAPS`] swaps). Ties
/// go to the lowest index.
pub fn pam(d: &Matrix, k: usize) -> Result<Pam, AnalysisError> {
    check_square(d)?;
    let n = d.rows();
    if k == 0 || k > n {
        return Err(AnalysisError::InvalidParameter("k must be in 1..=n"));
    }
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; n];
    for _ in 0..k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for c in 0..n {
            if medoids.contains(&c) {
                continue;
            }
            let gain: f64 = if medoids.is_empty() {
                -(0..n).map(|j| d[(j, c)]).sum::<f64>()
            } else {
                (0..n).map(|j| (nearest[j] - d[(j, c)]).max(0.0)).sum()
            };
            if gain > best.1 {
                best = (c, gain);
            }
        }
        medoids.push(best.0);
        for j in 0..n {
            nearest[j] = nearest[j].min(d[(j, best.0)]);
        }
    }
    let build_cost = total_cost(d, &medoids);
    let mut cost = build_cost;
    let mut swaps = 0;
    let mut converged = false;
    while swaps < PAM_MAX_SWAPS {
        // Nearest and second-nearest medoid distances per point.
        let mut d1 = vec![f64::INFINITY; n];
        let mut d2 = vec![f64::INFINITY; n];
        let mut near = vec![0usize; n];
        for j in 0..n {
            for (s, &m) in medoids.iter().enumerate() {
                let v = d[(j, m)];
                if v < d1[j] {
                    d2[j] = d1[j];
                    d1[j] = v;
                    near[j] = s;
                } else if v < d2[j] {
                    d2[j] = v;
                }
            }
        }
        let mut best = (0usize, 0usize, 0.0f64);
        for s in 0..k {
            for h in 0..n {
                if medoids.contains(&h) {
                    continue;
                }
                let mut delta = 0.0;
                for j in 0..n {
                    let dh = d[(j, h)];
                    delta += if near[j] == s { dh.min(d2[j]) - d1[j] } else { (dh - d1[j]).min(0.0) };
                }
                if delta < best.2 {
                    best = (s, h, delta);
                }
            }
        }
        if best.2 > -1e-12 * cost.max(1.0) {
            converged = true;
            break;
        }
        medoids[best.0] = best.1;
        cost = total_cost(d, &medoids);
        swaps += 1;
    }
    medoids.sort_unstable();
    let labels = (0..n)
        .map(|j| {
            let mut b = 0;
            for (s, &m) in medoids.iter().enumerate() {
                if d[(j, m)] < d[(j, medoids[b])] {
                    b = s;
                }
            }
            b + 1
        })
        .collect();
    Ok(Pam { medoids, labels, cost, build_cost, swaps, converged })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub k: usize,
    pub forest: ForestParams,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self { k: 5, forest: ForestParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub medoids: Vec<usize>,
    pub params: ClusterParams,
    pub converged: bool,
}

/// The real-versus-synthetic training set behind unsupervised clustering.
pub fn contrast_training_set(x: &Matrix, seed: u64) -> Result<TrainingSet, AnalysisError> {
    let (xx, yy) = synthetic_contrast(x, stream_seed(seed, 1))?;
    TrainingSet::new(xx, &yy)
}

/// Forest parameters for the contrast forest (a derived seed, so the
/// synthetic sample and the trees use separate streams).
pub fn contrast_forest_params(params: &ClusterParams) -> ForestParams {
    ForestParams { seed: stream_seed(params.forest.seed, 2), ..params.forest }
}

/// PAM on `1 - proximity`.
pub fn cluster_from_proximity(
    prox: &ProximityMatrix,
    params: &ClusterParams,
) -> Result<ClusterAssignment, AnalysisError> {
    let p = pam(&prox.dissimilarity(), params.k)?;
    Ok(ClusterAssignment { labels: p.labels, medoids: p.medoids, params: *params, converged: p.converged })
}

/// Contrast forest, proximities among the real rows, then PAM.
pub fn unsupervised_cluster(x: &Matrix, params: &ClusterParams) -> Result<(ClusterAssignment, Forest), AnalysisError> {
    if params.k == 0 || params.k > x.rows() {
        return Err(AnalysisError::InvalidParameter("k must be in 1..=rows"));
    }
    let data = contrast_training_set(x, params.forest.seed)?;
    let forest = Forest::fit(&data, &contrast_forest_params(params))?;
    let prox = forest.proximity(x)?;
    Ok((cluster_from_proximity(&prox, params)?, forest))
}

/// Features ranked by the Gini importance of the contrast forest.
pub fn rank_features_for_clustering(forest: &Forest) -> Vec<(usize, f64)> {
    forest.ranked_importance()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

pub const DEFAULT_GRID_STEP: f64 = 0.5;
pub const DEFAULT_PADDING: f64 = 2.0;

impl BBox {
    /// Hull of the points padded by `pad` degrees, clamped to the globe.
    pub fn around(points: &[(f64, f64)], pad: f64) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let mut b = BBox {
            lat_min: f64::INFINITY,
            lat_max: f64::NEG_INFINITY,
            lon_min: f64::INFINITY,
            lon_max: f64::NEG_INFINITY,
        };
        for &(lat, lon) in points {
            b.lat_min = b.lat_min.min(lat);
            b.lat_max = b.lat_max.max(lat);
            b.lon_min = b.lon_min.min(lon);
            b.lon_max = b.lon_max.max(lon);
        }
        Some(BBox {
            lat_min: (b.lat_min - pad).max(-90.0),
            lat_max: (b.lat_max + pad).min(90.0),
            lon_min: (b.lon_min - pad).max(-180.0),
            lon_max: (b.lon_max + pad).min(180.0),
        })
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| lo + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridNode {
    pub lat: f64,
    pub lon: f64,
    pub label: usize,
    pub votes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridPrediction {
    pub step: f64,
    pub bbox: BBox,
    /// Labels in ascending order; `votes` follow this order.
    pub classes: Vec<usize>,
    /// Row-major from the south-west corner, longitude varying fastest.
    pub nodes: Vec<GridNode>,
}

/// Lattice `(lat, lon)` coordinates of `bbox` at `step` degrees.
pub fn lattice(bbox: &BBox, step: f64) -> Vec<(f64, f64)> {
    let lats = BBox::axis(bbox.lat_min, bbox.lat_max, step);
    let lons = BBox::axis(bbox.lon_min, bbox.lon_max, step);
    let mut out = Vec::with_capacity(lats.len() * lons.len());
    for &lat in &lats {
        for &lon in &lons {
            out.push((lat, lon));
        }
    }
    out
}

/// Training set of station coordinates `(lat, lon)` and labels.
pub fn location_training_set(stations: &[(f64, f64, usize)]) -> Result<TrainingSet, AnalysisError> {
    let rows: Vec<Vec<f64>> = stations.iter().map(|s| vec![s.0, s.1]).collect();
    let labels: Vec<usize> = stations.iter().map(|s| s.2).collect();
    if rows.is_empty() {
        return Err(AnalysisError::TooFewRows { got: 0, needed: 2 });
    }
    TrainingSet::new(Matrix::from_rows(&rows), &labels)
}

/// Classify every lattice node by a forest trained on station
/// coordinates (raw degrees).
pub fn spatial_interpolate(
    stations: &[(f64, f64, usize)],
    step: f64,
    bbox: Option<BBox>,
    params: &ForestParams,
) -> Result<(GridPrediction, Forest), AnalysisError> {
    if !(step > 0.0) {
        return Err(AnalysisError::InvalidParameter("grid step must be positive"));
    }
    let data = location_training_set(stations)?;
    let forest = Forest::fit(&data, params)?;
    let pts: Vec<(f64, f64)> = stations.iter().map(|s| (s.0, s.1)).collect();
    let bbox = match bbox {
        Some(b) => b,
        None => BBox::around(&pts, DEFAULT_PADDING).ok_or(AnalysisError::TooFewRows { got: 0, needed: 2 })?,
    };
    let grid = predict_grid(&forest, &bbox, step)?;
    Ok((grid, forest))
}

pub fn predict_grid(forest: &Forest, bbox: &BBox, step: f64) -> Result<GridPrediction, AnalysisError> {
    let pts = lattice(bbox, step);
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0, p.1]).collect();
    let pred = forest.predict(&Matrix::from_rows(&rows))?;
    let nodes = pts
        .iter()
        .zip(pred.labels)
        .zip(pred.votes)
        .map(|((&(lat, lon), label), votes)| GridNode { lat, lon, label, votes })
        .collect();
    Ok(GridPrediction { step, bbox: *bbox, classes: forest.classes.clone(), nodes })
}

fn choose2(v: u64) -> f64 {
    (v * v.saturating_sub(1)) as f64 / 2.0
}

/// Hubert-Arabie adjusted Rand index.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LabelMismatch);
    }
    let n = a.len() as u64;
    let mut ka: Vec<usize> = a.to_vec();
    ka.sort_unstable();
    ka.dedup();
    let mut kb: Vec<usize> = b.to_vec();
    kb.sort_unstable();
    kb.dedup();
    let mut table = vec![0u64; ka.len() * kb.len()];
    for (x, y) in a.iter().zip(b) {
        let i = ka.binary_search(x).unwrap_or(0);
        let j = kb.binary_search(y).unwrap_or(0);
        table[i * kb.len() + j] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let rows: f64 = (0..ka.len()).map(|i| choose2(table[i * kb.len()..(i + 1) * kb.len()].iter().sum())).sum();
    let cols: f64 = (0..kb.len()).map(|j| choose2((0..ka.len()).map(|i| table[i * kb.len() + j]).sum())).sum();
    let total = choose2(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = rows * cols / total;
    let max = (rows + cols) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

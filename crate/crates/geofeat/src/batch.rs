//! Parallel drivers. Every function gives bit-identical results for any
//! pool size: work is split by index and reassembled in index order, and
//! the only reductions are integer sums.

use geofeat_core::cluster::{
    cluster_from_proximity, contrast_forest_params, contrast_training_set, lattice, location_training_set, BBox,
    ClusterAssignment, ClusterParams, GridNode, GridPrediction, DEFAULT_PADDING,
};
use geofeat_core::forest::{fit_tree, proximity_counts, Forest, ForestParams, ProximityMatrix, TrainingSet};
use geofeat_core::linalg::Matrix;
use geofeat_core::{extract_all_with, AnalysisError, ExtractionParams, FeatureVector, TimeSeries};
use rayon::prelude::*;
use rayon::ThreadPool;

pub fn thread_pool(threads: usize) -> Result<ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()
}

/// Feature vectors in input order.
pub fn extract_batch(series: &[TimeSeries], params: &ExtractionParams, pool: &ThreadPool) -> Vec<FeatureVector> {
    pool.install(|| series.par_iter().map(|ts| extract_all_with(ts, params)).collect())
}

pub fn fit_forest(data: &TrainingSet, params: &ForestParams, pool: &ThreadPool) -> Result<Forest, AnalysisError> {
    if params.n_trees == 0 {
        return Err(AnalysisError::InvalidParameter("n_trees must be at least 1"));
    }
    let trees = pool.install(|| (0..params.n_trees).into_par_iter().map(|i| fit_tree(data, params, i)).collect());
    Ok(Forest::from_trees(trees, data, params))
}

pub fn proximity(forest: &Forest, x: &Matrix, pool: &ThreadPool) -> Result<ProximityMatrix, AnalysisError> {
    if x.cols() != forest.n_features {
        return Err(AnalysisError::RowLength { got: x.cols(), expected: forest.n_features });
    }
    let n = x.rows();
    let chunk = forest.trees.len().div_ceil(pool.current_num_threads()).max(1);
    let counts = pool.install(|| {
        forest.trees.par_chunks(chunk).map(|trees| proximity_counts(trees, x)).reduce(
            || vec![0u32; n * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(s, v)| *s += v);
                a
            },
        )
    });
    Ok(ProximityMatrix::from_counts(n, &counts, forest.trees.len()))
}

/// Unsupervised forest clustering; same result as the sequential version.
pub fn cluster(
    x: &Matrix,
    params: &ClusterParams,
    pool: &ThreadPool,
) -> Result<(ClusterAssignment, Forest), AnalysisError> {
    if params.k == 0 || params.k > x.rows() {
        return Err(AnalysisError::InvalidParameter("k must be in 1..=rows"));
    }
    let data = contrast_training_set(x, params.forest.seed)?;
    let forest = fit_forest(&data, &contrast_forest_params(params), pool)?;
    let prox = proximity(&forest, x, pool)?;
    Ok((cluster_from_proximity(&prox, params)?, forest))
}

pub fn predict_grid(
    forest: &Forest,
    bbox: &BBox,
    step: f64,
    pool: &ThreadPool,
) -> Result<GridPrediction, AnalysisError> {
    let pts = lattice(bbox, step);
    let nodes: Result<Vec<Vec<GridNode>>, AnalysisError> = pool.install(|| {
        pts.par_chunks(256)
            .map(|chunk| {
                let rows: Vec<Vec<f64>> = chunk.iter().map(|p| vec![p.0, p.1]).collect();
                let pred = forest.predict(&Matrix::from_rows(&rows))?;
                Ok(chunk
                    .iter()
                    .zip(pred.labels)
                    .zip(pred.votes)
                    .map(|((&(lat, lon), label), votes)| GridNode { lat, lon, label, votes })
                    .collect())
            })
            .collect()
    });
    Ok(GridPrediction { step, bbox: *bbox, classes: forest.classes.clone(), nodes: nodes?.concat() })
}

/// Forest on station coordinates, then every lattice node classified.
pub fn spatial_interpolate(
    stations: &[(f64, f64, usize)],
    step: f64,
    bbox: Option<BBox>,
    params: &ForestParams,
    pool: &ThreadPool,
) -> Result<(GridPrediction, Forest), AnalysisError> {
    if step.is_nan() || step <= 0.0 {
        return Err(AnalysisError::InvalidParameter("grid step must be positive"));
    }
    let data = location_training_set(stations)?;
    let forest = fit_forest(&data, params, pool)?;
    let pts: Vec<(f64, f64)> = stations.iter().map(|s| (s.0, s.1)).collect();
    let bbox = match bbox {
        Some(b) => b,
        None => BBox::around(&pts, DEFAULT_PADDING).ok_or(AnalysisError::TooFewRows { got: 0, needed: 2 })?,
    };
    Ok((predict_grid(&forest, &bbox, step, pool)?, forest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use geofeat_core::cluster::unsupervised_cluster;

    fn blobs() -> Matrix {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let c = (i % 3) as f64 * 10.0;
                vec![c + ((i * 7919) % 13) as f64 * 0.1, c - ((i * 104729) % 11) as f64 * 0.1, (i % 5) as f64]
            })
            .collect();
        Matrix::from_rows(&rows)
    }

    #[test]
    fn parallel_cluster_matches_sequential() {
        let x = blobs();
        let params = ClusterParams { k: 3, forest: ForestParams { n_trees: 60, seed: 9, ..Default::default() } };
        let (seq, seq_forest) = unsupervised_cluster(&x, &params).unwrap();
        for threads in [1, 3, 8] {
            let pool = thread_pool(threads).unwrap();
            let (par, forest) = cluster(&x, &params, &pool).unwrap();
            assert_eq!(par, seq);
            assert_eq!(forest.trees, seq_forest.trees);
            let a = seq_forest.proximity(&x).unwrap();
            assert_eq!(proximity(&forest, &x, &pool).unwrap(), a);
        }
    }

    #[test]
    fn parallel_grid_matches_sequential() {
        let stations = [(0.0, 0.0, 1), (1.0, 0.5, 1), (5.0, 5.0, 2), (6.0, 4.0, 2)];
        let params = ForestParams { n_trees: 25, seed: 3, ..Default::default() };
        let (seq, _) = geofeat_core::cluster::spatial_interpolate(&stations, 0.5, None, &params).unwrap();
        let pool = thread_pool(4).unwrap();
        let (par, _) = spatial_interpolate(&stations, 0.5, None, &params, &pool).unwrap();
        assert_eq!(par, seq);
    }
}

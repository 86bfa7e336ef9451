//! Breiman random forests of CART classification trees: bootstrap
//! aggregation, per-node feature subsampling, proximities and Gini
//! importance.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::AnalysisError;
use crate::linalg::Matrix;
use crate::rng::{rng_from_seed, stream_seed};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per node; `None` means `floor(sqrt(p))`.
    pub mtry: Option<usize>,
    pub min_node_size: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 5000, mtry: None, min_node_size: 1, max_depth: None, seed: 42 }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry.unwrap_or_else(|| (p as f64).sqrt().floor() as usize).clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize, decrease: f64 },
    Leaf { counts: Vec<u32> },
}

/// A fitted tree; node 0 is the root. Thresholds are observed values;
/// rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Index of the terminal node reached by `row`.
    pub fn leaf_of(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { .. } => return i,
            }
        }
    }

    /// Majority class of the leaf reached by `row`, ties to the lowest class.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        match &self.nodes[self.leaf_of(row)] {
            Node::Leaf { counts } => argmax_lowest(counts.iter().map(|&c| c as f64)),
            Node::Split { .. } => unreachable!("leaf_of returns leaves"),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

fn argmax_lowest<I: Iterator<Item = f64>>(it: I) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in it.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Training data with labels mapped to dense class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub x: Matrix,
    pub y: Vec<usize>,
    /// Original label of each class index, ascending.
    pub classes: Vec<usize>,
}

impl TrainingSet {
    pub fn new(x: Matrix, labels: &[usize]) -> Result<Self, AnalysisError> {
        if labels.len() != x.rows() {
            return Err(AnalysisError::LabelMismatch);
        }
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(AnalysisError::MissingValues);
        }
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(AnalysisError::InvalidParameter("need at least two classes"));
        }
        let y = labels.iter().map(|l| classes.binary_search(l).unwrap_or(0)).collect();
        Ok(Self { x, y, classes })
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }
}

/// Row indices drawn with replacement for tree `index`.
pub fn bootstrap_sample(n: usize, seed: u64, index: usize) -> Vec<usize> {
    let mut rng = rng_from_seed(stream_seed(stream_seed(seed, index as u64), 0));
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

struct Grower<'a> {
    data: &'a TrainingSet,
    mtry: usize,
    min_node_size: usize,
    max_depth: usize,
    rng: crate::rng::Rng,
    nodes: Vec<Node>,
    pairs: Vec<(f64, usize)>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
    left_count: usize,
}

impl Grower<'_> {
    fn class_counts(&self, rows: &[usize]) -> Vec<u32> {
        let mut c = vec![0u32; self.data.n_classes()];
        for &r in rows {
            c[self.data.y[r]] += 1;
        }
        c
    }

    fn best_split_on(&mut self, rows: &[usize], feature: usize, parent: &[u32], best: &mut Option<BestSplit>) {
        let k = parent.len();
        self.pairs.clear();
        self.pairs.extend(rows.iter().map(|&r| (self.data.x[(r, feature)], self.data.y[r])));
        self.pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = rows.len();
        if self.pairs[0].0 == self.pairs[n - 1].0 {
            return;
        }
        let parent_term: f64 = parent.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / n as f64;
        let mut left = vec![0u32; k];
        let mut left_sq = 0.0f64;
        let mut right_sq: f64 = parent.iter().map(|&c| (c as f64) * (c as f64)).sum();
        for i in 0..n - 1 {
            let cls = self.pairs[i].1;
            let l = left[cls] as f64;
            let r = (parent[cls] - left[cls]) as f64;
            left_sq += 2.0 * l + 1.0;
            right_sq -= 2.0 * r - 1.0;
            left[cls] += 1;
            let nl = i + 1;
            let nr = n - nl;
            if self.pairs[i].0 == self.pairs[i + 1].0 || nl < self.min_node_size || nr < self.min_node_size {
                continue;
            }
            let decrease = left_sq / nl as f64 + right_sq / nr as f64 - parent_term;
            if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                let threshold = self.pairs[i].0;
                *best = Some(BestSplit { feature, threshold, decrease, left_count: nl });
            }
        }
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let counts = self.class_counts(rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: counts.clone() });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < 2 * self.min_node_size || depth >= self.max_depth {
            return id;
        }
        let p = self.data.x.cols();
        let mut features: Vec<usize> = (0..p).collect();
        features.shuffle(&mut self.rng);
        let mut best: Option<BestSplit> = None;
        for &f in &features[..self.mtry] {
            self.best_split_on(rows, f, &counts, &mut best);
        }
        // If every sampled feature is constant here, keep drawing.
        if best.is_none() {
            for &f in &features[self.mtry..] {
                self.best_split_on(rows, f, &counts, &mut best);
                if best.is_some() {
                    break;
                }
            }
        }
        let Some(split) = best else { return id };
        let x = &self.data.x;
        rows.sort_by(|&a, &b| {
            let (va, vb) = (x[(a, split.feature)], x[(b, split.feature)]);
            (va > split.threshold).cmp(&(vb > split.threshold))
        });
        let (l, r) = rows.split_at_mut(split.left_count);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            decrease: split.decrease.max(0.0),
        };
        id
    }
}

/// Grow tree `index` of a forest: bootstrap sample and feature draws come
/// from streams derived from `(params.seed, index)`, so trees can be grown
/// in any order or in parallel.
pub fn fit_tree(data: &TrainingSet, params: &ForestParams, index: usize) -> Tree {
    let n = data.x.rows();
    let mut rows = bootstrap_sample(n, params.seed, index);
    rows.sort_unstable();
    let mut grower = Grower {
        data,
        mtry: params.resolved_mtry(data.x.cols()),
        min_node_size: params.min_node_size.max(1),
        max_depth: params.max_depth.unwrap_or(usize::MAX),
        rng: rng_from_seed(stream_seed(stream_seed(params.seed, index as u64), 1)),
        nodes: Vec::new(),
        pairs: Vec::with_capacity(n),
    };
    grower.grow(&mut rows, 0);
    Tree { nodes: grower.nodes }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    pub mtry: usize,
    pub n_features: usize,
    pub classes: Vec<usize>,
    /// Out-of-bag accuracy over rows that were out of bag at least once.
    pub oob_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Original class labels.
    pub labels: Vec<usize>,
    /// Per-row vote fractions in class-index order.
    pub votes: Vec<Vec<f64>>,
}

impl Forest {
    pub fn fit(data: &TrainingSet, params: &ForestParams) -> Result<Self, AnalysisError> {
        if params.n_trees == 0 {
            return Err(AnalysisError::InvalidParameter("n_trees must be at least 1"));
        }
        let trees = (0..params.n_trees).map(|i| fit_tree(data, params, i)).collect();
        Ok(Self::from_trees(trees, data, params))
    }

    /// Assemble trees grown by [`fit_tree`] (in index order) and compute
    /// the out-of-bag accuracy.
    pub fn from_trees(trees: Vec<Tree>, data: &TrainingSet, params: &ForestParams) -> Self {
        let n = data.x.rows();
        let k = data.n_classes();
        let mut votes = vec![0u32; n * k];
        let mut in_bag = vec![false; n];
        for (t, tree) in trees.iter().enumerate() {
            in_bag.iter_mut().for_each(|b| *b = false);
            for r in bootstrap_sample(n, params.seed, t) {
                in_bag[r] = true;
            }
            for r in (0..n).filter(|&r| !in_bag[r]) {
                votes[r * k + tree.predict_row(data.x.row(r))] += 1;
            }
        }
        let mut scored = 0usize;
        let mut correct = 0usize;
        for r in 0..n {
            let v = &votes[r * k..(r + 1) * k];
            if v.iter().any(|&c| c > 0) {
                scored += 1;
                if argmax_lowest(v.iter().map(|&c| c as f64)) == data.y[r] {
                    correct += 1;
                }
            }
        }
        Self {
            trees,
            params: *params,
            mtry: params.resolved_mtry(data.x.cols()),
            n_features: data.x.cols(),
            classes: data.classes.clone(),
            oob_accuracy: (scored > 0).then(|| correct as f64 / scored as f64),
        }
    }

    fn check_schema(&self, x: &Matrix) -> Result<(), AnalysisError> {
        if x.cols() != self.n_features {
            return Err(AnalysisError::RowLength { got: x.cols(), expected: self.n_features });
        }
        Ok(())
    }

    /// Majority vote over trees; ties go to the lowest class.
    pub fn predict(&self, x: &Matrix) -> Result<Prediction, AnalysisError> {
        self.check_schema(x)?;
        let k = self.classes.len();
        let t = self.trees.len() as f64;
        let mut labels = Vec::with_capacity(x.rows());
        let mut votes = Vec::with_capacity(x.rows());
        for i in 0..x.rows() {
            let row = x.row(i);
            let mut v = vec![0.0; k];
            for tree in &self.trees {
                v[tree.predict_row(row)] += 1.0;
            }
            labels.push(self.classes[argmax_lowest(v.iter().copied())]);
            v.iter_mut().for_each(|c| *c /= t);
            votes.push(v);
        }
        Ok(Prediction { labels, votes })
    }

    pub fn proximity(&self, x: &Matrix) -> Result<ProximityMatrix, AnalysisError> {
        self.check_schema(x)?;
        let counts = proximity_counts(&self.trees, x);
        Ok(ProximityMatrix::from_counts(x.rows(), &counts, self.trees.len()))
    }

    /// Mean over trees of the summed weighted Gini decreases per feature.
    pub fn gini_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for tree in &self.trees {
            for node in &tree.nodes {
                if let Node::Split { feature, decrease, .. } = node {
                    imp[*feature] += decrease;
                }
            }
        }
        let t = self.trees.len() as f64;
        imp.iter_mut().for_each(|v| *v /= t);
        imp
    }

    /// `(feature, score)` by descending score, ties by feature index.
    pub fn ranked_importance(&self) -> Vec<(usize, f64)> {
        rank_scores(&self.gini_importance())
    }
}

pub fn rank_scores(scores: &[f64]) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

/// Upper-triangle-inclusive co-leaf counts (row-major `n x n`, only
/// `i <= j` filled) summed over `trees`.
pub fn proximity_counts(trees: &[Tree], x: &Matrix) -> Vec<u32> {
    let n = x.rows();
    let mut counts = vec![0u32; n * n];
    let mut leaf = vec![(0usize, 0usize); n];
    for tree in trees {
        for (i, slot) in leaf.iter_mut().enumerate() {
            *slot = (tree.leaf_of(x.row(i)), i);
        }
        leaf.sort_unstable();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && leaf[end].0 == leaf[start].0 {
                end += 1;
            }
            for a in start..end {
                let i = leaf[a].1;
                for b in a..end {
                    let j = leaf[b].1;
                    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
                    counts[lo * n + hi] += 1;
                }
            }
            start = end;
        }
    }
    counts
}

/// Symmetric matrix of co-leaf frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl ProximityMatrix {
    /// From summed [`proximity_counts`] over `n_trees` trees.
    pub fn from_counts(n: usize, counts: &[u32], n_trees: usize) -> Self {
        let t = n_trees.max(1) as f64;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
            for j in i + 1..n {
                let v = counts[i * n + j] as f64 / t;
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// `1 - proximity`.
    pub fn dissimilarity(&self) -> Matrix {
        Matrix::from_row_major(self.n, self.n, self.data.iter().map(|p| 1.0 - p).collect())
    }
}

/// Real rows (label 1) stacked over as many synthetic rows (label 2) whose
/// columns are drawn independently, with replacement, from the real
/// column values.
pub fn synthetic_contrast(x: &Matrix, seed: u64) -> Result<(Matrix, Vec<usize>), AnalysisError> {
    let (n, p) = (x.rows(), x.cols());
    if n == 0 || p == 0 {
        return Err(AnalysisError::TooFewRows { got: n, needed: 1 });
    }
    let mut rng = rng_from_seed(stream_seed(seed, 0x5f17));
    let mut synth = Matrix::zeros(n, p);
    for j in 0..p {
        for i in 0..n {
            synth[(i, j)] = x[(rng.random_range(0..n), j)];
        }
    }
    let labels = (0..2 * n).map(|i| if i < n { 1 } else { 2 }).collect();
    Ok((x.vstack(&synth), labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Matrix, Vec<usize>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let e = (i as f64 * 0.618).fract() * 0.2;
            if i % 2 == 0 {
                rows.push(vec![0.0 + e, 1.0 - e]);
                y.push(3);
            } else {
                rows.push(vec![5.0 - e, 6.0 + e]);
                y.push(7);
            }
        }
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn separable_training_accuracy() {
        let (x, y) = blobs();
        let data = TrainingSet::new(x.clone(), &y).unwrap();
        let f = Forest::fit(&data, &ForestParams { n_trees: 25, ..Default::default() }).unwrap();
        let p = f.predict(&x).unwrap();
        assert_eq!(p.labels, y);
        for v in &p.votes {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        assert!(TrainingSet::new(x, &[1, 1]).is_err());
    }

    #[test]
    fn proximity_has_unit_diagonal() {
        let (x, y) = blobs();
        let data = TrainingSet::new(x.clone(), &y).unwrap();
        let f = Forest::fit(&data, &ForestParams { n_trees: 10, ..Default::default() }).unwrap();
        let p = f.proximity(&x).unwrap();
        for i in 0..p.len() {
            assert_eq!(p.get(i, i), 1.0);
            for j in 0..p.len() {
                assert_eq!(p.get(i, j), p.get(j, i));
            }
        }
    }

    #[test]
    fn leaves_respect_min_node_size() {
        let (x, y) = blobs();
        let data = TrainingSet::new(x, &y).unwrap();
        let params = ForestParams { n_trees: 5, min_node_size: 3, ..Default::default() };
        for t in 0..5 {
            let tree = fit_tree(&data, &params, t);
            for node in &tree.nodes {
                if let Node::Leaf { counts } = node {
                    assert!(counts.iter().sum::<u32>() >= 3);
                }
            }
        }
    }

    #[test]
    fn contrast_is_balanced() {
        let (x, _) = blobs();
        let (xx, yy) = synthetic_contrast(&x, 3).unwrap();
        assert_eq!(xx.rows(), 80);
        assert_eq!(yy.iter().filter(|&&l| l == 1).count(), 40);
        for j in 0..2 {
            let real = x.column(j);
            for i in 40..80 {
                assert!(real.contains(&xx[(i, j)]));
            }
        }
    }
}

//! Auto-scaling, principal component analysis, Pearson correlograms with
//! significance tests, and complete-linkage hierarchical ordering.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::AnalysisError;
use crate::linalg::{svd, Matrix};
use crate::special::student_t_two_sided;
use crate::stats;

/// A column-standardized matrix and the statistics used to standardize it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled {
    pub matrix: Matrix,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Indices (into the input) of the retained columns.
    pub kept: Vec<usize>,
    /// Indices of zero-variance columns that were dropped.
    pub dropped: Vec<usize>,
}

/// Standardize every column to mean 0 and sd 1 (divisor `n - 1`), dropping
/// constant columns.
pub fn autoscale(x: &Matrix) -> Result<Scaled, AnalysisError> {
    let n = x.rows();
    if n < 2 {
        return Err(AnalysisError::TooFewRows { got: n, needed: 2 });
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut means = Vec::new();
    let mut sds = Vec::new();
    for j in 0..x.cols() {
        let col = x.column(j);
        let m = stats::mean(&col);
        let s = stats::sd(&col);
        if s > 1e-12 * m.abs().max(1.0) && s.is_finite() {
            kept.push(j);
            means.push(m);
            sds.push(s);
        } else {
            dropped.push(j);
        }
    }
    if kept.is_empty() {
        return Err(AnalysisError::AllConstantColumns);
    }
    let mut out = Matrix::zeros(n, kept.len());
    for i in 0..n {
        for (k, &j) in kept.iter().enumerate() {
            out[(i, k)] = (x[(i, j)] - means[k]) / sds[k];
        }
    }
    Ok(Scaled { matrix: out, means, sds, kept, dropped })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PcaResult {
    /// `p x K` unit-norm loadings, one column per component.
    pub loadings: Matrix,
    /// `n x K` component scores.
    pub scores: Matrix,
    pub eigenvalues: Vec<f64>,
    pub variance_explained: Vec<f64>,
    /// `p x K` percentages `100 * loading^2`.
    pub contributions: Matrix,
}

impl PcaResult {
    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Feature indices of component `k` ranked by contribution, largest
    /// first, ties by index.
    pub fn ranked_contributions(&self, k: usize) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> =
            (0..self.contributions.rows()).map(|j| (j, self.contributions[(j, k)])).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

/// PCA through the SVD of the column-centred matrix. Components with zero
/// variance are kept at the end.
pub fn pca(x: &Matrix) -> Result<PcaResult, AnalysisError> {
    let (n, p) = (x.rows(), x.cols());
    if n < 2 {
        return Err(AnalysisError::TooFewRows { got: n, needed: 2 });
    }
    let mut centred = x.clone();
    for j in 0..p {
        let m = stats::mean(&x.column(j));
        for i in 0..n {
            centred[(i, j)] -= m;
        }
    }
    let dec = svd(&centred);
    let eigenvalues: Vec<f64> = dec.singular_values.iter().map(|s| s * s / (n as f64 - 1.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    if !(total > 0.0) {
        return Err(AnalysisError::AllConstantColumns);
    }
    let variance_explained = eigenvalues.iter().map(|e| e / total).collect();
    let loadings = dec.v;
    let scores = centred.matmul(&loadings);
    let mut contributions = Matrix::zeros(p, p);
    for j in 0..p {
        for k in 0..p {
            contributions[(j, k)] = 100.0 * loadings[(j, k)] * loadings[(j, k)];
        }
    }
    Ok(PcaResult { loadings, scores, eigenvalues, variance_explained, contributions })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationReport {
    pub r: Matrix,
    pub p: Matrix,
    /// Complete-linkage leaf order on `1 - r`.
    pub order: Vec<usize>,
    pub alpha: f64,
}

impl CorrelationReport {
    pub fn significant(&self, i: usize, j: usize) -> bool {
        self.p[(i, j)] < self.alpha
    }
}

/// Two-sided p-value of the t test for a Pearson correlation `r` from `n`
/// pairs.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    student_t_two_sided(r * (df / denom).sqrt(), df)
}

pub fn correlation_report(x: &Matrix, alpha: f64) -> Result<CorrelationReport, AnalysisError> {
    let (n, p) = (x.rows(), x.cols());
    if n < 4 {
        return Err(AnalysisError::TooFewRows { got: n, needed: 4 });
    }
    let mut cols = Vec::with_capacity(p);
    for j in 0..p {
        let mut c = x.column(j);
        let m = stats::mean(&c);
        c.iter_mut().for_each(|v| *v -= m);
        let ss = c.iter().map(|v| v * v).sum::<f64>();
        if !(ss > 0.0) {
            return Err(AnalysisError::ZeroVarianceColumn(alloc::format!("{j}")));
        }
        cols.push((c, ss));
    }
    let mut r = Matrix::identity(p);
    let mut pv = Matrix::zeros(p, p);
    for i in 0..p {
        for j in i + 1..p {
            let (a, sa) = &cols[i];
            let (b, sb) = &cols[j];
            let dot: f64 = a.iter().zip(b).map(|(u, w)| u * w).sum();
            let v = (dot / (sa * sb).sqrt()).clamp(-1.0, 1.0);
            r[(i, j)] = v;
            r[(j, i)] = v;
            let q = correlation_p_value(v, n);
            pv[(i, j)] = q;
            pv[(j, i)] = q;
        }
    }
    let mut d = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            if i != j {
                d[(i, j)] = (1.0 - r[(i, j)]).max(0.0);
            }
        }
    }
    let order = hclust(&d)?.order;
    Ok(CorrelationReport { r, p: pv, order, alpha })
}

/// Agglomerative clustering result. Merge `s` joins clusters `a` and `b`
/// at `height`; ids `< n` are leaves, id `n + s` is the cluster formed at
/// step `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub merges: Vec<(usize, usize, f64)>,
    pub order: Vec<usize>,
}

impl Dendrogram {
    /// Flat partition into `k` groups, labelled `0..k` by first appearance
    /// in leaf index order.
    pub fn cut(&self, k: usize) -> Vec<usize> {
        let n = self.order.len();
        let mut parent: Vec<usize> = (0..2 * n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let steps = n.saturating_sub(k.max(1));
        for (s, &(a, b, _)) in self.merges.iter().take(steps).enumerate() {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            parent[ra] = n + s;
            parent[rb] = n + s;
        }
        let mut labels = vec![usize::MAX; n];
        let mut roots: Vec<usize> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            let l = roots.iter().position(|&x| x == r).unwrap_or_else(|| {
                roots.push(r);
                roots.len() - 1
            });
            labels[i] = l;
        }
        labels
    }
}

fn check_dissimilarity(d: &Matrix) -> Result<(), AnalysisError> {
    let n = d.rows();
    if d.cols() != n {
        return Err(AnalysisError::MalformedDissimilarity);
    }
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return Err(AnalysisError::MalformedDissimilarity);
        }
        for j in 0..n {
            let v = d[(i, j)];
            let tol = 1e-12 * v.abs().max(1.0);
            if !v.is_finite() || v < 0.0 || (v - d[(j, i)]).abs() > tol {
                return Err(AnalysisError::MalformedDissimilarity);
            }
        }
    }
    Ok(())
}

/// Complete-linkage agglomerative clustering. At each step the closest
/// pair of active clusters is merged; ties go to the pair with the lowest
/// smallest-member indices. The leaf order lists the earlier-indexed
/// subtree first.
pub fn hclust(d: &Matrix) -> Result<Dendrogram, AnalysisError> {
    check_dissimilarity(d)?;
    let n = d.rows();
    if n == 0 {
        return Ok(Dendrogram { merges: Vec::new(), order: Vec::new() });
    }
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| d.row(i).to_vec()).collect();
    // Slot `i` holds the active cluster whose smallest member is `i`.
    let mut active: Vec<bool> = vec![true; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut children: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if active[j] && dist[i][j] < best.2 {
                    best = (i, j, dist[i][j]);
                }
            }
        }
        let (i, j, h) = best;
        merges.push((node_id[i], node_id[j], h));
        children.push((node_id[i], node_id[j]));
        for k in 0..n {
            if active[k] && k != i && k != j {
                let v = dist[i][k].max(dist[j][k]);
                dist[i][k] = v;
                dist[k][i] = v;
            }
        }
        active[j] = false;
        node_id[i] = n + step;
    }
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![if n == 1 { 0 } else { 2 * n - 2 }];
    while let Some(id) = stack.pop() {
        if id < n {
            order.push(id);
        } else {
            let (a, b) = children[id - n];
            stack.push(b);
            stack.push(a);
        }
    }
    Ok(Dendrogram { merges, order })
}

pub fn hclust_order(d: &Matrix) -> Result<Vec<usize>, AnalysisError> {
    Ok(hclust(d)?.order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_column_scales_to_half_root_two() {
        let x = Matrix::from_rows(&[vec![2.0], vec![4.0]]);
        let s = autoscale(&x).unwrap();
        assert!((s.matrix[(0, 0)] + core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.matrix[(1, 0)] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn constant_columns_dropped() {
        let x = Matrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 3.0], vec![4.0, 3.0]]);
        let s = autoscale(&x).unwrap();
        assert_eq!(s.kept, vec![0]);
        assert_eq!(s.dropped, vec![1]);
        let c = Matrix::from_rows(&[vec![3.0], vec![3.0]]);
        assert_eq!(autoscale(&c), Err(AnalysisError::AllConstantColumns));
    }

    #[test]
    fn rank_one_pca() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0], vec![5.0, 10.0]]);
        let s = autoscale(&x).unwrap();
        let p = pca(&s.matrix).unwrap();
        assert!((p.variance_explained[0] - 1.0).abs() < 1e-8);
        for k in 0..2 {
            let sum: f64 = (0..2).map(|j| p.contributions[(j, k)]).sum();
            assert!((sum - 100.0).abs() < 1e-6);
        }
    }

    #[test]
    fn tight_pairs_are_contiguous() {
        // Points 0 and 2 are close, as are 1 and 3.
        let d = Matrix::from_rows(&[
            vec![0.0, 5.0, 0.1, 6.0],
            vec![5.0, 0.0, 5.5, 0.2],
            vec![0.1, 5.5, 0.0, 5.8],
            vec![6.0, 0.2, 5.8, 0.0],
        ]);
        let h = hclust(&d).unwrap();
        assert_eq!(h.order, vec![0, 2, 1, 3]);
        assert_eq!(h.merges[0], (0, 2, 0.1));
        assert_eq!(h.merges[1], (1, 3, 0.2));
        assert_eq!(h.merges[2].2, 6.0);
        assert_eq!(h.cut(2), vec![0, 1, 0, 1]);
    }

    #[test]
    fn singleton_order() {
        let d = Matrix::zeros(1, 1);
        assert_eq!(hclust_order(&d).unwrap(), vec![0]);
    }

    #[test]
    fn malformed_dissimilarity() {
        let d = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]);
        assert_eq!(hclust(&d), Err(AnalysisError::MalformedDissimilarity));
    }

    #[test]
    fn self_and_antisymmetric_correlation() {
        let x = Matrix::from_rows(&[
            vec![1.0, -1.0, 0.3],
            vec![2.0, -2.0, 0.1],
            vec![4.0, -4.0, 0.9],
            vec![3.0, -3.0, 0.2],
            vec![7.0, -7.0, 0.5],
        ]);
        let c = correlation_report(&x, 0.05).unwrap();
        assert_eq!(c.r[(0, 0)], 1.0);
        assert_eq!(c.p[(0, 0)], 0.0);
        assert_eq!(c.r[(0, 1)], -1.0);
        assert_eq!(c.p[(0, 1)], 0.0);
    }
}

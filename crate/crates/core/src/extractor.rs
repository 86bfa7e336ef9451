//! Assembly of the 59 features into a fixed-order vector, and the
//! station-by-feature matrix built from many vectors.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::decomposition::StlOptions;
use crate::error::{AnalysisError, FeatureError};
use crate::features::correlation::{
    acf_suite, embed2_incircle, localsimple_tau, motiftwo_entro3, pacf_suite, spreadrandomlocal, trev_num,
    walker_propcross, LocalPredictor, SegmentRule, SPREAD_SEGMENTS,
};
use crate::features::distribution::{
    crossing_points, flat_spots, fluctanal_prop_r1, histogram_mode_10, outlierinclude_mdrmd, sampen_first,
    spectral_entropy, std1st_der, SAMPEN_M, SAMPEN_R,
};
use crate::features::model::{
    heterogeneity_suite, holt_winters_params, hurst_arfima, kpss_stat, nonlinearity_terasvirta, ARFIMA_TRUNCATION,
};
use crate::features::stl::stl_feature_suite;
use crate::features::window::{shift_suite, tiled_stats};
use crate::features::Feature;
use crate::linalg::Matrix;
use crate::rng::{fnv1a, series_seed};
use crate::series::{zscore, TimeSeries};
use crate::stats;

pub const N_FEATURES: usize = 59;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "x_acf1",
    "ac_9",
    "x_acf10",
    "diff1_acf1",
    "diff1_acf10",
    "diff2_acf1",
    "diff2_acf10",
    "seas_acf1",
    "firstzero_ac",
    "firstmin_ac",
    "embed2_incircle_1",
    "embed2_incircle_2",
    "trev_num",
    "motiftwo_entro3",
    "walker_propcross",
    "x_pacf5",
    "diff1x_pacf5",
    "diff2x_pacf5",
    "seas_pacf",
    "localsimple_mean1",
    "localsimple_lfitac",
    "sampen_first",
    "std1st_der",
    "spreadrandomlocal_meantaul_50",
    "spreadrandomlocal_meantaul_ac2",
    "histogram_mode_10",
    "outlierinclude_mdrmd",
    "fluctanal_prop_r1",
    "crossing_points",
    "entropy",
    "flat_spots",
    "arch_acf",
    "garch_acf",
    "arch_r2",
    "garch_r2",
    "alpha",
    "beta",
    "gamma",
    "lumpiness",
    "stability",
    "max_level_shift",
    "time_level_shift",
    "max_var_shift",
    "time_var_shift",
    "max_kl_shift",
    "time_kl_shift",
    "ARCH.LM",
    "nonlinearity",
    "unitroot_kpss",
    "hurst",
    "trend",
    "spike",
    "linearity",
    "curvature",
    "e_acf1",
    "e_acf10",
    "seasonal_strength",
    "peak",
    "trough",
];

/// Column index of a canonical feature name.
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// FNV-1a hash of the comma-joined column names; changes whenever the
/// schema does.
pub fn schema_hash() -> u64 {
    let mut joined = String::new();
    for (i, n) in FEATURE_NAMES.iter().enumerate() {
        if i > 0 {
            joined.push(',');
        }
        joined.push_str(n);
    }
    fnv1a(joined.as_bytes())
}

/// Admissible values of one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRange {
    pub lo: f64,
    pub hi: f64,
    /// Endpoints excluded.
    pub open: bool,
    pub integer: bool,
}

impl FeatureRange {
    const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, open: false, integer: false }
    }

    pub fn contains(&self, v: f64) -> bool {
        let inside = if self.open { v > self.lo && v < self.hi } else { v >= self.lo && v <= self.hi };
        inside && (!self.integer || v.fract() == 0.0)
    }
}

/// Range of feature `index` for a series of length `n` and seasonal
/// period `period`.
pub fn feature_range(index: usize, n: usize, period: usize) -> FeatureRange {
    const INF: f64 = f64::INFINITY;
    let nf = n as f64;
    let count = |lo: f64, hi: f64| FeatureRange { integer: true, ..FeatureRange::closed(lo, hi) };
    match FEATURE_NAMES[index] {
        "x_acf1" | "ac_9" | "diff1_acf1" | "diff2_acf1" | "seas_acf1" | "seas_pacf" | "e_acf1" => {
            FeatureRange::closed(-1.0, 1.0)
        }
        "x_acf10" | "diff1_acf10" | "diff2_acf10" | "e_acf10" => FeatureRange::closed(0.0, 10.0),
        "x_pacf5" | "diff1x_pacf5" | "diff2x_pacf5" => FeatureRange::closed(0.0, 5.0),
        "firstzero_ac" | "firstmin_ac" | "localsimple_mean1" | "localsimple_lfitac" => count(1.0, nf),
        "embed2_incircle_1" | "embed2_incircle_2" | "walker_propcross" | "fluctanal_prop_r1" | "entropy"
        | "arch_r2" | "garch_r2" | "ARCH.LM" | "alpha" | "beta" | "gamma" | "trend" | "seasonal_strength" => {
            FeatureRange::closed(0.0, 1.0)
        }
        "motiftwo_entro3" => FeatureRange::closed(0.0, 8f64.ln() + 1e-12),
        "outlierinclude_mdrmd" => FeatureRange::closed(-0.5, 0.5),
        "crossing_points" => count(0.0, nf - 1.0),
        "flat_spots" => count(1.0, nf),
        "arch_acf" | "garch_acf" => FeatureRange::closed(0.0, 12.0),
        "time_level_shift" | "time_var_shift" | "time_kl_shift" => count(period as f64, nf - period as f64),
        "spreadrandomlocal_meantaul_50" | "spreadrandomlocal_meantaul_ac2" => FeatureRange::closed(1.0, nf),
        "hurst" => FeatureRange { open: true, ..FeatureRange::closed(0.0, 1.0) },
        "peak" | "trough" => count(1.0, period as f64),
        "sampen_first" | "std1st_der" | "lumpiness" | "stability" | "max_level_shift" | "max_var_shift"
        | "max_kl_shift" | "nonlinearity" | "unitroot_kpss" | "spike" => FeatureRange::closed(0.0, INF),
        _ => FeatureRange::closed(-INF, INF),
    }
}

/// User-facing extraction settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtractionParams {
    pub master_seed: u64,
    /// STL settings; `None` uses [`StlOptions::for_period`].
    pub stl: Option<StlOptions>,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        Self { master_seed: 42, stl: None }
    }
}

/// Every setting that influenced a vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub master_seed: u64,
    pub series_seed: u64,
    pub stl: StlOptions,
    pub sampen_m: usize,
    pub sampen_r: f64,
    pub spread_segments: usize,
    pub arfima_truncation: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    id: String,
    values: Vec<Option<f64>>,
    errors: Vec<Option<FeatureError>>,
    provenance: Provenance,
}

impl FeatureVector {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Values in [`FEATURE_NAMES`] order; `None` marks a missing feature.
    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// `true` where the value is present (and finite).
    pub fn mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_some).collect()
    }

    /// Why each missing value is missing.
    pub fn errors(&self) -> &[Option<FeatureError>] {
        &self.errors
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).and_then(|i| self.values[i])
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

pub fn extract_all(ts: &TimeSeries, master_seed: u64) -> FeatureVector {
    extract_all_with(ts, &ExtractionParams { master_seed, stl: None })
}

pub fn extract_all_with(ts: &TimeSeries, params: &ExtractionParams) -> FeatureVector {
    let period = ts.period();
    let stl = params.stl.unwrap_or_else(|| StlOptions::for_period(period));
    let seed = series_seed(params.master_seed, ts.id());
    let provenance = Provenance {
        master_seed: params.master_seed,
        series_seed: seed,
        stl,
        sampen_m: SAMPEN_M,
        sampen_r: SAMPEN_R,
        spread_segments: SPREAD_SEGMENTS,
        arfima_truncation: ARFIMA_TRUNCATION,
    };
    let raw = match zscore(ts.values()) {
        Ok(z) => compute(&z, period, &stl, seed),
        Err(e) => vec![Err(e); N_FEATURES],
    };
    let mut values = Vec::with_capacity(N_FEATURES);
    let mut errors = Vec::with_capacity(N_FEATURES);
    for f in raw {
        match f {
            Ok(v) if v.is_finite() => {
                values.push(Some(v));
                errors.push(None);
            }
            Ok(_) => {
                values.push(None);
                errors.push(Some(FeatureError::Undefined));
            }
            Err(e) => {
                values.push(None);
                errors.push(Some(e));
            }
        }
    }
    FeatureVector { id: ts.id().to_string(), values, errors, provenance }
}

fn compute(z: &[f64], period: usize, stl: &StlOptions, seed: u64) -> Vec<Feature> {
    let mut out: Vec<Feature> = Vec::with_capacity(N_FEATURES);
    let acf = acf_suite(z, period);
    out.extend([
        acf.x_acf1,
        acf.ac_9,
        acf.x_acf10,
        acf.diff1_acf1,
        acf.diff1_acf10,
        acf.diff2_acf1,
        acf.diff2_acf10,
        acf.seas_acf1,
        acf.firstzero_ac,
        acf.firstmin_ac,
    ]);
    out.extend([
        embed2_incircle(z, 1.0),
        embed2_incircle(z, 2.0),
        trev_num(z),
        motiftwo_entro3(z),
        walker_propcross(z),
    ]);
    let pacf = pacf_suite(z, period);
    out.extend([pacf.x_pacf5, pacf.diff1x_pacf5, pacf.diff2x_pacf5, pacf.seas_pacf]);
    out.extend([
        localsimple_tau(z, LocalPredictor::Mean1),
        localsimple_tau(z, LocalPredictor::Lfit3),
        sampen_first(z),
        std1st_der(z),
        spreadrandomlocal(z, SegmentRule::Fixed50, seed),
        spreadrandomlocal(z, SegmentRule::Ac2, seed),
        histogram_mode_10(z),
        outlierinclude_mdrmd(z),
        fluctanal_prop_r1(z),
        crossing_points(z),
        spectral_entropy(z),
        flat_spots(z),
    ]);
    let het = heterogeneity_suite(z);
    out.extend([het.arch_acf, het.garch_acf, het.arch_r2, het.garch_r2]);
    let hw = holt_winters_params(z, period);
    out.extend([hw.map(|h| h.alpha), hw.map(|h| h.beta), hw.map(|h| h.gamma)]);
    let tiled = tiled_stats(z, period);
    out.extend([tiled.map(|t| t.lumpiness), tiled.map(|t| t.stability)]);
    let shift = shift_suite(z, period);
    out.extend([
        shift.map(|s| s.max_level_shift),
        shift.map(|s| s.time_level_shift as f64),
        shift.map(|s| s.max_var_shift),
        shift.map(|s| s.time_var_shift as f64),
        shift.map(|s| s.max_kl_shift),
        shift.map(|s| s.time_kl_shift as f64),
    ]);
    out.extend([het.arch_lm, nonlinearity_terasvirta(z), kpss_stat(z), hurst_arfima(z, period).map(|h| h.hurst)]);
    let s = stl_feature_suite(z, stl);
    out.extend([
        s.trend,
        s.spike,
        s.linearity,
        s.curvature,
        s.e_acf1,
        s.e_acf10,
        s.seasonal_strength,
        s.peak,
        s.trough,
    ]);
    debug_assert_eq!(out.len(), N_FEATURES);
    out
}

/// Rows of feature values keyed by unique ids, with missing entries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureMatrix {
    ids: Vec<String>,
    columns: Vec<String>,
    data: Vec<Option<f64>>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<String>) -> Self {
        Self { ids: Vec::new(), columns, data: Vec::new() }
    }

    /// An empty matrix with the canonical 59 columns.
    pub fn canonical() -> Self {
        Self::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect())
    }

    pub fn from_vectors<'a, I>(vectors: I) -> Result<Self, AnalysisError>
    where
        I: IntoIterator<Item = &'a FeatureVector>,
    {
        let mut m = Self::canonical();
        for v in vectors {
            m.push_row(v.id(), v.values())?;
        }
        Ok(m)
    }

    /// A complete matrix from dense rows.
    pub fn from_dense(ids: Vec<String>, columns: Vec<String>, dense: &Matrix) -> Result<Self, AnalysisError> {
        if dense.rows() != ids.len() {
            return Err(AnalysisError::RowLength { got: dense.rows(), expected: ids.len() });
        }
        let mut m = Self::new(columns);
        for (i, id) in ids.iter().enumerate() {
            let row: Vec<Option<f64>> = dense.row(i).iter().map(|v| Some(*v)).collect();
            m.push_row(id, &row)?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, id: &str, values: &[Option<f64>]) -> Result<(), AnalysisError> {
        if values.len() != self.columns.len() {
            return Err(AnalysisError::RowLength { got: values.len(), expected: self.columns.len() });
        }
        if self.ids.iter().any(|i| i == id) {
            return Err(AnalysisError::DuplicateId(id.to_string()));
        }
        self.ids.push(id.to_string());
        self.data.extend(values.iter().map(|v| v.filter(|x| x.is_finite())));
        Ok(())
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.data[row * self.columns.len() + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let p = self.columns.len();
        &self.data[row * p..(row + 1) * p]
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn missing_count(&self) -> usize {
        self.data.iter().filter(|v| v.is_none()).count()
    }

    /// Dense copy; fails if anything is missing.
    pub fn to_dense(&self) -> Result<Matrix, AnalysisError> {
        let data: Option<Vec<f64>> = self.data.iter().copied().collect();
        data.map(|d| Matrix::from_row_major(self.n_rows(), self.n_cols(), d)).ok_or(AnalysisError::MissingValues)
    }

    /// Keep only the named columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.n_rows() * keep.len());
        for r in 0..self.n_rows() {
            data.extend(keep.iter().map(|&c| self.get(r, c)));
        }
        Self { ids: self.ids.clone(), columns: keep.iter().map(|&c| self.columns[c].clone()).collect(), data }
    }

    /// Keep only the given rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut data = Vec::with_capacity(keep.len() * self.n_cols());
        for &r in keep {
            data.extend_from_slice(self.row(r));
        }
        Self { ids: keep.iter().map(|&r| self.ids[r].clone()).collect(), columns: self.columns.clone(), data }
    }
}

/// Replace missing entries by their column median. Returns the completed
/// matrix and the number of imputed entries.
pub fn impute_missing(m: &FeatureMatrix) -> Result<(FeatureMatrix, usize), AnalysisError> {
    let mut out = m.clone();
    let p = m.n_cols();
    let mut count = 0;
    for c in 0..p {
        let present: Vec<f64> = m.column(c).into_iter().flatten().collect();
        if present.len() == m.n_rows() {
            continue;
        }
        if present.is_empty() {
            return Err(AnalysisError::AllMissingColumn(m.columns[c].clone()));
        }
        let med = stats::median(&present);
        for r in 0..m.n_rows() {
            let slot = &mut out.data[r * p + c];
            if slot.is_none() {
                *slot = Some(med);
                count += 1;
            }
        }
    }
    Ok((out, count))
}

/// Ids that occur more than once.
pub fn duplicate_ids(ids: &[String]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut dup = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            dup.insert(id.clone());
        }
    }
    dup.into_iter().collect()
}

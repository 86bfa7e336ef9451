//! The `geofeat` command line: `extract`, `pca`, `corr`, `cluster`,
//! `interpolate` and `report`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use geofeat_core::cluster::{BBox, ClusterParams};
use geofeat_core::forest::ForestParams;
use geofeat_core::linalg::Matrix;
use geofeat_core::statlearn::{autoscale, correlation_report, pca};
use geofeat_core::stats::{mean, quantile_sorted};
use geofeat_core::{impute_missing, ExtractionParams, FeatureMatrix, TimeSeries, FEATURE_NAMES};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::batch;
use crate::config::merge_config;
use crate::error::CliError;
use crate::ingest::{
    parse_long_csv, parse_station_metadata, qc_screen, select_complete_window, Element, GhcnStations, QcPolicy,
    StationMeta, StationRecord, WindowRules,
};
use crate::io::{
    features_csv, fmt_f64, fmt_opt, read_artifact, read_clusters, read_features, sibling, write_atomic, write_clusters,
    write_csv, write_json, ClusterRow, Meta,
};

#[derive(Debug, Parser)]
#[command(name = "geofeat", version, about = "Feature-based analysis of seasonal station time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select complete windows from station data and compute the feature matrix.
    Extract(ExtractArgs),
    /// Principal components of the auto-scaled feature matrix.
    Pca(PcaArgs),
    /// Feature correlogram ordered by hierarchical clustering.
    Corr(CorrArgs),
    /// Unsupervised random-forest clustering of the stations.
    Cluster(ClusterArgs),
    /// Spatial interpolation of cluster labels onto a lattice.
    Interpolate(InterpolateArgs),
    /// Plot-ready summary tables.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Ghcnm4,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QcMode {
    Strict,
    Tolerant,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Station data file; repeat for several files.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub format: InputFormat,
    /// Inventory or `id,latitude,longitude` CSV. For GHCN input a sibling
    /// `.inv` file is used when present.
    #[arg(long)]
    pub stations: Option<PathBuf>,
    #[arg(long, default_value = "TAVG", value_parser = parse_element)]
    pub element: Element,
    #[arg(long, value_enum, default_value_t = QcMode::Strict)]
    pub qc: QcMode,
    #[arg(long, default_value_t = 12)]
    pub period: usize,
    #[arg(long, default_value_t = 40)]
    pub window_years: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// `key = value` file supplying any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Components with per-station scores in the report.
    #[arg(long, default_value_t = 3)]
    pub scores: usize,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Station coordinates; defaults to the `.stations.csv` written by `extract`.
    #[arg(long)]
    pub stations: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 5000)]
    pub trees: usize,
    #[arg(long)]
    pub mtry: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `importance.csv` next to `--out`.
    #[arg(long)]
    pub importance: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub clusters: PathBuf,
    /// Lattice step in degrees.
    #[arg(long, default_value_t = 0.5)]
    pub grid: f64,
    /// Degrees added around the station hull.
    #[arg(long, default_value_t = 2.0)]
    pub pad: f64,
    #[arg(long, default_value_t = 500)]
    pub trees: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub clusters: PathBuf,
    /// Defaults to the `.series.csv` written by `extract`.
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_element(s: &str) -> Result<Element, String> {
    Element::parse(&s.to_ascii_uppercase()).ok_or_else(|| format!("unknown element `{s}` (TAVG, TMAX, TMIN, PRCP)"))
}

/// Parse `args`, run the command and return the process exit status.
pub fn run(args: Vec<OsString>) -> i32 {
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("geofeat: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { CliError::USAGE } else { 0 };
        }
    };
    match catch_unwind(AssertUnwindSafe(|| dispatch(cli.command))) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("geofeat: {e}");
            e.exit_code()
        }
        Err(_) => CliError::INTERNAL,
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Extract(a) => extract(&a),
        Command::Pca(a) => cmd_pca(&a),
        Command::Corr(a) => cmd_corr(&a),
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Interpolate(a) => cmd_interpolate(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    batch::thread_pool(threads).map_err(|e| CliError::Internal(e.to_string()))
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn load_stations(path: &Path) -> Result<BTreeMap<String, StationMeta>, CliError> {
    let bytes = read_artifact(path)?;
    parse_station_metadata(bytes.as_slice()).map_err(|e| CliError::ingest(path, e))
}

struct Selected {
    ts: TimeSeries,
    latitude: Option<f64>,
    longitude: Option<f64>,
    elevation: Option<f64>,
    name: Option<String>,
}

enum Outcome {
    Selected(Box<Selected>),
    Skipped { id: String, reason: String },
}

fn screen(record: StationRecord, rules: &WindowRules, stations: &BTreeMap<String, StationMeta>) -> Outcome {
    let record = match stations.get(&record.id) {
        Some(m) => record.with_meta(m),
        None => record,
    };
    let Some(ts) = select_complete_window(&record, rules) else {
        return Outcome::Skipped { id: record.id, reason: format!("no complete {}-year window", rules.window_years) };
    };
    if let Err(r) = qc_screen(&ts) {
        return Outcome::Skipped { id: record.id, reason: r.to_string() };
    }
    Outcome::Selected(Box::new(Selected {
        ts,
        latitude: record.latitude,
        longitude: record.longitude,
        elevation: record.elevation,
        name: record.name,
    }))
}

fn load_input(
    path: &Path,
    format: InputFormat,
    element: Element,
    rules: &WindowRules,
    stations: &BTreeMap<String, StationMeta>,
) -> Result<Vec<Outcome>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("cannot read `{}`: {e}", path.display())))?;
    let reader = BufReader::new(file);
    match format {
        InputFormat::Ghcnm4 => GhcnStations::new(reader, element)
            .map(|r| r.map(|rec| screen(rec, rules, stations)).map_err(|e| CliError::ingest(path, e)))
            .collect(),
        InputFormat::Csv => Ok(parse_long_csv(reader)
            .map_err(|e| CliError::ingest(path, e))?
            .into_iter()
            .map(|rec| screen(rec, rules, stations))
            .collect()),
    }
}

#[derive(Serialize)]
struct Skipped {
    id: String,
    reason: String,
}

#[derive(Serialize)]
struct FeatureFailure {
    feature: &'static str,
    error: String,
}

#[derive(Serialize)]
struct SeriesFailures {
    id: String,
    failures: Vec<FeatureFailure>,
}

#[derive(Serialize)]
struct ExtractionSettings {
    master_seed: u64,
    stl: geofeat_core::decomposition::StlOptions,
    sampen_m: usize,
    sampen_r: f64,
    spread_segments: usize,
    arfima_truncation: usize,
}

#[derive(Serialize)]
struct ExtractSidecar {
    meta: Meta,
    window: WindowRules,
    extraction: Option<ExtractionSettings>,
    n_series: usize,
    n_skipped: usize,
    missing_by_feature: BTreeMap<&'static str, usize>,
    feature_failures: Vec<SeriesFailures>,
    skipped: Vec<Skipped>,
}

pub fn extract(a: &ExtractArgs) -> Result<(), CliError> {
    if a.period < 2 {
        return Err(CliError::Usage("--period must be at least 2".into()));
    }
    if a.window_years == 0 {
        return Err(CliError::Usage("--window-years must be at least 1".into()));
    }
    let pool = pool(a.threads)?;
    let stations_path = a.stations.clone().or_else(|| match (a.format, a.input.as_slice()) {
        (InputFormat::Ghcnm4, [one]) => Some(one.with_extension("inv")).filter(|p| p.is_file()),
        _ => None,
    });
    let stations = match &stations_path {
        Some(p) => load_stations(p)?,
        None => BTreeMap::new(),
    };
    let rules = WindowRules {
        window_years: a.window_years,
        period: a.period,
        qc: match a.qc {
            QcMode::Strict => QcPolicy::Strict,
            QcMode::Tolerant => QcPolicy::Tolerant,
        },
        ..WindowRules::default()
    };
    let per_file: Vec<Result<Vec<Outcome>, CliError>> =
        pool.install(|| a.input.par_iter().map(|p| load_input(p, a.format, a.element, &rules, &stations)).collect());
    let mut selected = Vec::new();
    let mut skipped = Vec::new();
    let mut seen = HashSet::new();
    for file in per_file {
        for o in file? {
            match o {
                Outcome::Selected(s) => {
                    if !seen.insert(s.ts.id().to_string()) {
                        return Err(CliError::Data(format!("station `{}` appears in more than one input", s.ts.id())));
                    }
                    selected.push(*s);
                }
                Outcome::Skipped { id, reason } => skipped.push(Skipped { id, reason }),
            }
        }
    }
    if selected.is_empty() {
        return Err(CliError::Data(format!(
            "no station passed selection ({} skipped, e.g. {})",
            skipped.len(),
            skipped.first().map_or("none".to_string(), |s| format!("`{}`: {}", s.id, s.reason))
        )));
    }

    let series: Vec<TimeSeries> = selected.iter().map(|s| s.ts.clone()).collect();
    let xparams = ExtractionParams { master_seed: a.seed, stl: None };
    let vectors = batch::extract_batch(&series, &xparams, &pool);
    let matrix = FeatureMatrix::from_vectors(&vectors).map_err(|e| CliError::Internal(e.to_string()))?;

    let meta = Meta::new(
        "extract",
        params(&[
            ("input", a.input.iter().map(|p| path_str(p)).collect::<Vec<_>>().join(";")),
            ("format", format!("{:?}", a.format).to_lowercase()),
            ("stations", stations_path.as_deref().map(path_str).unwrap_or_default()),
            ("element", a.element.code().to_string()),
            ("qc", format!("{:?}", a.qc).to_lowercase()),
            ("period", a.period.to_string()),
            ("window-years", a.window_years.to_string()),
            ("seed", a.seed.to_string()),
        ]),
    );

    let mut missing_by_feature = BTreeMap::new();
    let mut feature_failures = Vec::new();
    for v in &vectors {
        let failures: Vec<FeatureFailure> = v
            .errors()
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|e| FeatureFailure { feature: FEATURE_NAMES[i], error: e.to_string() }))
            .collect();
        for f in &failures {
            *missing_by_feature.entry(f.feature).or_insert(0) += 1;
        }
        if !failures.is_empty() {
            feature_failures.push(SeriesFailures { id: v.id().to_string(), failures });
        }
    }
    let extraction = vectors.first().map(|v| {
        let p = v.provenance();
        ExtractionSettings {
            master_seed: p.master_seed,
            stl: p.stl,
            sampen_m: p.sampen_m,
            sampen_r: p.sampen_r,
            spread_segments: p.spread_segments,
            arfima_truncation: p.arfima_truncation,
        }
    });
    let sidecar = ExtractSidecar {
        meta: meta.clone(),
        window: rules,
        extraction,
        n_series: selected.len(),
        n_skipped: skipped.len(),
        missing_by_feature,
        feature_failures,
        skipped,
    };

    write_csv(
        &sibling(&a.out, "stations.csv"),
        &meta,
        &["id", "latitude", "longitude", "elevation", "name"],
        selected.iter().filter(|s| s.latitude.is_some() && s.longitude.is_some()).map(|s| {
            vec![
                s.ts.id().to_string(),
                fmt_opt(s.latitude),
                fmt_opt(s.longitude),
                fmt_opt(s.elevation),
                s.name.clone().unwrap_or_default().replace(',', ";"),
            ]
        }),
    )?;
    write_csv(
        &sibling(&a.out, "series.csv"),
        &meta,
        &["id", "date", "value"],
        selected.iter().flat_map(|s| {
            let ts = &s.ts;
            ts.values()
                .iter()
                .enumerate()
                .map(|(k, v)| vec![ts.id().to_string(), ts.start().plus_months(k as i64).to_string(), fmt_f64(*v)])
                .collect::<Vec<_>>()
        }),
    )?;
    write_json(&sibling(&a.out, "meta.json"), &sidecar)?;
    write_atomic(&a.out, features_csv(&matrix, &meta).as_bytes())?;
    eprintln!(
        "geofeat: extracted {} series, skipped {}, {} missing feature values",
        sidecar.n_series,
        sidecar.n_skipped,
        matrix.missing_count()
    );
    Ok(())
}

/// Imputed, dense feature matrix.
fn dense_features(path: &Path) -> Result<(FeatureMatrix, Matrix, usize), CliError> {
    let m = read_features(path)?;
    if m.n_rows() == 0 {
        return Err(CliError::Data(format!("`{}` has no rows", path.display())));
    }
    let (filled, imputed) = impute_missing(&m)?;
    let dense = filled.to_dense()?;
    Ok((m, dense, imputed))
}

#[derive(Serialize)]
struct Contribution {
    feature: String,
    percent: f64,
}

#[derive(Serialize)]
struct Component {
    component: usize,
    eigenvalue: f64,
    variance_explained: f64,
    contributions: Vec<Contribution>,
}

#[derive(Serialize)]
struct Loading {
    feature: String,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct Score {
    id: String,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct PcaReport {
    meta: Meta,
    n_series: usize,
    imputed: usize,
    features: Vec<String>,
    dropped_constant: Vec<String>,
    eigenvalues: Vec<f64>,
    variance_explained: Vec<f64>,
    cumulative_variance: Vec<f64>,
    components: Vec<Component>,
    loadings: Vec<Loading>,
    scores: Vec<Score>,
}

pub fn cmd_pca(a: &PcaArgs) -> Result<(), CliError> {
    let (m, dense, imputed) = dense_features(&a.features)?;
    let scaled = autoscale(&dense)?;
    let p = pca(&scaled.matrix)?;
    let names: Vec<String> = scaled.kept.iter().map(|&c| m.columns()[c].clone()).collect();
    let k = p.n_components();
    let n_scores = a.scores.min(k);
    let mut cumulative = Vec::with_capacity(k);
    let mut acc = 0.0;
    for v in &p.variance_explained {
        acc += v;
        cumulative.push(acc);
    }
    let report = PcaReport {
        meta: Meta::new("pca", params(&[("features", path_str(&a.features)), ("scores", a.scores.to_string())])),
        n_series: m.n_rows(),
        imputed,
        features: names.clone(),
        dropped_constant: scaled.dropped.iter().map(|&c| m.columns()[c].clone()).collect(),
        eigenvalues: p.eigenvalues.clone(),
        variance_explained: p.variance_explained.clone(),
        cumulative_variance: cumulative,
        components: (0..k)
            .map(|c| Component {
                component: c + 1,
                eigenvalue: p.eigenvalues[c],
                variance_explained: p.variance_explained[c],
                contributions: p
                    .ranked_contributions(c)
                    .into_iter()
                    .map(|(j, percent)| Contribution { feature: names[j].clone(), percent })
                    .collect(),
            })
            .collect(),
        loadings: names
            .iter()
            .enumerate()
            .map(|(j, f)| Loading { feature: f.clone(), values: p.loadings.row(j).to_vec() })
            .collect(),
        scores: m
            .ids()
            .iter()
            .enumerate()
            .map(|(i, id)| Score { id: id.clone(), values: p.scores.row(i)[..n_scores].to_vec() })
            .collect(),
    };
    write_json(&a.out, &report).map_err(CliError::from)
}

pub fn cmd_corr(a: &CorrArgs) -> Result<(), CliError> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage("--alpha must be in (0, 1)".into()));
    }
    let (m, dense, imputed) = dense_features(&a.features)?;
    let scaled = autoscale(&dense)?;
    let rep = correlation_report(&scaled.matrix, a.alpha)?;
    let names: Vec<&str> = scaled.kept.iter().map(|&c| m.columns()[c].as_str()).collect();
    let meta = Meta::new(
        "corr",
        params(&[
            ("features", path_str(&a.features)),
            ("alpha", fmt_f64(a.alpha)),
            ("linkage", "complete".into()),
            ("imputed", imputed.to_string()),
        ]),
    );
    let mut header = vec!["matrix", "feature"];
    header.extend(rep.order.iter().map(|&j| names[j]));
    let mut rows = Vec::new();
    for (label, mat) in [("r", &rep.r), ("p", &rep.p)] {
        for &i in &rep.order {
            let mut row = vec![label.to_string(), names[i].to_string()];
            row.extend(rep.order.iter().map(|&j| fmt_f64(mat[(i, j)])));
            rows.push(row);
        }
    }
    write_csv(&a.out, &meta, &header, rows).map_err(CliError::from)
}

fn coordinates_for(
    ids: &[String],
    stations: Option<&BTreeMap<String, StationMeta>>,
) -> Vec<(Option<f64>, Option<f64>)> {
    ids.iter()
        .map(|id| match stations.and_then(|s| s.get(id)) {
            Some(m) => (Some(m.latitude), Some(m.longitude)),
            None => (None, None),
        })
        .collect()
}

pub fn cmd_cluster(a: &ClusterArgs) -> Result<(), CliError> {
    if a.trees == 0 {
        return Err(CliError::Usage("--trees must be at least 1".into()));
    }
    let pool = pool(a.threads)?;
    let (m, dense, imputed) = dense_features(&a.features)?;
    if a.k == 0 || a.k > m.n_rows() {
        return Err(CliError::Data(format!("--k {} needs between 1 and {} stations", a.k, m.n_rows())));
    }
    let stations_path =
        a.stations.clone().or_else(|| Some(sibling(&a.features, "stations.csv")).filter(|p| p.is_file()));
    let stations = match &stations_path {
        Some(p) => Some(load_stations(p)?),
        None => None,
    };
    let params_ = ClusterParams {
        k: a.k,
        forest: ForestParams { n_trees: a.trees, mtry: a.mtry, seed: a.seed, ..ForestParams::default() },
    };
    let (assign, forest) = batch::cluster(&dense, &params_, &pool)?;
    let meta = Meta::new(
        "cluster",
        params(&[
            ("features", path_str(&a.features)),
            ("stations", stations_path.as_deref().map(path_str).unwrap_or_default()),
            ("k", a.k.to_string()),
            ("trees", a.trees.to_string()),
            ("mtry", forest.mtry.to_string()),
            ("seed", a.seed.to_string()),
            ("imputed", imputed.to_string()),
            ("partition", "pam".into()),
            ("converged", assign.converged.to_string()),
            ("oob_accuracy", forest.oob_accuracy.map(fmt_f64).unwrap_or_default()),
        ]),
    );
    let coords = coordinates_for(m.ids(), stations.as_ref());
    let rows: Vec<ClusterRow> = m
        .ids()
        .iter()
        .zip(&coords)
        .zip(&assign.labels)
        .map(|((id, &(lat, lon)), &label)| ClusterRow { id: id.clone(), lat, lon, label })
        .collect();
    let importance_path = a.importance.clone().unwrap_or_else(|| a.out.with_file_name("importance.csv"));
    write_csv(
        &importance_path,
        &meta,
        &["rank", "feature", "score"],
        forest
            .ranked_importance()
            .into_iter()
            .enumerate()
            .map(|(r, (j, s))| vec![(r + 1).to_string(), m.columns()[j].clone(), fmt_f64(s)]),
    )?;
    write_clusters(&a.out, &meta, &rows)?;
    Ok(())
}

pub fn cmd_interpolate(a: &InterpolateArgs) -> Result<(), CliError> {
    if a.grid.is_nan() || a.grid <= 0.0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    if a.pad.is_nan() || a.pad < 0.0 {
        return Err(CliError::Usage("--pad must be non-negative".into()));
    }
    if a.trees == 0 {
        return Err(CliError::Usage("--trees must be at least 1".into()));
    }
    let pool = pool(a.threads)?;
    let rows = read_clusters(&a.clusters)?;
    let located: Vec<(f64, f64, usize)> = rows.iter().filter_map(|r| Some((r.lat?, r.lon?, r.label))).collect();
    if located.len() < 2 {
        return Err(CliError::Data(format!(
            "`{}` needs at least two stations with coordinates, found {}",
            a.clusters.display(),
            located.len()
        )));
    }
    let pts: Vec<(f64, f64)> = located.iter().map(|s| (s.0, s.1)).collect();
    let bbox = BBox::around(&pts, a.pad);
    let fparams = ForestParams { n_trees: a.trees, seed: a.seed, ..ForestParams::default() };
    let (grid, _) = batch::spatial_interpolate(&located, a.grid, bbox, &fparams, &pool)?;
    let meta = Meta::new(
        "interpolate",
        params(&[
            ("clusters", path_str(&a.clusters)),
            ("grid", fmt_f64(a.grid)),
            ("pad", fmt_f64(a.pad)),
            ("trees", a.trees.to_string()),
            ("seed", a.seed.to_string()),
            ("stations_used", located.len().to_string()),
        ]),
    );
    let features: Vec<serde_json::Value> = grid
        .nodes
        .iter()
        .map(|n| {
            let votes: serde_json::Map<String, serde_json::Value> =
                grid.classes.iter().zip(&n.votes).map(|(c, v)| (c.to_string(), json!(v))).collect();
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [n.lon, n.lat] },
                "properties": { "label": n.label, "votes": votes },
            })
        })
        .collect();
    let b = grid.bbox;
    let doc = json!({
        "type": "FeatureCollection",
        "bbox": [b.lon_min, b.lat_min, b.lon_max, b.lat_max],
        "meta": meta,
        "features": features,
    });
    write_json(&a.out, &doc).map_err(CliError::from)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiveNumber {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            n: v.len(),
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
            mean: mean(&v),
        })
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_f64(self.min),
            fmt_f64(self.q1),
            fmt_f64(self.median),
            fmt_f64(self.q3),
            fmt_f64(self.max),
            fmt_f64(self.mean),
        ]
    }
}

const FIVE_HEADER: [&str; 7] = ["n", "min", "q1", "median", "q3", "max", "mean"];

/// Equal-width bins over `[min, max]`; the last bin is closed. A constant
/// column yields a single bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![(lo, hi, values.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (lo + width * b as f64, if b + 1 == bins { hi } else { lo + width * (b + 1) as f64 }, c))
        .collect()
}

pub fn cmd_report(a: &ReportArgs) -> Result<(), CliError> {
    if a.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let m = read_features(&a.features)?;
    let clusters = read_clusters(&a.clusters)?;
    let series_path = a.series.clone().unwrap_or_else(|| sibling(&a.features, "series.csv"));
    let series_bytes = read_artifact(&series_path)?;
    let records = parse_long_csv(series_bytes.as_slice()).map_err(|e| CliError::ingest(&series_path, e))?;

    let row_of: HashMap<&str, usize> = m.ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for c in &clusters {
        let r = *row_of.get(c.id.as_str()).ok_or_else(|| {
            CliError::Data(format!(
                "`{}` lists `{}`, which is not in `{}`",
                a.clusters.display(),
                c.id,
                a.features.display()
            ))
        })?;
        members.entry(c.label).or_default().push(r);
    }
    let label_of: HashMap<&str, usize> = clusters.iter().map(|c| (c.id.as_str(), c.label)).collect();

    let meta = Meta::new(
        "report",
        params(&[
            ("features", path_str(&a.features)),
            ("clusters", path_str(&a.clusters)),
            ("series", path_str(&series_path)),
            ("bins", a.bins.to_string()),
        ]),
    );

    let mut hist_rows = Vec::new();
    for (j, name) in m.columns().iter().enumerate() {
        let present: Vec<f64> = m.column(j).into_iter().flatten().collect();
        for (b, (lo, hi, count)) in histogram(&present, a.bins).into_iter().enumerate() {
            hist_rows.push(vec![name.clone(), (b + 1).to_string(), fmt_f64(lo), fmt_f64(hi), count.to_string()]);
        }
    }

    let mut feature_rows = Vec::new();
    for (label, rows) in &members {
        for (j, name) in m.columns().iter().enumerate() {
            let present: Vec<f64> = rows.iter().filter_map(|&r| m.get(r, j)).collect();
            if let Some(s) = FiveNumber::of(&present) {
                let mut row = vec![label.to_string(), name.clone()];
                row.extend(s.cells());
                feature_rows.push(row);
            }
        }
    }

    let mut monthly: BTreeMap<(usize, u32), Vec<f64>> = BTreeMap::new();
    for rec in &records {
        if let Some(&label) = label_of.get(rec.id.as_str()) {
            for (ym, obs) in &rec.monthly {
                if let Some(v) = obs.value {
                    monthly.entry((label, ym.month())).or_default().push(v);
                }
            }
        }
    }
    let monthly_rows: Vec<Vec<String>> = monthly
        .iter()
        .filter_map(|((label, month), v)| {
            let mut row = vec![label.to_string(), month.to_string()];
            row.extend(FiveNumber::of(v)?.cells());
            Some(row)
        })
        .collect();

    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Data(format!("cannot create `{}`: {e}", a.out_dir.display())))?;
    write_csv(
        &a.out_dir.join("report_histograms.csv"),
        &meta,
        &["feature", "bin", "lower", "upper", "count"],
        hist_rows,
    )?;
    let mut header = vec!["cluster", "feature"];
    header.extend(FIVE_HEADER);
    write_csv(&a.out_dir.join("report_cluster_features.csv"), &meta, &header, feature_rows)?;
    let mut header = vec!["cluster", "month"];
    header.extend(FIVE_HEADER);
    write_csv(&a.out_dir.join("report_cluster_monthly.csv"), &meta, &header, monthly_rows)?;
    Ok(())
}

//! Artifact files: feature matrices, cluster tables and their provenance.
//! CSV artifacts start with one `#` line carrying the tool version and
//! parameters; JSON artifacts carry the same in a `meta` object.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use geofeat_core::extractor::schema_hash;
use geofeat_core::{FeatureMatrix, FEATURE_NAMES};
use serde::Serialize;

pub const TOOL: &str = "geofeat";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("missing upstream artifact `{}`", path.display())]
    Missing { path: PathBuf },
    #[error("`{}`: schema mismatch: {reason}", path.display())]
    Schema { path: PathBuf, reason: String },
    #[error("`{}` line {line}: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("`{}`: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

/// Tool version plus the parameter snapshot of one command run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub schema_hash: String,
    pub params: BTreeMap<String, String>,
}

impl Meta {
    pub fn new(command: &str, params: BTreeMap<String, String>) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            schema_hash: format!("{:016x}", schema_hash()),
            params,
        }
    }

    pub fn comment_line(&self) -> String {
        let mut s = format!("# {} {} {} schema={}", self.tool, self.version, self.command, self.schema_hash);
        for (k, v) in &self.params {
            if v.contains(char::is_whitespace) || v.is_empty() {
                let _ = write!(s, " {k}={v:?}");
            } else {
                let _ = write!(s, " {k}={v}");
            }
        }
        s.push('\n');
        s
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ArtifactError> {
    let io_err = |source| ArtifactError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn read_artifact(path: &Path) -> Result<Vec<u8>, ArtifactError> {
    fs::read(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            ArtifactError::Missing { path: path.to_path_buf() }
        } else {
            ArtifactError::Io { path: path.to_path_buf(), source }
        }
    })
}

/// `name.ext` -> `name.<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_text(meta: &Meta, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    meta.comment_line() + &body
}

/// CSV with the meta comment line and a header row.
pub fn write_csv(
    path: &Path,
    meta: &Meta,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), ArtifactError> {
    write_atomic(path, csv_text(meta, header, rows).as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ArtifactError> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable artifact");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// The feature matrix as CSV: `id` then one column per feature, missing
/// entries empty.
pub fn features_csv(m: &FeatureMatrix, meta: &Meta) -> String {
    let mut header = vec!["id"];
    header.extend(m.columns().iter().map(String::as_str));
    let rows = (0..m.n_rows()).map(|r| {
        let mut row = vec![m.ids()[r].clone()];
        row.extend(m.row(r).iter().map(|v| fmt_opt(*v)));
        row
    });
    csv_text(meta, &header, rows)
}

/// Rows of a `#`-prefixed CSV artifact, with 1-based line numbers.
pub struct CsvTable {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<(usize, Vec<String>)>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self, ArtifactError> {
        let bytes = read_artifact(path)?;
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(bytes.as_slice());
        let parse_err = |e: csv::Error| ArtifactError::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        };
        let header: Vec<String> = rdr.headers().map_err(parse_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(parse_err)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Self { path: path.to_path_buf(), header, rows })
    }

    pub fn expect_header(&self, want: &[&str]) -> Result<(), ArtifactError> {
        if self.header.iter().map(String::as_str).ne(want.iter().copied()) {
            return Err(ArtifactError::Schema {
                path: self.path.clone(),
                reason: format!("expected columns `{}`, found `{}`", want.join(","), self.header.join(",")),
            });
        }
        Ok(())
    }

    pub fn bad(&self, line: usize, reason: impl Into<String>) -> ArtifactError {
        ArtifactError::Parse { path: self.path.clone(), line, reason: reason.into() }
    }

    pub fn opt_f64(&self, line: usize, text: &str) -> Result<Option<f64>, ArtifactError> {
        if text.is_empty() {
            return Ok(None);
        }
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Some)
            .ok_or_else(|| self.bad(line, format!("bad number `{text}`")))
    }
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix, ArtifactError> {
    let t = CsvTable::read(path)?;
    let mut want = vec!["id"];
    want.extend(FEATURE_NAMES);
    t.expect_header(&want)?;
    let mut m = FeatureMatrix::canonical();
    for (line, row) in &t.rows {
        let values = row[1..].iter().map(|s| t.opt_f64(*line, s)).collect::<Result<Vec<_>, _>>()?;
        m.push_row(&row[0], &values).map_err(|e| t.bad(*line, e.to_string()))?;
    }
    Ok(m)
}

/// One row of `clusters.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRow {
    pub id: String,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub label: usize,
}

pub const CLUSTER_HEADER: [&str; 4] = ["id", "lat", "lon", "label"];

pub fn write_clusters(path: &Path, meta: &Meta, rows: &[ClusterRow]) -> Result<(), ArtifactError> {
    write_csv(
        path,
        meta,
        &CLUSTER_HEADER,
        rows.iter().map(|r| vec![r.id.clone(), fmt_opt(r.lat), fmt_opt(r.lon), r.label.to_string()]),
    )
}

pub fn read_clusters(path: &Path) -> Result<Vec<ClusterRow>, ArtifactError> {
    let t = CsvTable::read(path)?;
    t.expect_header(&CLUSTER_HEADER)?;
    t.rows
        .iter()
        .map(|(line, row)| {
            let label = row[3].parse::<usize>().ok().filter(|l| *l >= 1).ok_or_else(|| t.bad(*line, "bad label"))?;
            Ok(ClusterRow {
                id: row[0].clone(),
                lat: t.opt_f64(*line, &row[1])?,
                lon: t.opt_f64(*line, &row[2])?,
                label,
            })
        })
        .collect()
}

//! Station-data ingestion: GHCN-M v4 fixed-width archives and inventories,
//! a generic long CSV, daily-to-monthly aggregation and the complete-window
//! rules that turn raw records into [`TimeSeries`].

mod ghcn;
mod inventory;
mod longcsv;
mod window;

use std::collections::BTreeMap;
use std::io;

use geofeat_core::YearMonth;

pub use ghcn::{format_ghcnm_line, parse_ghcnm_dat, parse_ghcnm_line, GhcnRow, GhcnRows, GhcnStations, GHCNM_LINE_LEN};
pub use inventory::{format_inventory_line, parse_station_metadata, StationMeta};
pub use longcsv::parse_long_csv;
pub use window::{
    aggregate_daily_to_monthly, daily_coverage, qc_screen, select_complete_window, QcReject, WindowRules,
    MAX_DAILY_MISSING, MIN_DAYS_PRESENT,
};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown element `{element}`")]
    UnknownElement { line: usize, element: String },
    #[error("line {line}: {what} {value} is out of range")]
    CoordinateOutOfRange { line: usize, what: &'static str, value: f64 },
    #[error("line {line}: station `{id}` listed again with different coordinates")]
    DuplicateStation { line: usize, id: String },
    #[error("line {line}: expected the header `id,date,value`")]
    BadHeader { line: usize },
    #[error("line {line}: bad date `{text}`")]
    BadDate { line: usize, text: String },
    #[error("line {line}: duplicate observation for `{id}` at {date}")]
    DuplicateObservation { line: usize, id: String, date: String },
    #[error("record `{0}` has no observations")]
    EmptyRecord(String),
    #[error("line {line}: {source}")]
    Io { line: usize, source: io::Error },
}

impl IngestError {
    /// 1-based input line the error refers to, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            Self::MalformedLine { line, .. }
            | Self::UnknownElement { line, .. }
            | Self::CoordinateOutOfRange { line, .. }
            | Self::DuplicateStation { line, .. }
            | Self::BadHeader { line }
            | Self::BadDate { line, .. }
            | Self::DuplicateObservation { line, .. }
            | Self::Io { line, .. } => Some(*line),
            Self::EmptyRecord(_) => None,
        }
    }

    pub(crate) fn malformed(line: usize, reason: impl Into<String>) -> Self {
        Self::MalformedLine { line, reason: reason.into() }
    }
}

/// GHCN-M element codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Element {
    Tavg,
    Tmax,
    Tmin,
    Prcp,
}

impl Element {
    pub fn parse(code: &str) -> Option<Self> {
        match code {
            "TAVG" => Some(Self::Tavg),
            "TMAX" => Some(Self::Tmax),
            "TMIN" => Some(Self::Tmin),
            "PRCP" => Some(Self::Prcp),
            _ => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Self::Tavg => "TAVG",
            Self::Tmax => "TMAX",
            Self::Tmin => "TMIN",
            Self::Prcp => "PRCP",
        }
    }

    /// Raw integers are divided by this to get physical units.
    pub fn divisor(self) -> f64 {
        match self {
            Self::Prcp => 10.0,
            _ => 100.0,
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            Self::Prcp => "mm",
            _ => "degC",
        }
    }
}

/// How GHCN values carrying a quality-control flag are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum QcPolicy {
    /// Flagged values become missing.
    #[default]
    Strict,
    /// Flags are kept but values are used.
    Tolerant,
}

/// One monthly value with the archive's three flag characters
/// (measurement, quality control, source), blank when absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthlyObservation {
    pub value: Option<f64>,
    pub flags: [u8; 3],
}

impl MonthlyObservation {
    pub fn plain(value: Option<f64>) -> Self {
        Self { value, flags: *b"   " }
    }

    pub fn qc_flagged(&self) -> bool {
        self.flags[1] != b' '
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Monthly,
    Daily,
}

/// A station's raw observations. Keys are unique by construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StationRecord {
    pub id: String,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub name: Option<String>,
    pub elevation: Option<f64>,
    pub units: String,
    pub monthly: BTreeMap<YearMonth, MonthlyObservation>,
    /// Daily values keyed by month and day of month.
    pub daily: BTreeMap<(YearMonth, u32), Option<f64>>,
}

impl StationRecord {
    pub fn new(id: impl Into<String>, units: impl Into<String>) -> Self {
        Self { id: id.into(), units: units.into(), ..Self::default() }
    }

    pub fn resolution(&self) -> Resolution {
        if self.daily.is_empty() {
            Resolution::Monthly
        } else {
            Resolution::Daily
        }
    }

    /// Monthly values after applying the QC policy.
    pub fn monthly_values(&self, policy: QcPolicy) -> BTreeMap<YearMonth, Option<f64>> {
        self.monthly
            .iter()
            .map(|(ym, obs)| {
                let v = match policy {
                    QcPolicy::Strict if obs.qc_flagged() => None,
                    _ => obs.value,
                };
                (*ym, v)
            })
            .collect()
    }

    /// Attach coordinates and metadata from an inventory entry.
    pub fn with_meta(mut self, meta: &StationMeta) -> Self {
        self.latitude = Some(meta.latitude);
        self.longitude = Some(meta.longitude);
        self.elevation = meta.elevation;
        self.name = meta.name.clone();
        self
    }
}

pub(crate) fn check_latitude(line: usize, v: f64) -> Result<f64, IngestError> {
    if (-90.0..=90.0).contains(&v) {
        Ok(v)
    } else {
        Err(IngestError::CoordinateOutOfRange { line, what: "latitude", value: v })
    }
}

pub(crate) fn check_longitude(line: usize, v: f64) -> Result<f64, IngestError> {
    if (-180.0..=180.0).contains(&v) {
        Ok(v)
    } else {
        Err(IngestError::CoordinateOutOfRange { line, what: "longitude", value: v })
    }
}

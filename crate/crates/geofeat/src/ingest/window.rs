use std::collections::BTreeMap;

use geofeat_core::{TimeSeries, YearMonth};

use super::{IngestError, MonthlyObservation, QcPolicy, Resolution, StationRecord};

/// Share of a month's days that must be present for a monthly mean.
pub const MIN_DAYS_PRESENT: f64 = 0.95;
/// Largest share of missing days allowed over a selected daily window.
pub const MAX_DAILY_MISSING: f64 = 0.01;

/// Settings that turn a raw record into an analysis window.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowRules {
    pub window_years: usize,
    pub period: usize,
    pub qc: QcPolicy,
    pub min_days_present: f64,
    pub max_daily_missing: f64,
}

impl Default for WindowRules {
    fn default() -> Self {
        Self {
            window_years: 40,
            period: 12,
            qc: QcPolicy::Strict,
            min_days_present: MIN_DAYS_PRESENT,
            max_daily_missing: MAX_DAILY_MISSING,
        }
    }
}

impl WindowRules {
    pub fn window_months(&self) -> usize {
        self.window_years * 12
    }
}

/// `(present days, days in month)` for every month spanned by the daily
/// observations.
pub fn daily_coverage(record: &StationRecord) -> BTreeMap<YearMonth, (u32, u32)> {
    let mut out = BTreeMap::new();
    let (Some(first), Some(last)) = (record.daily.keys().next(), record.daily.keys().next_back()) else {
        return out;
    };
    for o in first.0.ordinal()..=last.0.ordinal() {
        let ym = YearMonth::from_ordinal(o);
        out.insert(ym, (0, ym.days_in_month()));
    }
    for ((ym, _), v) in &record.daily {
        if v.is_some() {
            out.get_mut(ym).expect("month in span").0 += 1;
        }
    }
    out
}

/// Monthly means of daily values; a month with fewer than `min_present` of
/// its days is missing.
pub fn aggregate_daily_to_monthly(record: &StationRecord, min_present: f64) -> Result<StationRecord, IngestError> {
    if record.daily.values().all(Option::is_none) {
        return Err(IngestError::EmptyRecord(record.id.clone()));
    }
    let mut sums: BTreeMap<YearMonth, f64> = BTreeMap::new();
    for ((ym, _), v) in &record.daily {
        if let Some(v) = v {
            *sums.entry(*ym).or_insert(0.0) += v;
        }
    }
    let mut out = StationRecord { daily: BTreeMap::new(), monthly: BTreeMap::new(), ..record.clone() };
    for (ym, (present, days)) in daily_coverage(record) {
        let value = (present > 0 && f64::from(present) / f64::from(days) >= min_present)
            .then(|| sums[&ym] / f64::from(present));
        out.monthly.insert(ym, MonthlyObservation::plain(value));
    }
    Ok(out)
}

/// End ordinals of complete `len`-month spans, most recent first.
fn complete_span_ends(values: &BTreeMap<YearMonth, Option<f64>>, len: usize) -> Vec<i64> {
    let mut ends = Vec::new();
    if len == 0 {
        return ends;
    }
    let mut run = 0usize;
    let mut prev: Option<i64> = None;
    for (ym, v) in values {
        let o = ym.ordinal();
        if prev.is_some_and(|p| p + 1 != o) {
            run = 0;
        }
        prev = Some(o);
        run = if v.is_some() { run + 1 } else { 0 };
        if run >= len {
            ends.push(o);
        }
    }
    ends.reverse();
    ends
}

/// The most recent contiguous window of `rules.window_years` years with no
/// missing month. Daily records are aggregated first and must also keep
/// the missing-day share over the window within `rules.max_daily_missing`.
pub fn select_complete_window(record: &StationRecord, rules: &WindowRules) -> Option<TimeSeries> {
    let len = rules.window_months();
    let (values, coverage) = match record.resolution() {
        Resolution::Monthly => (record.monthly_values(rules.qc), None),
        Resolution::Daily => {
            let monthly = aggregate_daily_to_monthly(record, rules.min_days_present).ok()?;
            (monthly.monthly_values(rules.qc), Some(daily_coverage(record)))
        }
    };
    let accept = |end: i64| match &coverage {
        None => true,
        Some(cov) => {
            let (mut missing, mut days) = (0u64, 0u64);
            for o in end + 1 - len as i64..=end {
                let (p, d) = cov[&YearMonth::from_ordinal(o)];
                missing += u64::from(d - p);
                days += u64::from(d);
            }
            missing as f64 <= rules.max_daily_missing * days as f64
        }
    };
    let end = complete_span_ends(&values, len).into_iter().find(|&e| accept(e))?;
    let start = YearMonth::from_ordinal(end + 1 - len as i64);
    let series: Vec<f64> = (0..len as i64).map(|k| values[&start.plus_months(k)].expect("complete span")).collect();
    TimeSeries::new(record.id.clone(), series, rules.period, start).ok()
}

/// Why a window failed the automatic quality screens.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum QcReject {
    /// More than half of consecutive pairs are identical.
    RepeatedValues { share: f64 },
    /// A value more than eight standard deviations from the mean.
    Spike { index: usize, z: f64 },
}

impl std::fmt::Display for QcReject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::RepeatedValues { share } => write!(f, "{:.1}% of consecutive values repeat", share * 100.0),
            Self::Spike { index, z } => write!(f, "value {index} has |z| = {:.2}", z.abs()),
        }
    }
}

const MAX_REPEAT_SHARE: f64 = 0.5;
const MAX_ABS_Z: f64 = 8.0;

/// Automatic stand-in for visual quality control.
pub fn qc_screen(ts: &TimeSeries) -> Result<(), QcReject> {
    let x = ts.values();
    let n = x.len();
    let repeats = x.windows(2).filter(|w| w[0] == w[1]).count();
    let share = repeats as f64 / (n - 1) as f64;
    if share > MAX_REPEAT_SHARE {
        return Err(QcReject::RepeatedValues { share });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if sd > 0.0 {
        for (index, v) in x.iter().enumerate() {
            let z = (v - mean) / sd;
            if z.abs() > MAX_ABS_Z {
                return Err(QcReject::Spike { index, z });
            }
        }
    }
    Ok(())
}

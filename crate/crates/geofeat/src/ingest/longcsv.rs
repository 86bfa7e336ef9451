use std::collections::BTreeMap;
use std::io::Read;

use geofeat_core::YearMonth;

use super::{IngestError, MonthlyObservation, StationRecord};

enum Date {
    Month(YearMonth),
    Day(YearMonth, u32),
}

fn parse_date(text: &str, line: usize) -> Result<Date, IngestError> {
    let bad = || IngestError::BadDate { line, text: text.to_string() };
    let digits = |s: &str, n: usize| -> Result<u32, IngestError> {
        if s.len() == n && s.bytes().all(|b| b.is_ascii_digit()) {
            s.parse().map_err(|_| bad())
        } else {
            Err(bad())
        }
    };
    let parts: Vec<&str> = text.split('-').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let year = digits(parts[0], 4)? as i32;
    let ym = YearMonth::new(year, digits(parts[1], 2)?).map_err(|_| bad())?;
    match parts.get(2) {
        None => Ok(Date::Month(ym)),
        Some(d) => {
            let day = digits(d, 2)?;
            if day == 0 || day > ym.days_in_month() {
                return Err(bad());
            }
            Ok(Date::Day(ym, day))
        }
    }
}

fn csv_error(e: csv::Error, fallback_line: usize) -> IngestError {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io { line, source },
        csv::ErrorKind::Utf8 { .. } => IngestError::malformed(line, "invalid UTF-8"),
        csv::ErrorKind::UnequalLengths { len, .. } => {
            IngestError::malformed(line, format!("expected 3 fields, found {len}"))
        }
        other => IngestError::malformed(line, format!("{other:?}")),
    }
}

/// Read `id,date,value` rows. Dates are `YYYY-MM` or `YYYY-MM-DD`; an empty
/// value is missing. One id may not mix monthly and daily rows. Records are
/// returned sorted by id.
pub fn parse_long_csv<R: Read>(reader: R) -> Result<Vec<StationRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut records: BTreeMap<String, StationRecord> = BTreeMap::new();
    let mut row = csv::StringRecord::new();
    let mut header_seen = false;
    let mut last_line = 1;
    loop {
        match rdr.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(e, last_line)),
        }
        let line = row.position().map_or(last_line, |p| p.line() as usize);
        last_line = line;
        if !header_seen {
            let names: Vec<String> = row.iter().map(|s| s.to_ascii_lowercase()).collect();
            if names != ["id", "date", "value"] {
                return Err(IngestError::BadHeader { line });
            }
            header_seen = true;
            continue;
        }
        let id = &row[0];
        if id.is_empty() {
            return Err(IngestError::malformed(line, "empty id"));
        }
        let date = parse_date(&row[1], line)?;
        let value = match &row[2] {
            "" => None,
            t => Some(
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| IngestError::malformed(line, format!("bad value `{t}`")))?,
            ),
        };
        let rec = records.entry(id.to_string()).or_insert_with(|| StationRecord::new(id, ""));
        let duplicate = || IngestError::DuplicateObservation { line, id: id.to_string(), date: row[1].to_string() };
        match date {
            Date::Month(ym) => {
                if !rec.daily.is_empty() {
                    return Err(IngestError::malformed(line, format!("`{id}` mixes daily and monthly rows")));
                }
                if rec.monthly.insert(ym, MonthlyObservation::plain(value)).is_some() {
                    return Err(duplicate());
                }
            }
            Date::Day(ym, day) => {
                if !rec.monthly.is_empty() {
                    return Err(IngestError::malformed(line, format!("`{id}` mixes daily and monthly rows")));
                }
                if rec.daily.insert((ym, day), value).is_some() {
                    return Err(duplicate());
                }
            }
        }
    }
    if !header_seen {
        return Err(IngestError::BadHeader { line: 1 });
    }
    Ok(records.into_values().collect())
}

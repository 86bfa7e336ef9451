use std::collections::BTreeMap;
use std::io::BufRead;

use super::{check_latitude, check_longitude, IngestError};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StationMeta {
    pub id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub elevation: Option<f64>,
    pub name: Option<String>,
}

const MISSING_ELEVATION: f64 = -999.0;

/// Read station coordinates from a GHCN-M inventory (fixed width) or from a
/// CSV with columns `id,latitude,longitude[,elevation[,name]]`. The two
/// forms are told apart line by line; `#` lines and a leading CSV header
/// are skipped.
pub fn parse_station_metadata<R: BufRead>(mut reader: R) -> Result<BTreeMap<String, StationMeta>, IngestError> {
    let mut out: BTreeMap<String, StationMeta> = BTreeMap::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    let mut first = true;
    loop {
        buf.clear();
        line_no += 1;
        let n = reader.read_until(b'\n', &mut buf).map_err(|source| IngestError::Io { line: line_no, source })?;
        if n == 0 {
            break;
        }
        let text = std::str::from_utf8(&buf)
            .map_err(|_| IngestError::malformed(line_no, "invalid UTF-8"))?
            .trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let head = text.get(..text.len().min(37)).unwrap_or(text);
        let is_first = std::mem::take(&mut first);
        let meta = if head.contains(',') {
            match parse_csv_line(text, line_no, is_first)? {
                Some(m) => m,
                None => continue,
            }
        } else {
            parse_fixed_line(text, line_no)?
        };
        match out.get(&meta.id) {
            Some(prev) if prev.latitude == meta.latitude && prev.longitude == meta.longitude => {}
            Some(_) => return Err(IngestError::DuplicateStation { line: line_no, id: meta.id }),
            None => {
                out.insert(meta.id.clone(), meta);
            }
        }
    }
    Ok(out)
}

fn parse_number(text: &str, line: usize, what: &str) -> Result<f64, IngestError> {
    let t = text.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| IngestError::malformed(line, format!("bad {what} `{t}`")))
}

fn parse_elevation(text: &str, line: usize) -> Result<Option<f64>, IngestError> {
    if text.trim().is_empty() {
        return Ok(None);
    }
    let v = parse_number(text, line, "elevation")?;
    Ok((v != MISSING_ELEVATION).then_some(v))
}

fn check_id(id: &str, line: usize) -> Result<(), IngestError> {
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(IngestError::malformed(line, format!("bad station id `{id}`")));
    }
    Ok(())
}

fn parse_fixed_line(text: &str, line: usize) -> Result<StationMeta, IngestError> {
    if !text.is_ascii() {
        return Err(IngestError::malformed(line, "non-ASCII bytes"));
    }
    if text.len() < 30 {
        return Err(IngestError::malformed(line, format!("inventory line too short ({} characters)", text.len())));
    }
    let id = text[0..11].trim_end();
    check_id(id, line)?;
    let latitude = check_latitude(line, parse_number(&text[12..20], line, "latitude")?)?;
    let longitude = check_longitude(line, parse_number(&text[21..30], line, "longitude")?)?;
    let elevation = if text.len() > 31 { parse_elevation(&text[31..text.len().min(37)], line)? } else { None };
    let name = if text.len() > 38 {
        Some(text[38..text.len().min(68)].trim().to_string()).filter(|s| !s.is_empty())
    } else {
        None
    };
    Ok(StationMeta { id: id.to_string(), latitude, longitude, elevation, name })
}

fn parse_csv_line(text: &str, line: usize, first: bool) -> Result<Option<StationMeta>, IngestError> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if first && fields[0].eq_ignore_ascii_case("id") {
        return Ok(None);
    }
    if !(3..=5).contains(&fields.len()) {
        return Err(IngestError::malformed(line, format!("expected 3 to 5 fields, found {}", fields.len())));
    }
    check_id(fields[0], line)?;
    let latitude = check_latitude(line, parse_number(fields[1], line, "latitude")?)?;
    let longitude = check_longitude(line, parse_number(fields[2], line, "longitude")?)?;
    let elevation = match fields.get(3) {
        Some(f) => parse_elevation(f, line)?,
        None => None,
    };
    let name = fields.get(4).map(|s| s.to_string()).filter(|s| !s.is_empty());
    Ok(Some(StationMeta { id: fields[0].to_string(), latitude, longitude, elevation, name }))
}

/// Fixed-width inventory line for `meta`.
pub fn format_inventory_line(meta: &StationMeta) -> String {
    format!(
        "{:<11} {:>8.4} {:>9.4} {:>6.1} {}",
        meta.id,
        meta.latitude,
        meta.longitude,
        meta.elevation.unwrap_or(MISSING_ELEVATION),
        meta.name.as_deref().unwrap_or("")
    )
    .trim_end()
    .to_string()
}

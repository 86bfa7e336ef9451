use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::BufRead;

use geofeat_core::YearMonth;

use super::{Element, IngestError, MonthlyObservation, StationRecord};

/// Length of one GHCN-M v4 `.dat` line without the newline.
pub const GHCNM_LINE_LEN: usize = 115;

const MISSING: i32 = -9999;

/// One `.dat` line, kept in raw archive units so it prints back unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GhcnRow {
    pub id: String,
    pub year: i32,
    pub element: Element,
    /// Raw integers; `-9999` is missing.
    pub values: [i32; 12],
    /// Measurement, quality-control and source flag per month.
    pub flags: [[u8; 3]; 12],
}

impl GhcnRow {
    pub fn value(&self, month: usize) -> Option<f64> {
        let raw = self.values[month];
        (raw != MISSING).then(|| f64::from(raw) / self.element.divisor())
    }
}

pub fn parse_ghcnm_line(line: &[u8], line_no: usize) -> Result<GhcnRow, IngestError> {
    let bad = |reason: &str| IngestError::malformed(line_no, reason);
    if !line.is_ascii() {
        return Err(bad("non-ASCII bytes"));
    }
    if line.len() != GHCNM_LINE_LEN {
        return Err(IngestError::malformed(
            line_no,
            format!("expected {GHCNM_LINE_LEN} characters, found {}", line.len()),
        ));
    }
    let text = std::str::from_utf8(line).map_err(|_| bad("non-ASCII bytes"))?;
    let id = &text[0..11];
    if !id.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return Err(bad("station id must be 11 letters or digits"));
    }
    let year_text = &text[11..15];
    if !year_text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad("year must be four digits"));
    }
    let year: i32 = year_text.parse().map_err(|_| bad("bad year"))?;
    let code = &text[15..19];
    let element =
        Element::parse(code).ok_or_else(|| IngestError::UnknownElement { line: line_no, element: code.to_string() })?;

    let mut values = [0; 12];
    let mut flags = [[b' '; 3]; 12];
    for m in 0..12 {
        let at = 19 + 8 * m;
        let field = text[at..at + 5].trim_start();
        let raw: i32 = field.parse().map_err(|_| {
            IngestError::malformed(line_no, format!("month {}: bad value `{}`", m + 1, &text[at..at + 5]))
        })?;
        if raw < MISSING {
            return Err(IngestError::malformed(line_no, format!("month {}: value {raw} below -9999", m + 1)));
        }
        values[m] = raw;
        for (k, b) in line[at + 5..at + 8].iter().enumerate() {
            if !(b.is_ascii_graphic() || *b == b' ') {
                return Err(IngestError::malformed(line_no, format!("month {}: bad flag byte", m + 1)));
            }
            flags[m][k] = *b;
        }
    }
    Ok(GhcnRow { id: id.to_string(), year, element, values, flags })
}

pub fn format_ghcnm_line(row: &GhcnRow) -> String {
    let mut s = String::with_capacity(GHCNM_LINE_LEN);
    let _ = write!(s, "{:<11}{:04}{}", row.id, row.year, row.element.code());
    for m in 0..12 {
        let _ = write!(s, "{:>5}", row.values[m]);
        s.extend(row.flags[m].iter().map(|b| *b as char));
    }
    s
}

/// Streaming reader over `.dat` lines. Blank lines are skipped; iteration
/// stops after the first error.
pub struct GhcnRows<R> {
    reader: R,
    buf: Vec<u8>,
    line: usize,
    done: bool,
}

impl<R: BufRead> GhcnRows<R> {
    pub fn new(reader: R) -> Self {
        Self { reader, buf: Vec::new(), line: 0, done: false }
    }
}

impl<R: BufRead> Iterator for GhcnRows<R> {
    type Item = Result<(usize, GhcnRow), IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            self.line += 1;
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    let mut end = self.buf.len();
                    if self.buf[..end].ends_with(b"\n") {
                        end -= 1;
                    }
                    if self.buf[..end].ends_with(b"\r") {
                        end -= 1;
                    }
                    if self.buf[..end].iter().all(|b| *b == b' ' || *b == b'\t') {
                        continue;
                    }
                    let row = parse_ghcnm_line(&self.buf[..end], self.line);
                    self.done = row.is_err();
                    return Some(row.map(|r| (self.line, r)));
                }
                Err(source) => {
                    self.done = true;
                    return Some(Err(IngestError::Io { line: self.line, source }));
                }
            }
        }
        None
    }
}

/// Groups consecutive rows of one element into station records, holding at
/// most one station in memory. Rows for other elements are validated and
/// skipped; a station whose rows are not contiguous is an error.
pub struct GhcnStations<R> {
    rows: GhcnRows<R>,
    element: Element,
    pending: Option<(usize, GhcnRow)>,
    seen: HashSet<String>,
    failed: bool,
}

impl<R: BufRead> GhcnStations<R> {
    pub fn new(reader: R, element: Element) -> Self {
        Self { rows: GhcnRows::new(reader), element, pending: None, seen: HashSet::new(), failed: false }
    }

    fn next_row(&mut self) -> Option<Result<(usize, GhcnRow), IngestError>> {
        if let Some(p) = self.pending.take() {
            return Some(Ok(p));
        }
        loop {
            match self.rows.next()? {
                Ok((line, row)) if row.element == self.element => return Some(Ok((line, row))),
                Ok(_) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }

    fn add_row(record: &mut StationRecord, line: usize, row: &GhcnRow) -> Result<(), IngestError> {
        for m in 0..12 {
            let ym = YearMonth::new(row.year, m as u32 + 1).expect("month in range");
            let obs = MonthlyObservation { value: row.value(m), flags: row.flags[m] };
            if record.monthly.insert(ym, obs).is_some() {
                return Err(IngestError::DuplicateObservation { line, id: row.id.clone(), date: row.year.to_string() });
            }
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for GhcnStations<R> {
    type Item = Result<StationRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let result = (|| {
            let (line, first) = match self.next_row()? {
                Ok(r) => r,
                Err(e) => return Some(Err(e)),
            };
            if !self.seen.insert(first.id.clone()) {
                return Some(Err(IngestError::malformed(
                    line,
                    format!("rows for station `{}` are not contiguous", first.id),
                )));
            }
            let mut record = StationRecord::new(first.id.clone(), self.element.units());
            if let Err(e) = Self::add_row(&mut record, line, &first) {
                return Some(Err(e));
            }
            while let Some(next) = self.next_row() {
                match next {
                    Ok((line, row)) if row.id == record.id => {
                        if let Err(e) = Self::add_row(&mut record, line, &row) {
                            return Some(Err(e));
                        }
                    }
                    Ok(other) => {
                        self.pending = Some(other);
                        break;
                    }
                    Err(e) => return Some(Err(e)),
                }
            }
            Some(Ok(record))
        })();
        if matches!(result, Some(Err(_))) {
            self.failed = true;
        }
        result
    }
}

/// Read a whole `.dat` stream into station records, in file order.
pub fn parse_ghcnm_dat<R: BufRead>(reader: R, element: Element) -> Result<Vec<StationRecord>, IngestError> {
    GhcnStations::new(reader, element).collect()
}

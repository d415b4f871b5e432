//! CSV ingestion of monthly passenger traffic.
//!
//! The header must name `year` and `month` plus at least one of
//! `arrivals`, `departures`, `total` (case-insensitive, any order). Comma
//! or tab delimiters are detected from the header line. Thousands
//! separators inside numbers are removed. Rows may come in any order;
//! duplicates and gaps are errors, never repaired.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{MonthIndex, MonthlySeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficRecord {
    pub month: MonthIndex,
    pub arrivals: Option<u64>,
    pub departures: Option<u64>,
    pub total: Option<u64>,
}

impl TrafficRecord {
    pub fn get(&self, column: Column) -> Option<u64> {
        match column {
            Column::Arrivals => self.arrivals,
            Column::Departures => self.departures,
            Column::Total => self.total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Column {
    Arrivals,
    Departures,
    Total,
}

impl Column {
    pub const ALL: [Column; 3] = [Column::Arrivals, Column::Departures, Column::Total];

    pub fn name(self) -> &'static str {
        match self {
            Column::Arrivals => "arrivals",
            Column::Departures => "departures",
            Column::Total => "total",
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Column::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Ingestion(format!("unknown column '{s}' (expected arrivals, departures or total)")))
    }
}

/// Parsed records plus a log of every value the reader derived rather than read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub records: Vec<TrafficRecord>,
    pub notes: Vec<String>,
}

impl Ingested {
    pub fn series(&self, column: Column) -> Result<MonthlySeries> {
        to_series(&self.records, column)
    }
}

const MONTH_NAMES: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september", "october",
    "november", "december",
];

/// `1`..`12`, a full English month name, or its three-letter abbreviation.
fn parse_month(cell: &str) -> Option<u32> {
    if let Ok(m) = cell.parse::<u32>() {
        return (1..=12).contains(&m).then_some(m);
    }
    let lower = cell.to_ascii_lowercase();
    MONTH_NAMES
        .iter()
        .position(|name| *name == lower || (lower.len() == 3 && name.starts_with(&lower)))
        .map(|i| i as u32 + 1)
}

fn parse_count(cell: &str) -> Option<u64> {
    let cleaned: String = cell
        .chars()
        .filter(|c| !matches!(c, ',' | '_' | ' ' | '\u{a0}' | '\''))
        .collect();
    if cleaned.is_empty() || !cleaned.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    cleaned.parse().ok()
}

pub fn parse_csv(bytes: &[u8]) -> Result<Ingested> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Ingestion(format!("input is not UTF-8: {e}")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let header_line = text.lines().next().unwrap_or("");
    let delimiter = if header_line.contains('\t') { b'\t' } else { b',' };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Ingestion(format!("cannot read header: {e}")))?
        .clone();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        let key = h.trim().to_ascii_lowercase();
        if index.insert(key.clone(), i).is_some() {
            return Err(Error::Ingestion(format!("column '{key}' appears twice in the header")));
        }
    }
    let col = |name: &str| index.get(name).copied();
    let (Some(year_col), Some(month_col)) = (col("year"), col("month")) else {
        return Err(Error::Ingestion("header must name 'year' and 'month'".into()));
    };
    let traffic: Vec<(Column, usize)> = Column::ALL
        .into_iter()
        .filter_map(|c| col(c.name()).map(|i| (c, i)))
        .collect();
    if traffic.is_empty() {
        return Err(Error::Ingestion(
            "header must name at least one of 'arrivals', 'departures', 'total'".into(),
        ));
    }

    let mut records = Vec::new();
    let mut notes = Vec::new();
    for (k, row) in reader.records().enumerate() {
        let line = k + 2;
        let row = row.map_err(|e| Error::Ingestion(format!("row {line}: {e}")))?;
        if row.iter().all(|c| c.is_empty()) {
            continue;
        }
        let cell_err = |column: &str, message: String| Error::Cell {
            row: line,
            column: column.to_string(),
            message,
        };
        let year_cell = row.get(year_col).unwrap_or("");
        let year: i32 = year_cell
            .parse()
            .map_err(|_| cell_err("year", format!("'{year_cell}' is not a year")))?;
        let month_cell = row.get(month_col).unwrap_or("");
        let month = parse_month(month_cell).ok_or_else(|| cell_err("month", format!("'{month_cell}' is not a month")))?;
        let mut rec = TrafficRecord {
            month: MonthIndex::new(year, month).map_err(|e| cell_err("year", e.to_string()))?,
            arrivals: None,
            departures: None,
            total: None,
        };
        for &(c, i) in &traffic {
            let cell = row.get(i).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let v = parse_count(cell).ok_or_else(|| cell_err(c.name(), format!("'{cell}' is not a non-negative count")))?;
            match c {
                Column::Arrivals => rec.arrivals = Some(v),
                Column::Departures => rec.departures = Some(v),
                Column::Total => rec.total = Some(v),
            }
        }
        match (rec.arrivals, rec.departures, rec.total) {
            (Some(a), Some(d), Some(t)) if a + d != t => {
                return Err(cell_err(
                    "total",
                    format!("total {t} differs from arrivals + departures = {}", a + d),
                ));
            }
            (Some(a), Some(d), None) => {
                rec.total = Some(a + d);
                notes.push(format!("{}: total computed as arrivals + departures = {}", rec.month, a + d));
            }
            _ => {}
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Ingestion("no data rows".into()));
    }
    records.sort_by_key(|r| r.month);
    for pair in records.windows(2) {
        let (a, b) = (pair[0].month, pair[1].month);
        if a == b {
            return Err(Error::Ingestion(format!("duplicate month {a}")));
        }
        if a.add_months(1) != b {
            return Err(Error::Ingestion(format!("missing month {}", a.add_months(1))));
        }
    }
    Ok(Ingested { records, notes })
}

/// Series of one column; every record must carry a value for it.
pub fn to_series(records: &[TrafficRecord], column: Column) -> Result<MonthlySeries> {
    let first = records.first().ok_or_else(|| Error::Ingestion("no records".into()))?;
    let values = records
        .iter()
        .map(|r| {
            r.get(column)
                .map(|v| v as f64)
                .ok_or_else(|| Error::Ingestion(format!("{}: no value for column '{column}'", r.month)))
        })
        .collect::<Result<Vec<_>>>()?;
    MonthlySeries::new(first.month, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_rows() {
        let csv = "year,month,arrivals,departures,total\n2019,1,100,200,300\n2019,2,1,2,3\n2019,3,5,5,10\n";
        let out = parse_csv(csv.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.records[2].total, Some(10));
        assert!(out.notes.is_empty());
        let s = out.series(Column::Total).unwrap();
        assert_eq!(s.values(), &[300.0, 3.0, 10.0]);
        assert_eq!(s.start(), MonthIndex::new(2019, 1).unwrap());
    }

    #[test]
    fn tabs_separators_and_unsorted_rows() {
        let csv = "Year\tMonth\tArrivals\tDepartures\n2019\tFeb\t1,000\t2,000\n2019\tJan\t3,210,123\t3,250,070\n";
        let out = parse_csv(csv.as_bytes()).unwrap();
        assert_eq!(out.records[0].total, Some(6_460_193));
        assert_eq!(out.records[1].total, Some(3000));
        assert_eq!(out.notes.len(), 2);
    }

    #[test]
    fn quoted_thousands_with_commas() {
        let csv = "year,month,total\n2019,1,\"6,460,193\"\n";
        let out = parse_csv(csv.as_bytes()).unwrap();
        assert_eq!(out.records[0].total, Some(6_460_193));
    }

    #[test]
    fn gap_names_missing_month() {
        let csv = "year,month,total\n2010,5,1\n2010,7,2\n";
        match parse_csv(csv.as_bytes()) {
            Err(Error::Ingestion(m)) => assert!(m.contains("2010-06"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_month() {
        let csv = "year,month,total\n2010,5,1\n2010,5,2\n";
        assert!(matches!(parse_csv(csv.as_bytes()), Err(Error::Ingestion(m)) if m.contains("duplicate")));
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let csv = "year,month,total\n2010,5,1\n2010,6,abc\n";
        match parse_csv(csv.as_bytes()) {
            Err(Error::Cell { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "total");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_total_is_an_error() {
        let csv = "year,month,arrivals,departures,total\n2010,5,1,2,4\n";
        assert!(matches!(parse_csv(csv.as_bytes()), Err(Error::Cell { .. })));
    }

    #[test]
    fn header_requirements() {
        assert!(parse_csv(b"year,total\n2010,1\n").is_err());
        assert!(parse_csv(b"year,month\n2010,1\n").is_err());
        assert!(parse_csv(b"year,month,total\n").is_err());
    }

    #[test]
    fn missing_column_values() {
        let csv = "year,month,arrivals,total\n2010,5,1,\n";
        let out = parse_csv(csv.as_bytes()).unwrap();
        assert!(out.series(Column::Total).is_err());
        assert_eq!(out.series(Column::Arrivals).unwrap().values(), &[1.0]);
    }

    #[test]
    fn month_names() {
        assert_eq!(parse_month("Jan"), Some(1));
        assert_eq!(parse_month("september"), Some(9));
        assert_eq!(parse_month("Sept"), None);
        assert_eq!(parse_month("13"), None);
        assert_eq!(parse_month("Junk"), None);
    }
}

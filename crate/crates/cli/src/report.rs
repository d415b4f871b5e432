//! Tabular reports rendered as delimited text or JSON records.

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Twelve significant digits, fixed-point where that stays readable.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if (-5..15).contains(&magnitude) {
        let decimals = (11 - magnitude).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.11e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Missing => Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(name: &str, columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            name: name.into(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }
}

/// Single-column-pair table of named scalars.
pub fn key_values(name: &str, pairs: Vec<(&str, Cell)>) -> Table {
    let mut t = Table::new(name, ["key", "value"]);
    for (k, v) in pairs {
        t.push(vec![k.into(), v]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Text output: each table is a `# name` line, a header and comma-separated rows;
/// tables are separated by blank lines. Missing values are empty fields.
pub fn render(command: &str, tables: &[Table], format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = String::new();
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&format!("# {}\n{}\n", t.name, t.columns.join(",")));
                for row in &t.rows {
                    let cells: Vec<String> = row.iter().map(Cell::text).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            out
        }
        Format::Json => {
            let mut sections = Map::new();
            for t in tables {
                let records: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            t.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                        Value::Object(obj)
                    })
                    .collect();
                sections.insert(t.name.clone(), Value::Array(records));
            }
            let doc = serde_json::json!({ "command": command, "sections": sections });
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_ten_significant_digits() {
        for v in [6431575.123456789, -0.6960123456, 2.5e-7, 1.0 / 3.0, 123456789012345678.0, 0.5] {
            let s = format_number(v);
            let digits = s
                .split(['e', 'E'])
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .collect::<String>();
            let significant = digits.trim_start_matches('0').len();
            assert!(significant >= 10, "{v} -> {s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-11 * v.abs(), "{v} -> {s}");
        }
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn text_and_json_layouts() {
        let mut t = Table::new("demo", ["month", "value"]);
        t.push(vec!["2019-01".into(), Cell::Num(1.5)]);
        t.push(vec!["2019-02".into(), Cell::Missing]);
        let text = render("demo", &[t.clone()], Format::Text);
        assert_eq!(text, "# demo\nmonth,value\n2019-01,1.50000000000\n2019-02,\n");
        let json: Value = serde_json::from_str(&render("demo", &[t], Format::Json)).unwrap();
        assert_eq!(json["sections"]["demo"][0]["value"], 1.5);
        assert!(json["sections"]["demo"][1]["value"].is_null());
    }
}

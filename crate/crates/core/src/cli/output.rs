//! Tables of records and their CSV / JSON encodings.
//!
//! CSV files start with `#` comment lines holding the version, the command
//! and every resolved parameter, followed by a header row. JSON files hold
//! `{"header": {...}, "columns": [...], "records": [{...}, ...]}`.
//! Floats are written with 17 significant digits in CSV and in shortest
//! round-trip form in JSON; both parse back to the same bits.

use std::io::Write;

use serde_json::{Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::NAN))
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => Value::from(*v),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits; `NaN`, `inf` and `-inf` for the rest.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    /// Resolved parameters in a stable order.
    pub params: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, params: Vec<(String, String)>, columns: Vec<&'static str>) -> Self {
        Self {
            command: command.into(),
            params,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# sparse-lab {VERSION}")?;
        writeln!(out, "# command = {}", self.command)?;
        for (k, v) in &self.params {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_text))?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        let params: Map<String, Value> = self.params.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect();
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::json!({
            "header": {"version": VERSION, "command": self.command, "params": params},
            "columns": self.columns,
            "records": records,
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", vec![("alpha".into(), "0.5".into())], vec!["x", "status", "n"]);
        t.push(vec![Cell::Num(0.1 + 0.2), "converged".into(), 3usize.into()]);
        t.push(vec![Cell::Num(f64::NAN), "a \"quoted\", text".into(), 0usize.into()]);
        t
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# sparse-lab "));
        assert!(text.contains("# alpha = 0.5"));
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert!(rows[1][0].parse::<f64>().unwrap().is_nan());
        assert_eq!(&rows[1][1], "a \"quoted\", text");
    }

    #[test]
    fn json_layout() {
        let v = sample().to_json();
        assert_eq!(v["header"]["params"]["alpha"], "0.5");
        assert_eq!(v["records"][0]["x"].as_f64().unwrap(), 0.1 + 0.2);
        assert!(v["records"][1]["x"].is_null());
        assert_eq!(v["records"][0]["n"], 3);
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(f64::INFINITY), "inf");
        let x = std::f64::consts::PI;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
}

//! Tabular reports rendered as CSV or JSON.

use std::fmt::Write as _;

use serde_json::{json, Map, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    /// Nested data, rendered compactly in CSV comments.
    Json(Json),
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Self::Int(i) => i.to_string(),
            Self::Float(x) => float(*x),
            Self::Bool(b) => b.to_string(),
            Self::Text(s) => s.clone(),
            Self::Json(j) => j.to_string(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Self::Int(i) => json!(i),
            Self::Float(x) if x.is_finite() => json!(x),
            Self::Float(x) => json!(float(*x)),
            Self::Bool(b) => json!(b),
            Self::Text(s) => json!(s),
            Self::Json(j) => j.clone(),
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Self::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Self::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &'static str, columns: Vec<&'static str>) -> Self {
        Self { name, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Summary key/value pairs followed by one or more tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub summary: Vec<(&'static str, Value)>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn note(&mut self, key: &'static str, value: impl Into<Value>) {
        self.summary.push((key, value.into()));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Summary lines as `# key: value`, then each table with a `# name`
    /// line and a header; tables are separated by a blank line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}: {}", v.csv());
        }
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            if self.tables.len() > 1 {
                let _ = writeln!(out, "# {}", t.name);
            }
            out.push_str(&t.columns.join(","));
            out.push('\n');
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(Value::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        let summary: Map<String, Json> = self.summary.iter().map(|(k, v)| ((*k).to_owned(), v.json())).collect();
        root.insert("summary".into(), Json::Object(summary));
        for t in &self.tables {
            let rows: Vec<Json> = t
                .rows
                .iter()
                .map(|r| Json::Object(t.columns.iter().zip(r).map(|(c, v)| ((*c).to_owned(), v.json())).collect()))
                .collect();
            root.insert(t.name.into(), Json::Array(rows));
        }
        let mut s = serde_json::to_string_pretty(&Json::Object(root)).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Script for gnuplot plotting column `y` against column `x` of the first
/// table in a CSV file, with optional horizontal reference line.
pub fn gnuplot_script(data: &str, table: &Table, x: &str, ys: &[&str], logscale: bool, reference: Option<f64>) -> String {
    let col = |name: &str| table.column(name).map_or(0, |i| i + 1);
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{x}'");
    if logscale {
        let _ = writeln!(s, "set logscale xy");
    }
    let mut plots: Vec<String> =
        ys.iter().map(|y| format!("'{data}' using {}:{} with linespoints title '{y}'", col(x), col(y))).collect();
    if let Some(r) = reference {
        plots.push(format!("{} title 'reference'", float(r)));
    }
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_csv_text() {
        for x in [1.0 / 3.0, std::f64::consts::PI * 1e-300, -2.5e17, 0.1 + 0.2] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_and_json_layouts() {
        let mut r = Report::default();
        r.note("n", 2usize);
        let mut t = Table::new("rows", vec!["nu", "f"]);
        t.push(vec![4usize.into(), 0.5.into()]);
        r.tables.push(t);
        assert_eq!(r.to_csv(), "# n: 2\nnu,f\n4,5.0000000000000000e-1\n");
        let j: Json = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(j["rows"][0]["f"], json!(0.5));
        assert_eq!(j["summary"]["n"], json!(2));
    }
}

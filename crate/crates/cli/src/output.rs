//! Table rendering. JSON and CSV share one cell formatter so both encodings
//! carry identical numeric text.

use std::io;

use gchan_core::ExtReal;
use serde::Serialize;
use serde_json::{Map, Value};

/// 17 significant digits, scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact JSON with every float written by [`fmt_f64`].
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Null,
}

impl Cell {
    fn non_finite(x: f64) -> Cell {
        Cell::Text(
            if x.is_nan() {
                "nan"
            } else if x > 0.0 {
                "unbounded"
            } else {
                "-unbounded"
            }
            .into(),
        )
    }

    fn normalized(&self) -> Cell {
        match *self {
            Cell::Num(x) if !x.is_finite() => Cell::non_finite(x),
            _ => self.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self.normalized() {
            Cell::Num(x) => Value::from(x),
            Cell::Int(n) => Value::from(n),
            Cell::Bool(b) => Value::from(b),
            Cell::Text(s) => Value::from(s),
            Cell::Null => Value::Null,
        }
    }

    pub fn to_csv(&self) -> String {
        match self.normalized() {
            Cell::Num(x) => fmt_f64(x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s,
            Cell::Null => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<ExtReal> for Cell {
    fn from(x: ExtReal) -> Self {
        Cell::Num(x.to_f64())
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::Num)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.to_string(), v.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
    }
}

/// A command's result: metadata plus a row table.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub meta: Map<String, Value>,
    pub table: Table,
    /// Printed to stderr.
    pub diagnostics: Option<String>,
    pub exit_code: u8,
}

impl Report {
    pub fn with_table(command: &str, table: Table) -> Self {
        let mut meta = Map::new();
        meta.insert("command".into(), Value::from(command));
        Self {
            meta,
            table,
            diagnostics: None,
            exit_code: 0,
        }
    }

    pub fn set<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).expect("serializable metadata");
        self.meta.insert(key.to_string(), v);
    }

    pub fn to_json(&self) -> String {
        let mut obj = self.meta.clone();
        obj.insert("rows".into(), self.table.json_rows());
        to_json(&Value::Object(obj))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(1.25), "1.2500000000000000e0");
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        let x = 0.6622661785325219_f64;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_and_csv_agree() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::Num(1.0 / 3.0), Cell::Num(f64::INFINITY), Cell::Null]);
        let csv = t.to_csv();
        let json = to_json(&t.json_rows());
        assert_eq!(csv.lines().nth(1).unwrap(), "3.3333333333333331e-1,unbounded,");
        assert_eq!(json, r#"[{"a":3.3333333333333331e-1,"b":"unbounded","c":null}]"#);
        let parsed: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed[0]["a"].as_f64().unwrap(), 1.0 / 3.0);
    }
}

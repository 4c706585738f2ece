//! Typed result tables written as CSV or JSON lines, and parsed back.
//!
//! A fraction column `x` is written as `x` (`"num/den"`) followed by
//! `x_decimal`; the decimal is derived and ignored when parsing. Missing
//! values are empty CSV fields or JSON `null`.

use std::io::{BufRead, Write};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use pncache_core::rational::{self, to_f64, Frac, Q};
use serde_json::{Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Frac,
    Text,
    Bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub name: &'static str,
    pub kind: Kind,
}

pub const fn col(name: &'static str, kind: Kind) -> Column {
    Column { name, kind }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Frac(Q),
    Text(String),
    Bool(bool),
    Null,
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v.into())
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<Q> for Value {
    fn from(v: Q) -> Self {
        Value::Frac(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => bail!("unknown format {s:?} (expected csv or json)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [Column],
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &'static [Column]) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the schema");
        self.rows.push(row);
    }

    /// Value of `name` in `row`.
    pub fn get(&self, row: usize, name: &str) -> Option<&Value> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        self.rows.get(row).map(|r| &r[i])
    }
}

/// Written header names, including the derived decimal columns.
pub fn header(columns: &[Column]) -> Vec<String> {
    let mut h = Vec::new();
    for c in columns {
        h.push(c.name.to_owned());
        if c.kind == Kind::Frac {
            h.push(format!("{}_decimal", c.name));
        }
    }
    h
}

fn frac_text(v: &Q) -> String {
    Frac(v).to_string()
}

fn csv_fields(column: &Column, v: &Value) -> Vec<String> {
    let s = match v {
        Value::Null => String::new(),
        Value::Int(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Frac(q) => frac_text(q),
        Value::Text(t) => t.clone(),
        Value::Bool(b) => b.to_string(),
    };
    if column.kind == Kind::Frac {
        let d = match v {
            Value::Frac(q) => to_f64(q).to_string(),
            _ => String::new(),
        };
        vec![s, d]
    } else {
        vec![s]
    }
}

pub fn emit<W: Write>(table: &Table, format: Format, out: W) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header(table.columns))?;
            for row in &table.rows {
                let fields: Vec<String> =
                    table.columns.iter().zip(row).flat_map(|(c, v)| csv_fields(c, v)).collect();
                w.write_record(fields)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            for row in &table.rows {
                let mut obj = Map::new();
                for (c, v) in table.columns.iter().zip(row) {
                    let j = match v {
                        Value::Null => Json::Null,
                        Value::Int(i) => Json::from(*i),
                        Value::Float(f) => Json::from(*f),
                        Value::Frac(q) => Json::from(frac_text(q)),
                        Value::Text(t) => Json::from(t.clone()),
                        Value::Bool(b) => Json::from(*b),
                    };
                    obj.insert(c.name.to_owned(), j);
                    if c.kind == Kind::Frac {
                        let d = match v {
                            Value::Frac(q) => Json::from(to_f64(q)),
                            _ => Json::Null,
                        };
                        obj.insert(format!("{}_decimal", c.name), d);
                    }
                }
                serde_json::to_writer(&mut out, &Json::Object(obj))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn to_string(table: &Table, format: Format) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    emit(table, format, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn parse_field(kind: Kind, s: &str) -> anyhow::Result<Value> {
    if s.is_empty() && kind != Kind::Text {
        return Ok(Value::Null);
    }
    Ok(match kind {
        Kind::Int => Value::Int(s.parse()?),
        Kind::Float => Value::Float(s.parse()?),
        Kind::Frac => Value::Frac(rational::parse(s).map_err(|e| anyhow!("{e}"))?),
        Kind::Text => Value::Text(s.to_owned()),
        Kind::Bool => Value::Bool(s.parse()?),
    })
}

fn parse_json(kind: Kind, j: &Json) -> anyhow::Result<Value> {
    Ok(match (kind, j) {
        (_, Json::Null) => Value::Null,
        (Kind::Int, Json::Number(n)) => Value::Int(n.as_i64().ok_or_else(|| anyhow!("not an integer: {n}"))?),
        (Kind::Float, Json::Number(n)) => Value::Float(n.as_f64().ok_or_else(|| anyhow!("not a number: {n}"))?),
        (Kind::Frac, Json::String(s)) => Value::Frac(rational::parse(s).map_err(|e| anyhow!("{e}"))?),
        (Kind::Text, Json::String(s)) => Value::Text(s.clone()),
        (Kind::Bool, Json::Bool(b)) => Value::Bool(*b),
        (k, v) => bail!("expected {k:?}, found {v}"),
    })
}

/// Reads a table written by [`emit`] against the same schema.
pub fn parse<R: BufRead>(columns: &'static [Column], format: Format, input: R) -> anyhow::Result<Table> {
    let mut table = Table::new(columns);
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_reader(input);
            let got: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
            if got != header(columns) {
                bail!("header mismatch: {got:?}");
            }
            for rec in r.records() {
                let rec = rec?;
                let mut fields = rec.iter();
                let mut row = Vec::with_capacity(columns.len());
                for c in columns {
                    let s = fields.next().context("short record")?;
                    row.push(parse_field(c.kind, s).with_context(|| format!("column {}", c.name))?);
                    if c.kind == Kind::Frac {
                        fields.next();
                    }
                }
                table.rows.push(row);
            }
        }
        Format::Json => {
            for line in input.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let obj: Map<String, Json> = serde_json::from_str(&line)?;
                let row = columns
                    .iter()
                    .map(|c| {
                        let j = obj.get(c.name).with_context(|| format!("missing key {}", c.name))?;
                        parse_json(c.kind, j).with_context(|| format!("key {}", c.name))
                    })
                    .collect::<anyhow::Result<_>>()?;
                table.rows.push(row);
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pncache_core::rational::q;

    const SCHEMA: &[Column] = &[
        col("n", Kind::Int),
        col("x", Kind::Float),
        col("r", Kind::Frac),
        col("name", Kind::Text),
        col("ok", Kind::Bool),
    ];

    fn sample() -> Table {
        let mut t = Table::new(SCHEMA);
        t.push(vec![3u32.into(), 0.1.into(), q(57, 28).into(), "a, \"b\"".into(), true.into()]);
        t.push(vec![Value::Null, 1e-300.into(), Value::Null, "".into(), false.into()]);
        t.push(vec![(-7i64).into(), (-2.5).into(), q(-3, 1).into(), "z".into(), Value::Null]);
        t
    }

    #[test]
    fn csv_header_and_rows() {
        let mut t = Table::new(SCHEMA);
        assert_eq!(to_string(&t, Format::Csv).unwrap(), "n,x,r,r_decimal,name,ok\n");
        t.push(vec![1u32.into(), 0.5.into(), q(3, 2).into(), "w".into(), true.into()]);
        assert_eq!(to_string(&t, Format::Csv).unwrap(), "n,x,r,r_decimal,name,ok\n1,0.5,3/2,1.5,w,true\n");
    }

    #[test]
    fn json_lines() {
        let mut t = Table::new(SCHEMA);
        assert_eq!(to_string(&t, Format::Json).unwrap(), "");
        t.push(vec![1u32.into(), 0.5.into(), q(3, 2).into(), "w".into(), true.into()]);
        assert_eq!(
            to_string(&t, Format::Json).unwrap(),
            "{\"n\":1,\"x\":0.5,\"r\":\"3/2\",\"r_decimal\":1.5,\"name\":\"w\",\"ok\":true}\n"
        );
    }

    #[test]
    fn round_trip_both_formats() {
        let t = sample();
        for f in [Format::Csv, Format::Json] {
            let s = to_string(&t, f).unwrap();
            assert_eq!(parse(SCHEMA, f, s.as_bytes()).unwrap(), t, "{f:?}");
        }
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(parse(SCHEMA, Format::Csv, "a,b\n".as_bytes()).is_err());
        assert!("xml".parse::<Format>().is_err());
    }
}

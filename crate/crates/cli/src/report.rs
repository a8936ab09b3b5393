//! Report files: JSON `{meta, data}` or a single CSV table, plus the readers
//! that load them back.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::Path;

/// A float that survives JSON even when non-finite (written as "inf", "-inf" or "nan").
#[derive(Clone, Copy, Debug)]
pub struct Num(pub f64);

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0 || (self.0.is_nan() && other.0.is_nan())
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(non_finite(self.0))
        }
    }
}

fn non_finite(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"inf\", \"-inf\" or \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Num(Vec<Num>),
    Bool(Vec<bool>),
    Text(Vec<String>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Num(v) => v.len(),
            Values::Bool(v) => v.len(),
            Values::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell(&self, i: usize) -> String {
        match self {
            Values::Num(v) if v[i].0.is_finite() => format!("{:.16e}", v[i].0),
            Values::Num(v) => non_finite(v[i].0).to_string(),
            Values::Bool(v) => v[i].to_string(),
            Values::Text(v) => v[i].clone(),
        }
    }

    fn infer(cells: Vec<String>) -> Values {
        if let Some(v) = cells.iter().map(|c| c.parse::<f64>().ok().map(Num)).collect() {
            return Values::Num(v);
        }
        if let Some(v) = cells.iter().map(|c| c.parse::<bool>().ok()).collect() {
            return Values::Bool(v);
        }
        Values::Text(cells)
    }

    pub fn as_num(&self) -> Option<Vec<f64>> {
        match self {
            Values::Num(v) => Some(v.iter().map(|x| x.0).collect()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Values,
}

/// Equal-length named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Table(pub Vec<Column>);

impl Table {
    pub fn num(mut self, name: &str, v: impl IntoIterator<Item = f64>) -> Self {
        self.0.push(Column { name: name.into(), values: Values::Num(v.into_iter().map(Num).collect()) });
        self
    }

    pub fn flag(mut self, name: &str, v: impl IntoIterator<Item = bool>) -> Self {
        self.0.push(Column { name: name.into(), values: Values::Bool(v.into_iter().collect()) });
        self
    }

    pub fn text(mut self, name: &str, v: impl IntoIterator<Item = String>) -> Self {
        self.0.push(Column { name: name.into(), values: Values::Text(v.into_iter().collect()) });
        self
    }

    pub fn rows(&self) -> usize {
        self.0.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&Values> {
        self.0.iter().find(|c| c.name == name).map(|c| &c.values)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub epsilon: f64,
    pub truncation: usize,
    pub precision: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub data: Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn to_json(r: &Report) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

pub fn to_csv(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(t.0.iter().map(|c| c.name.as_str())).expect("in-memory write");
    for i in 0..t.rows() {
        w.write_record(t.0.iter().map(|c| c.values.cell(i))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn render(r: &Report, format: Format) -> String {
    match format {
        Format::Json => to_json(r),
        Format::Csv => to_csv(&r.data),
    }
}

pub fn read_json(text: &str) -> Result<Report, String> {
    serde_json::from_str(text).map_err(|e| format!("bad JSON report: {e}"))
}

pub fn read_csv(text: &str) -> Result<Table, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let names: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let mut cols: Vec<Vec<String>> = vec![vec![]; names.len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| format!("bad CSV report: {e}"))?;
        for (c, v) in cols.iter_mut().zip(rec.iter()) {
            c.push(v.to_string());
        }
    }
    Ok(Table(names.into_iter().zip(cols).map(|(name, c)| Column { name, values: Values::infer(c) }).collect()))
}

/// Write via a temporary file in the target directory and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            meta: Meta { epsilon: 0.5, truncation: 8, precision: "standard".into(), version: "0".into() },
            data: Table::default()
                .num("x", [0.1, 1.0 / 3.0, f64::INFINITY, f64::NAN])
                .flag("ok", [true, false, true, true])
                .text("note", ["a".into(), "b, c".into(), "".into(), "d\"e".into()]),
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(read_json(&to_json(&r)).unwrap(), r);
    }

    #[test]
    fn csv_round_trip_keeps_every_bit() {
        let r = sample();
        assert_eq!(read_csv(&to_csv(&r.data)).unwrap(), r.data);
        let t = Table::default().num("y", [std::f64::consts::PI, 1e-300, -2.5e17]);
        assert_eq!(read_csv(&to_csv(&t)).unwrap(), t);
    }

    #[test]
    fn csv_cells_have_seventeen_digits() {
        let t = Table::default().num("y", [0.1]);
        assert_eq!(to_csv(&t), "y\n1.0000000000000001e-1\n");
    }
}

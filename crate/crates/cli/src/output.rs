use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Float(v)
        } else {
            Cell::Null
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::from)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i64)
            }
        }
        impl From<Option<$t>> for Cell {
            fn from(v: Option<$t>) -> Self {
                v.map_or(Cell::Null, |v| Cell::Int(v as i64))
            }
        }
    )*};
}
int_cell!(u32, u64, usize);

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // Debug is the shortest representation that reads back exactly
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Null => Value::Null,
        }
    }
}

/// Rows sharing one set of columns; every row echoes its parameters.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let encode = |e: csv::Error| CliError::Encode(e.to_string());
        w.write_record(&self.columns).map_err(encode)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(encode)?;
        }
        w.into_inner().map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// `{spec, provenance {version, seed, timestamp}, data}`, pretty printed.
pub fn json_document(spec: Value, seed: u64, timestamp: Option<u64>, table: &Table) -> Result<Vec<u8>, CliError> {
    let mut root = Map::new();
    root.insert("spec".into(), spec);
    let mut prov = Map::new();
    prov.insert("version".into(), Value::from(kpspin_core::VERSION));
    prov.insert("seed".into(), Value::from(seed));
    prov.insert("timestamp".into(), timestamp.map_or(Value::Null, Value::from));
    root.insert("provenance".into(), Value::Object(prov));
    root.insert("data".into(), table.to_json_rows());
    let mut out = serde_json::to_vec_pretty(&Value::Object(root)).map_err(|e| CliError::Encode(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

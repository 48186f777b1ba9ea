use std::collections::HashMap;
use std::path::Path;

use super::read_to_string;
use crate::error::{Error, Result};
use crate::geom::{Column, FeatureLayer, Value};

/// A CSV file as typed columns. Empty fields are nodata; a column whose
/// fields all parse as integers is integer, as numbers is numeric, otherwise
/// text.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub columns: Vec<Column>,
    /// Raw field text, kept for key matching.
    raw: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if headers.is_empty() {
            return Err(Error::format("csv", "missing header row"));
        }
        let mut raw = vec![Vec::new(); headers.len()];
        for record in reader.records() {
            let record = record?;
            for (col, field) in raw.iter_mut().zip(record.iter()) {
                col.push(field.to_string());
            }
        }
        let columns = raw
            .iter()
            .map(|fields| Column::from_values(fields.iter().map(|f| parse_field(f)).collect()))
            .collect();
        Ok(CsvTable { headers, columns, raw })
    }

    pub fn n_rows(&self) -> usize {
        self.raw.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.position(name).map(|i| &self.columns[i])
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

fn parse_field(f: &str) -> Value {
    let t = f.trim();
    if t.is_empty() {
        Value::Null
    } else if let Ok(i) = t.parse::<i64>() {
        Value::Integer(i)
    } else if let Some(x) = t.parse::<f64>().ok().filter(|x| x.is_finite()) {
        Value::Number(x)
    } else {
        Value::Text(f.to_string())
    }
}

/// Canonical join key: numeric text compares by value, so `5`, `5.0` and
/// the integer 5 all match.
fn key_of_text(s: &str) -> Option<String> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    Some(match t.parse::<f64>() {
        Ok(x) if x.is_finite() => format!("{x}"),
        _ => t.to_string(),
    })
}

fn key_of_value(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::Integer(i) => Some(format!("{}", *i as f64)),
        Value::Number(x) => Some(format!("{x}")),
        Value::Boolean(b) => Some(b.to_string()),
        Value::Text(s) => key_of_text(s),
    }
}

pub fn read_csv_table(path: impl AsRef<Path>) -> Result<CsvTable> {
    CsvTable::parse(&read_to_string(path.as_ref())?)
}

/// Left join of a CSV file onto `layer`; see [`join_table`].
pub fn read_csv_join(
    layer: &FeatureLayer,
    path: impl AsRef<Path>,
    layer_key: &str,
    csv_key: &str,
    overwrite: bool,
) -> Result<FeatureLayer> {
    join_table(layer, &read_csv_table(path)?, layer_key, csv_key, overwrite)
}

/// Adds every non-key column of `table` to a copy of `layer`, matching rows
/// on the key columns. Layer order is kept; unmatched rows get nodata.
pub fn join_table(
    layer: &FeatureLayer,
    table: &CsvTable,
    layer_key: &str,
    csv_key: &str,
    overwrite: bool,
) -> Result<FeatureLayer> {
    let lk = layer
        .attributes()
        .get(layer_key)
        .ok_or_else(|| Error::MissingColumn(layer_key.to_string()))?;
    let ck = table
        .position(csv_key)
        .ok_or_else(|| Error::MissingColumn(csv_key.to_string()))?;
    let mut index: HashMap<String, usize> = HashMap::new();
    for (row, field) in table.raw[ck].iter().enumerate() {
        if let Some(k) = key_of_text(field) {
            if index.insert(k, row).is_some() {
                return Err(Error::format("csv join", format!("duplicate key '{field}' in column '{csv_key}'")));
            }
        }
    }
    let matches: Vec<Option<usize>> = (0..layer.len())
        .map(|i| key_of_value(&lk.get(i)).and_then(|k| index.get(&k).copied()))
        .collect();

    let mut out = layer.clone();
    for (c, name) in table.headers.iter().enumerate() {
        if c == ck {
            continue;
        }
        let values = matches
            .iter()
            .map(|m| m.map_or(Value::Null, |r| table.columns[c].get(r)))
            .collect();
        out.add_column(name.clone(), Column::from_values(values), overwrite)?;
    }
    Ok(out)
}

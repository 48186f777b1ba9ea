use std::fmt;

use super::{Geometry, GeometryKind, LineString, Point2, Polygon};
use crate::error::{Error, Result};

/// A single attribute cell. `Null` is the nodata marker.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Boolean(bool),
    Integer(i64),
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Integer(i) => Some(*i as f64),
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Number(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

/// One typed attribute column; `None` entries are nodata.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Boolean(Vec<Option<bool>>),
    Integer(Vec<Option<i64>>),
    Number(Vec<Option<f64>>),
    Text(Vec<Option<String>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Boolean(v) => v.len(),
            Column::Integer(v) => v.len(),
            Column::Number(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, row: usize) -> Value {
        match self {
            Column::Boolean(v) => v[row].map_or(Value::Null, Value::Boolean),
            Column::Integer(v) => v[row].map_or(Value::Null, Value::Integer),
            Column::Number(v) => v[row].map_or(Value::Null, Value::Number),
            Column::Text(v) => v[row].clone().map_or(Value::Null, Value::Text),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Column::Integer(_) | Column::Number(_))
    }

    /// Numeric view of the column; `None` for text or boolean columns.
    pub fn to_f64(&self) -> Option<Vec<Option<f64>>> {
        match self {
            Column::Integer(v) => Some(v.iter().map(|x| x.map(|i| i as f64)).collect()),
            Column::Number(v) => Some(v.clone()),
            _ => None,
        }
    }

    /// Infers the narrowest column type holding every value. Integers mixed
    /// with floats widen to `Number`; anything mixed with text (or booleans
    /// mixed with numbers) becomes `Text`. An all-null column is `Number`.
    pub fn from_values(values: Vec<Value>) -> Column {
        let (mut has_bool, mut has_int, mut has_num, mut has_text) = (false, false, false, false);
        for v in &values {
            match v {
                Value::Null => {}
                Value::Boolean(_) => has_bool = true,
                Value::Integer(_) => has_int = true,
                Value::Number(_) => has_num = true,
                Value::Text(_) => has_text = true,
            }
        }
        let numeric = has_int || has_num;
        if has_text || (has_bool && numeric) {
            Column::Text(
                values
                    .into_iter()
                    .map(|v| (!v.is_null()).then(|| v.to_string()))
                    .collect(),
            )
        } else if has_bool {
            Column::Boolean(
                values
                    .into_iter()
                    .map(|v| match v {
                        Value::Boolean(b) => Some(b),
                        _ => None,
                    })
                    .collect(),
            )
        } else if has_int && !has_num {
            Column::Integer(
                values
                    .into_iter()
                    .map(|v| match v {
                        Value::Integer(i) => Some(i),
                        _ => None,
                    })
                    .collect(),
            )
        } else {
            Column::Number(values.iter().map(Value::as_f64).collect())
        }
    }
}

/// Columnar attribute table with a fixed row count and unique column names.
/// Column order is insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeTable {
    n_rows: usize,
    columns: Vec<(String, Column)>,
}

impl AttributeTable {
    pub fn new(n_rows: usize) -> Self {
        AttributeTable {
            n_rows,
            columns: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Column)> {
        self.columns.iter().map(|(n, c)| (n.as_str(), c))
    }

    pub fn get(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Adds a column. A name collision is an error unless `overwrite` is
    /// set, in which case the existing column is replaced in place.
    pub fn insert(&mut self, name: impl Into<String>, column: Column, overwrite: bool) -> Result<()> {
        let name = name.into();
        if self.columns.is_empty() && self.n_rows == 0 {
            self.n_rows = column.len();
        }
        if column.len() != self.n_rows {
            return Err(Error::LengthMismatch {
                expected: self.n_rows,
                found: column.len(),
            });
        }
        match self.columns.iter_mut().find(|(n, _)| *n == name) {
            Some(_) if !overwrite => Err(Error::ColumnExists(name)),
            Some(slot) => {
                slot.1 = column;
                Ok(())
            }
            None => {
                self.columns.push((name, column));
                Ok(())
            }
        }
    }

    pub fn value(&self, row: usize, name: &str) -> Option<Value> {
        self.get(name).map(|c| c.get(row))
    }

    /// Numeric column lookup with nodata preserved as `None`.
    pub fn numeric(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let col = self
            .get(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        col.to_f64().ok_or_else(|| Error::ColumnType {
            column: name.to_string(),
            expected: "numeric",
        })
    }
}

/// An ordered, homogeneous collection of geometries with one attribute row
/// per geometry and an opaque coordinate-reference tag.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLayer {
    geometries: Vec<Geometry>,
    attributes: AttributeTable,
    crs: Option<String>,
}

impl FeatureLayer {
    pub fn new(geometries: Vec<Geometry>, attributes: AttributeTable, crs: Option<String>) -> Result<Self> {
        if let Some(first) = geometries.first() {
            let kind = first.kind();
            if let Some(other) = geometries.iter().find(|g| g.kind() != kind) {
                return Err(Error::InvalidGeometry(format!(
                    "layer mixes {kind} and {} geometries",
                    other.kind()
                )));
            }
        }
        let mut attributes = attributes;
        if attributes.n_columns() == 0 {
            attributes.n_rows = geometries.len();
        }
        if attributes.n_rows() != geometries.len() {
            return Err(Error::LengthMismatch {
                expected: geometries.len(),
                found: attributes.n_rows(),
            });
        }
        Ok(FeatureLayer {
            geometries,
            attributes,
            crs,
        })
    }

    pub fn from_points(points: impl IntoIterator<Item = Point2>) -> Self {
        let geometries: Vec<Geometry> = points.into_iter().map(Geometry::Point).collect();
        let n = geometries.len();
        FeatureLayer {
            geometries,
            attributes: AttributeTable::new(n),
            crs: None,
        }
    }

    pub fn from_polygons(polygons: impl IntoIterator<Item = Polygon>) -> Self {
        let geometries: Vec<Geometry> = polygons.into_iter().map(Geometry::Polygon).collect();
        let n = geometries.len();
        FeatureLayer {
            geometries,
            attributes: AttributeTable::new(n),
            crs: None,
        }
    }

    pub fn from_line_strings(lines: impl IntoIterator<Item = LineString>) -> Self {
        let geometries: Vec<Geometry> = lines.into_iter().map(Geometry::LineString).collect();
        let n = geometries.len();
        FeatureLayer {
            geometries,
            attributes: AttributeTable::new(n),
            crs: None,
        }
    }

    pub fn with_crs(mut self, crs: Option<String>) -> Self {
        self.crs = crs;
        self
    }

    pub fn len(&self) -> usize {
        self.geometries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geometries.is_empty()
    }

    /// `None` for an empty layer.
    pub fn kind(&self) -> Option<GeometryKind> {
        self.geometries.first().map(Geometry::kind)
    }

    pub fn geometries(&self) -> &[Geometry] {
        &self.geometries
    }

    pub fn attributes(&self) -> &AttributeTable {
        &self.attributes
    }

    pub fn crs(&self) -> Option<&str> {
        self.crs.as_deref()
    }

    pub fn add_column(&mut self, name: impl Into<String>, column: Column, overwrite: bool) -> Result<()> {
        if column.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: column.len(),
            });
        }
        self.attributes.n_rows = self.len();
        self.attributes.insert(name, column, overwrite)
    }

    pub fn with_column(mut self, name: impl Into<String>, column: Column) -> Result<Self> {
        self.add_column(name, column, false)?;
        Ok(self)
    }

    fn expect_kind(&self, kind: GeometryKind) -> Result<()> {
        match self.kind() {
            Some(k) if k != kind => Err(Error::InvalidGeometry(format!(
                "expected a {kind} layer, found {k}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn points(&self) -> Result<Vec<Point2>> {
        self.expect_kind(GeometryKind::Point)?;
        Ok(self.geometries.iter().filter_map(Geometry::as_point).collect())
    }

    pub fn polygons(&self) -> Result<Vec<&Polygon>> {
        self.expect_kind(GeometryKind::Polygon)?;
        Ok(self.geometries.iter().filter_map(Geometry::as_polygon).collect())
    }

    pub fn line_strings(&self) -> Result<Vec<&LineString>> {
        self.expect_kind(GeometryKind::LineString)?;
        Ok(self
            .geometries
            .iter()
            .filter_map(Geometry::as_line_string)
            .collect())
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        FeatureLayer {
            geometries: self.geometries.iter().map(|g| g.translate(dx, dy)).collect(),
            attributes: self.attributes.clone(),
            crs: self.crs.clone(),
        }
    }
}

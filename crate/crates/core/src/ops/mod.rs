//! Geospatial measurements of land units: distance to points and lines,
//! point and line density, and inverse-distance-weighted interpolation.
//!
//! Every operation yields a [`MeasurementResult`] with one value per source
//! feature, in source order, which can be appended to the zones layer as a
//! new column. Per-feature work runs on the rayon pool; results do not
//! depend on the number of threads.

mod density;
mod distance;
mod idw;

pub use density::{density_of_line, density_of_point, LineDensityMode};
pub use distance::{distance_to_line, distance_to_point};
pub use idw::{idw_cv, idw_estimate, IdwConfig, IdwCvResult, Neighbors, DEFAULT_CANDIDATE_POWERS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{centroid, Column, FeatureLayer, Point2};

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    pub column_name: String,
    pub units: String,
    /// One entry per source feature; `None` is nodata.
    pub values: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

impl MeasurementResult {
    pub(crate) fn new(column_name: &str, units: &str, values: Vec<Option<f64>>) -> Self {
        MeasurementResult {
            column_name: column_name.to_string(),
            units: units.to_string(),
            values,
            warnings: Vec::new(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.column_name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nodata_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn to_column(&self) -> Column {
        Column::Number(self.values.clone())
    }

    /// Appends the values to `layer` under `column_name`.
    pub fn append_to(&self, layer: &mut FeatureLayer, overwrite: bool) -> Result<()> {
        layer.add_column(self.column_name.clone(), self.to_column(), overwrite)
    }
}

/// How a source feature is reduced to a single point.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentativePoint {
    #[default]
    Centroid,
    /// Read the point from two numeric attribute columns.
    Columns { x: String, y: String },
}

/// One representative point per feature, plus warnings for degenerate
/// polygons whose centroid fell back to the vertex mean.
pub fn representative_points(layer: &FeatureLayer, rep: &RepresentativePoint) -> Result<(Vec<Point2>, Vec<String>)> {
    match rep {
        RepresentativePoint::Centroid => {
            let mut warnings = Vec::new();
            let pts = layer
                .geometries()
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let c = centroid(g);
                    if c.degenerate {
                        warnings.push(format!("feature {i}: zero-area polygon, using vertex mean"));
                    }
                    c.point
                })
                .collect();
            Ok((pts, warnings))
        }
        RepresentativePoint::Columns { x, y } => {
            let xs = layer.attributes().numeric(x)?;
            let ys = layer.attributes().numeric(y)?;
            let pts = xs
                .into_iter()
                .zip(ys)
                .enumerate()
                .map(|(i, (x, y))| match (x, y) {
                    (Some(x), Some(y)) => Point2::try_new(x, y),
                    _ => Err(Error::NonFinite(format!("feature {i}: missing representative coordinate"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((pts, Vec::new()))
        }
    }
}

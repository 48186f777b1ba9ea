use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MeasurementResult;
use crate::error::{Error, Result};
use crate::geom::{FeatureLayer, Point2, Polygon, BOUNDARY_EPSILON};
use crate::raster::{rasterize_lines, zonal_cell_count};

/// What the line-density numerator counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineDensityMode {
    /// Number of rasterized line cells inside the zone.
    #[default]
    CellCount,
    /// Cell count times cell size, an approximation of line length.
    LengthApprox,
}

impl FromStr for LineDensityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cell-count" | "cell_count" => Ok(LineDensityMode::CellCount),
            "length-approx" | "length_approx" => Ok(LineDensityMode::LengthApprox),
            other => Err(Error::param(format!("unknown line density mode '{other}'"))),
        }
    }
}

/// Sum of target values (1 each when no column is given) inside each zone,
/// divided by the zone area. Zones with zero area get nodata.
pub fn density_of_point(
    zones: &FeatureLayer,
    targets: &FeatureLayer,
    value_column: Option<&str>,
) -> Result<MeasurementResult> {
    let polys = zones.polygons()?;
    let pts = targets.points()?;
    let mut warnings = Vec::new();
    let weights: Vec<Option<f64>> = match value_column {
        Some(col) => {
            let vals = targets.attributes().numeric(col)?;
            let missing = vals.iter().filter(|v| v.is_none()).count();
            if missing > 0 {
                warnings.push(format!("{missing} targets have no value in '{col}' and were ignored"));
            }
            vals
        }
        None => vec![Some(1.0); pts.len()],
    };

    // Targets sorted by x so each zone only inspects its x-slab.
    let mut by_x: Vec<usize> = (0..pts.len()).collect();
    by_x.sort_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x).then(a.cmp(&b)));
    let xs: Vec<f64> = by_x.iter().map(|&i| pts[i].x).collect();

    let values: Vec<Option<f64>> = polys
        .par_iter()
        .map(|zone| {
            let area = zone.area();
            if area == 0.0 {
                return None;
            }
            let mut inside = targets_in_zone(zone, &pts, &by_x, &xs);
            inside.sort_unstable();
            let total: f64 = inside.iter().filter_map(|&j| weights[j]).sum();
            Some(total / area)
        })
        .collect();

    for (i, poly) in polys.iter().enumerate() {
        if poly.area() == 0.0 {
            warnings.push(format!("zone {i} has zero area; density is nodata"));
        }
    }
    let mut result = MeasurementResult::new("density_of_point", "per square map unit", values);
    result.warnings = warnings;
    Ok(result)
}

fn targets_in_zone(zone: &Polygon, pts: &[Point2], by_x: &[usize], xs: &[f64]) -> Vec<usize> {
    let bb = zone.bbox();
    let lo = xs.partition_point(|&x| x < bb.min_x - BOUNDARY_EPSILON);
    let hi = xs.partition_point(|&x| x <= bb.max_x + BOUNDARY_EPSILON);
    by_x[lo..hi]
        .iter()
        .copied()
        .filter(|&j| {
            let p = pts[j];
            p.y >= bb.min_y - BOUNDARY_EPSILON && p.y <= bb.max_y + BOUNDARY_EPSILON && zone.contains(p)
        })
        .collect()
}

/// Rasterized line cells inside each zone per unit zone area.
pub fn density_of_line(
    zones: &FeatureLayer,
    lines: &FeatureLayer,
    cell_size: f64,
    mode: LineDensityMode,
) -> Result<MeasurementResult> {
    let polys = zones.polygons()?;
    let grid = rasterize_lines(lines, cell_size)?;
    let scale = match mode {
        LineDensityMode::CellCount => 1.0,
        LineDensityMode::LengthApprox => cell_size,
    };
    let values: Vec<Option<f64>> = polys
        .par_iter()
        .map(|zone| {
            let area = zone.area();
            (area > 0.0).then(|| zonal_cell_count(&grid, zone) as f64 * scale / area)
        })
        .collect();
    let warnings = polys
        .iter()
        .enumerate()
        .filter(|(_, p)| p.area() == 0.0)
        .map(|(i, _)| format!("zone {i} has zero area; density is nodata"))
        .collect();
    let units = match mode {
        LineDensityMode::CellCount => "cells per square map unit",
        LineDensityMode::LengthApprox => "map units per square map unit",
    };
    let mut result = MeasurementResult::new("density_of_line", units, values);
    result.warnings = warnings;
    Ok(result)
}

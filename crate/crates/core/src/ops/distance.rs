use rayon::prelude::*;

use super::{representative_points, MeasurementResult, RepresentativePoint};
use crate::error::{Error, Result};
use crate::geom::{FeatureLayer, Point2};
use crate::index::{KdTree, Metric, DEFAULT_LEAF_SIZE};
use crate::raster::rasterize_lines;

/// Distance from each source's representative point to its nearest target.
pub fn distance_to_point(
    sources: &FeatureLayer,
    targets: &FeatureLayer,
    metric: Metric,
    rep: &RepresentativePoint,
) -> Result<MeasurementResult> {
    let target_pts = targets.points()?;
    if target_pts.is_empty() {
        return Err(Error::Empty("no targets"));
    }
    let tree = KdTree::build(&target_pts, DEFAULT_LEAF_SIZE)?;
    let (src, warnings) = representative_points(sources, rep)?;
    let mut result = nearest_distances(&tree, &src, metric, "distance_to_point")?;
    result.warnings = warnings;
    Ok(result)
}

/// Distance from each source to the nearest cell center of the supercover
/// rasterization of `lines` at `cell_size`.
///
/// The center rule bounds the error against the exact point-to-polyline
/// distance by `(sqrt(2)/2 + 1) * cell_size`.
pub fn distance_to_line(
    sources: &FeatureLayer,
    lines: &FeatureLayer,
    cell_size: f64,
    metric: Metric,
    rep: &RepresentativePoint,
) -> Result<MeasurementResult> {
    let grid = rasterize_lines(lines, cell_size)?;
    let centers: Vec<Point2> = grid.set_cells().map(|(c, r)| grid.cell_center(c, r)).collect();
    let tree = KdTree::build(&centers, DEFAULT_LEAF_SIZE)?;
    let (src, warnings) = representative_points(sources, rep)?;
    let mut result = nearest_distances(&tree, &src, metric, "distance_to_line")?;
    result.warnings = warnings;
    Ok(result)
}

fn nearest_distances(tree: &KdTree, src: &[Point2], metric: Metric, name: &str) -> Result<MeasurementResult> {
    let values = src
        .par_iter()
        .map(|&p| tree.nearest(p, metric).map(|n| Some(n.distance)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementResult::new(name, "map units", values))
}

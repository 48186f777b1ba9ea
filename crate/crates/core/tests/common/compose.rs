//! Fixture models composed by hand from the individual operations.

use std::path::{Path, PathBuf};

use landsuit::aggregate::{ahp_weights, weighted_sum, ComparisonMatrix};
use landsuit::geom::{Column, FeatureLayer, Value};
use landsuit::index::Metric;
use landsuit::io::{geojson_string, join_table, read_csv_table, read_geojson, GeoJsonOptions};
use landsuit::ops::{
    density_of_line, density_of_point, distance_to_line, distance_to_point, idw_estimate, IdwConfig, LineDensityMode,
    Neighbors, RepresentativePoint,
};
use landsuit::rescale::{linear, natural_breaks, reclassify, Category, LinearScale, ReclassifyTable, ScaleOrder};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn layer(name: &str) -> FeatureLayer {
    read_geojson(fixtures().join(name), GeoJsonOptions::default()).unwrap()
}

fn finish(mut units: FeatureLayer, criteria: Vec<(&str, Vec<Option<f64>>)>, weights: &[f64], normalize: bool) -> String {
    let cols: Vec<&[Option<f64>]> = criteria.iter().map(|(_, v)| v.as_slice()).collect();
    let s = weighted_sum(&cols, weights, normalize).unwrap();
    for (name, v) in &criteria {
        units.add_column(*name, Column::Number(v.clone()), true).unwrap();
    }
    units.add_column("suitability", Column::Number(s), true).unwrap();
    geojson_string(&units)
}

pub fn manual_one() -> String {
    let units = layer("parcels.geojson");
    let d = distance_to_point(&units, &layer("schools.geojson"), Metric::Euclidean, &RepresentativePoint::Centroid).unwrap();
    let s = linear(&d.values, &LinearScale::new(1.0, 9.0, ScaleOrder::Inverse).unwrap()).unwrap();
    finish(units, vec![("school_access", s.values)], &[1.0], false)
}

pub fn manual_two() -> String {
    let units = layer("parcels.geojson");
    let roads = layer("roads.geojson");
    let d = distance_to_line(&units, &roads, 10.0, Metric::Euclidean, &RepresentativePoint::Centroid).unwrap();
    let present: Vec<f64> = d.values.iter().flatten().copied().collect();
    let cb = natural_breaks(&present, 3).unwrap();
    let scores = [9.0, 5.0, 1.0];
    let prox: Vec<Option<f64>> = d.values.iter().map(|v| v.map(|x| scores[cb.class_of(x)])).collect();
    let dens = density_of_line(&units, &roads, 10.0, LineDensityMode::LengthApprox).unwrap();
    let dens = linear(&dens.values, &LinearScale::new(1.0, 9.0, ScaleOrder::Regular).unwrap()).unwrap();
    let m = ComparisonMatrix::from_rows(vec![vec![1.0, 3.0], vec![0.3333333333333333, 1.0]]).unwrap();
    let w = ahp_weights(&m).unwrap().weights;
    finish(units, vec![("road_proximity", prox), ("road_density", dens.values)], &w, false)
}

pub fn manual_three() -> String {
    let units = layer("parcels.geojson");
    let cfg = IdwConfig { power: 2.0, neighbors: Neighbors::Count(8), search_radius: None };
    let gw = idw_estimate(&units, &layer("wells.geojson"), "depth", &cfg, &RepresentativePoint::Centroid).unwrap();
    let gw = linear(&gw.values, &LinearScale::new(0.0, 1.0, ScaleOrder::Inverse).unwrap()).unwrap();
    let table = read_csv_table(fixtures().join("zoning.csv")).unwrap();
    let joined = join_table(&units, &table, "parcel_id", "parcel_id", true).unwrap();
    let col = joined.attributes().get("zone_code").unwrap();
    let codes: Vec<Value> = (0..col.len()).map(|i| col.get(i)).collect();
    let rt = ReclassifyTable::categorical(
        [
            (Category::Text("R1".into()), 1.0),
            (Category::Text("R2".into()), 0.75),
            (Category::Text("C".into()), 0.25),
        ],
        Some(0.0),
    )
    .unwrap();
    let zoning = reclassify(&codes, &rt).unwrap();
    let sd = density_of_point(&units, &layer("schools.geojson"), Some("pupils")).unwrap();
    let sd = linear(&sd.values, &LinearScale::new(0.0, 1.0, ScaleOrder::Regular).unwrap()).unwrap();
    finish(
        units,
        vec![("groundwater", gw.values), ("zoning", zoning), ("school_density", sd.values)],
        &[2.0, 1.0, 1.0],
        true,
    )
}

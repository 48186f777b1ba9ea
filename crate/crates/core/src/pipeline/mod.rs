//! Declarative suitability models.
//!
//! A model document names the land-unit layer, a list of criteria (one
//! measurement plus one transform each) and how to weight them. [`run_model`]
//! reads every dataset once, evaluates criteria in parallel against the
//! in-memory unit layer, combines the scores with a weighted sum and writes
//! at most one output file.
//!
//! ```json
//! {
//!   "version": 1,
//!   "units": "parcels.geojson",
//!   "criteria": [
//!     {
//!       "name": "school_access",
//!       "measure": {"operation": "distance_to_point", "targets": "schools.geojson"},
//!       "transform": {"operation": "linear", "a": 1, "b": 9, "order": "inverse"}
//!     }
//!   ],
//!   "aggregation": {"method": "weights", "weights": [1.0]},
//!   "output": {"column": "suitability", "path": "out.geojson"}
//! }
//! ```

mod model;

pub use model::{
    load_model, parse_model, Aggregation, AggregationMethod, CriterionSpec, LayerSource, Measure, OutputSpec,
    SuitabilityModel, TableJoin, Transform, MEASURE_OPERATIONS, MODEL_VERSION, TRANSFORM_OPERATIONS,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::{weighted_sum, PriorityVector};
use crate::error::{Error, Result};
use crate::geom::{Column, FeatureLayer, Value};
use crate::io::{geojson_string, join_table, parse_geojson, read_to_string, write_string, CsvTable, GeoJsonOptions};
use crate::ops;
use crate::rescale::{self, natural_breaks};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub name: String,
    pub measure: &'static str,
    pub transform: &'static str,
    pub weight: f64,
    pub rows: usize,
    pub nodata: usize,
    pub measure_seconds: f64,
    pub transform_seconds: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IoCounters {
    /// Reads per dataset path.
    pub reads: BTreeMap<PathBuf, usize>,
    pub writes: usize,
}

impl IoCounters {
    pub fn max_reads(&self) -> usize {
        self.reads.values().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub load_seconds: f64,
    pub criteria_seconds: f64,
    pub aggregate_seconds: f64,
    pub write_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub version: u64,
    pub units: PathBuf,
    pub unit_rows: usize,
    pub output_column: String,
    pub output_path: Option<PathBuf>,
    pub criteria: Vec<CriterionReport>,
    pub weights: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priority: Option<PriorityVector>,
    pub nodata_units: usize,
    pub io: IoCounters,
    pub timings: Timings,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_string(path.as_ref(), &self.to_json())
    }
}

/// Datasets loaded for one run, keyed by path.
struct Loaded {
    texts: BTreeMap<PathBuf, String>,
    layers: BTreeMap<LayerSource, FeatureLayer>,
    tables: BTreeMap<PathBuf, CsvTable>,
    io: IoCounters,
}

impl Loaded {
    fn load(model: &SuitabilityModel) -> Result<Self> {
        let mut l = Loaded {
            texts: BTreeMap::new(),
            layers: BTreeMap::new(),
            tables: BTreeMap::new(),
            io: IoCounters::default(),
        };
        l.layer(&model.units)?;
        for c in &model.criteria {
            if let Some(src) = c.measure.layer_source() {
                l.layer(src)?;
            }
            if let Some(t) = c.measure.table_path() {
                if !l.tables.contains_key(t) {
                    let table = CsvTable::parse(l.text(t)?)?;
                    l.tables.insert(t.to_path_buf(), table);
                }
            }
        }
        Ok(l)
    }

    fn text(&mut self, path: &Path) -> Result<&str> {
        if !self.texts.contains_key(path) {
            let t = read_to_string(path)?;
            *self.io.reads.entry(path.to_path_buf()).or_default() += 1;
            self.texts.insert(path.to_path_buf(), t);
        }
        Ok(&self.texts[path])
    }

    fn layer(&mut self, src: &LayerSource) -> Result<()> {
        if !self.layers.contains_key(src) {
            let opts = GeoJsonOptions { explode: src.explode };
            let layer = parse_geojson(self.text(&src.path)?, opts).map_err(|e| match e {
                Error::Format { context, message } => Error::Format {
                    context: format!("{}: {context}", src.path.display()),
                    message,
                },
                other => other,
            })?;
            self.layers.insert(src.clone(), layer);
        }
        Ok(())
    }
}

/// Raw output of a measurement: numbers, or attribute values that may be
/// categorical.
#[derive(Debug, Clone, PartialEq)]
pub enum Measured {
    Numeric(Vec<Option<f64>>),
    Values(Vec<Value>),
}

impl Measured {
    fn numeric(&self) -> Result<Vec<Option<f64>>> {
        match self {
            Measured::Numeric(v) => Ok(v.clone()),
            Measured::Values(vals) => vals
                .iter()
                .map(|v| match v {
                    Value::Null => Ok(None),
                    v => v
                        .as_f64()
                        .map(Some)
                        .ok_or_else(|| Error::param(format!("value '{v}' is not numeric"))),
                })
                .collect(),
        }
    }
}

/// Evaluates one measurement against the units.
pub fn measure<'a>(
    units: &FeatureLayer,
    m: &Measure,
    layers: &dyn Fn(&LayerSource) -> Result<&'a FeatureLayer>,
    tables: &dyn Fn(&Path) -> Result<&'a CsvTable>,
) -> Result<(Measured, Vec<String>)> {
    let r = match m {
        Measure::DistanceToPoint {
            targets,
            metric,
            representative,
        } => ops::distance_to_point(units, layers(targets)?, *metric, representative)?,
        Measure::DistanceToLine {
            lines,
            cell_size,
            metric,
            representative,
        } => ops::distance_to_line(units, layers(lines)?, *cell_size, *metric, representative)?,
        Measure::DensityOfPoint { targets, value_column } => {
            ops::density_of_point(units, layers(targets)?, value_column.as_deref())?
        }
        Measure::DensityOfLine { lines, cell_size, mode } => {
            ops::density_of_line(units, layers(lines)?, *cell_size, *mode)?
        }
        Measure::Idw {
            known,
            value_column,
            config,
            representative,
        } => ops::idw_estimate(units, layers(known)?, value_column, config, representative)?,
        Measure::Attribute { column, join } => {
            let col = match join {
                None => units
                    .attributes()
                    .get(column)
                    .ok_or_else(|| Error::MissingColumn(column.clone()))?
                    .clone(),
                Some(j) => {
                    let joined = join_table(units, tables(&j.table)?, &j.layer_key, &j.table_key, true)?;
                    joined
                        .attributes()
                        .get(column)
                        .ok_or_else(|| Error::MissingColumn(column.clone()))?
                        .clone()
                }
            };
            let values = (0..col.len()).map(|i| col.get(i)).collect();
            return Ok((Measured::Values(values), Vec::new()));
        }
    };
    Ok((Measured::Numeric(r.values), r.warnings))
}

/// Applies one transform; returns scores and warnings.
pub fn transform(measured: &Measured, t: &Transform) -> Result<(Vec<Option<f64>>, Vec<String>)> {
    match t {
        Transform::Linear(scale) => {
            let out = rescale::linear(&measured.numeric()?, scale)?;
            let warnings = if out.constant_input {
                vec!["constant input mapped to the scale midpoint".to_string()]
            } else {
                Vec::new()
            };
            Ok((out.values, warnings))
        }
        Transform::Reclassify { table } => {
            let out = match measured {
                Measured::Values(v) => rescale::reclassify(v, table)?,
                Measured::Numeric(v) => rescale::reclassify_numbers(v, table)?,
            };
            Ok((out, Vec::new()))
        }
        Transform::NaturalBreaks { k, scores } => {
            let values = measured.numeric()?;
            let present: Vec<f64> = values.iter().flatten().copied().collect();
            let cb = natural_breaks(&present, *k)?;
            let out = values.iter().map(|v| v.map(|x| scores[cb.class_of(x)])).collect();
            Ok((out, vec![format!("natural breaks {:?}, GVF {:.6}", cb.breaks, cb.gvf)]))
        }
    }
}

struct CriterionOutcome {
    scores: Vec<Option<f64>>,
    report: CriterionReport,
}

/// Runs a validated model. On success the returned layer is the unit layer
/// with the suitability column (and, if requested, one score column per
/// criterion) appended; it is also written to the model's output path when
/// one is set.
pub fn run_model(model: &SuitabilityModel) -> Result<(FeatureLayer, RunReport)> {
    let start = Instant::now();
    let mut loaded = Loaded::load(model)?;
    let load_seconds = start.elapsed().as_secs_f64();
    let units = loaded.layers[&model.units].clone();

    let t = Instant::now();
    let layers = |s: &LayerSource| {
        loaded
            .layers
            .get(s)
            .ok_or_else(|| Error::MissingColumn(s.path.display().to_string()))
    };
    let tables = |p: &Path| {
        loaded
            .tables
            .get(p)
            .ok_or_else(|| Error::MissingColumn(p.display().to_string()))
    };
    let outcomes: Vec<Result<CriterionOutcome>> = model
        .criteria
        .par_iter()
        .zip(&model.aggregation.weights)
        .map(|(c, &weight)| {
            let stage = |stage: &'static str| {
                let name = c.name.clone();
                move |e: Error| Error::Stage {
                    criterion: name,
                    stage,
                    source: Box::new(e),
                }
            };
            let t0 = Instant::now();
            let (measured, mut warnings) = measure(&units, &c.measure, &layers, &tables).map_err(stage("measure"))?;
            let measure_seconds = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let (scores, tw) = transform(&measured, &c.transform).map_err(stage("transform"))?;
            warnings.extend(tw);
            let nodata = scores.iter().filter(|s| s.is_none()).count();
            Ok(CriterionOutcome {
                report: CriterionReport {
                    name: c.name.clone(),
                    measure: c.measure.operation(),
                    transform: c.transform.operation(),
                    weight,
                    rows: scores.len(),
                    nodata,
                    measure_seconds,
                    transform_seconds: t1.elapsed().as_secs_f64(),
                    warnings,
                },
                scores,
            })
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let criteria_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let columns: Vec<&[Option<f64>]> = outcomes.iter().map(|o| o.scores.as_slice()).collect();
    let suitability = weighted_sum(&columns, &model.aggregation.weights, model.aggregation.normalize)?;
    let nodata_units = suitability.iter().filter(|v| v.is_none()).count();
    let mut out = units;
    if model.output.keep_criteria {
        for o in &outcomes {
            out.add_column(o.report.name.clone(), Column::Number(o.scores.clone()), true)?;
        }
    }
    out.add_column(model.output.column.clone(), Column::Number(suitability), true)?;
    let aggregate_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    if let Some(path) = &model.output.path {
        write_string(path, &geojson_string(&out))?;
        loaded.io.writes += 1;
    }
    let write_seconds = t.elapsed().as_secs_f64();

    let mut warnings = Vec::new();
    if nodata_units > 0 {
        warnings.push(format!("{nodata_units} units have nodata suitability"));
    }
    let report = RunReport {
        version: MODEL_VERSION,
        units: model.units.path.clone(),
        unit_rows: out.len(),
        output_column: model.output.column.clone(),
        output_path: model.output.path.clone(),
        weights: model
            .criteria
            .iter()
            .zip(&model.aggregation.weights)
            .map(|(c, w)| (c.name.clone(), *w))
            .collect(),
        criteria: outcomes.into_iter().map(|o| o.report).collect(),
        priority: model.aggregation.priority.clone(),
        nodata_units,
        io: loaded.io,
        timings: Timings {
            load_seconds,
            criteria_seconds,
            aggregate_seconds,
            write_seconds,
            total_seconds: start.elapsed().as_secs_f64(),
        },
        warnings,
    };
    Ok((out, report))
}

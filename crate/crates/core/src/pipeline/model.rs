use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::aggregate::{ahp_weights, random_ahp, ComparisonMatrix, PriorityVector, WEIGHT_SUM_TOLERANCE};
use crate::error::{Error, Result};
use crate::index::Metric;
use crate::io::read_to_string;
use crate::ops::{IdwConfig, LineDensityMode, Neighbors, RepresentativePoint};
use crate::rescale::{LinearScale, ReclassifyTable, ScaleOrder};

pub const MODEL_VERSION: u64 = 1;

pub const MEASURE_OPERATIONS: [&str; 6] = [
    "distance_to_point",
    "distance_to_line",
    "density_of_point",
    "density_of_line",
    "idw",
    "attribute",
];

pub const TRANSFORM_OPERATIONS: [&str; 3] = ["linear", "reclassify", "natural_breaks"];

/// A GeoJSON layer on disk. `explode` splits Multi* geometries into parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LayerSource {
    pub path: PathBuf,
    pub explode: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableJoin {
    pub table: PathBuf,
    pub layer_key: String,
    pub table_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "operation", rename_all = "snake_case")]
pub enum Measure {
    DistanceToPoint {
        targets: LayerSource,
        metric: Metric,
        representative: RepresentativePoint,
    },
    DistanceToLine {
        lines: LayerSource,
        cell_size: f64,
        metric: Metric,
        representative: RepresentativePoint,
    },
    DensityOfPoint {
        targets: LayerSource,
        value_column: Option<String>,
    },
    DensityOfLine {
        lines: LayerSource,
        cell_size: f64,
        mode: LineDensityMode,
    },
    Idw {
        known: LayerSource,
        value_column: String,
        config: IdwConfig,
        representative: RepresentativePoint,
    },
    /// An attribute of the units, optionally joined in from a CSV table.
    Attribute { column: String, join: Option<TableJoin> },
}

impl Measure {
    pub fn operation(&self) -> &'static str {
        match self {
            Measure::DistanceToPoint { .. } => "distance_to_point",
            Measure::DistanceToLine { .. } => "distance_to_line",
            Measure::DensityOfPoint { .. } => "density_of_point",
            Measure::DensityOfLine { .. } => "density_of_line",
            Measure::Idw { .. } => "idw",
            Measure::Attribute { .. } => "attribute",
        }
    }

    pub fn layer_source(&self) -> Option<&LayerSource> {
        match self {
            Measure::DistanceToPoint { targets, .. } | Measure::DensityOfPoint { targets, .. } => Some(targets),
            Measure::DistanceToLine { lines, .. } | Measure::DensityOfLine { lines, .. } => Some(lines),
            Measure::Idw { known, .. } => Some(known),
            Measure::Attribute { .. } => None,
        }
    }

    pub fn table_path(&self) -> Option<&Path> {
        match self {
            Measure::Attribute { join: Some(j), .. } => Some(&j.table),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "operation", rename_all = "snake_case")]
pub enum Transform {
    Linear(LinearScale),
    Reclassify { table: ReclassifyTable },
    /// Jenks classes scored by `scores[class]`, lowest class first.
    NaturalBreaks { k: usize, scores: Vec<f64> },
}

impl Transform {
    pub fn operation(&self) -> &'static str {
        match self {
            Transform::Linear(_) => "linear",
            Transform::Reclassify { .. } => "reclassify",
            Transform::NaturalBreaks { .. } => "natural_breaks",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSpec {
    pub name: String,
    pub measure: Measure,
    pub transform: Transform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMethod {
    Weights,
    Ahp,
    RandomAhp,
}

/// Aggregation with weights already resolved, in criterion order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregation {
    pub method: AggregationMethod,
    pub weights: Vec<f64>,
    pub normalize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ComparisonMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priority: Option<PriorityVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub column: String,
    pub path: Option<PathBuf>,
    /// Also append each criterion's transformed score under its name.
    pub keep_criteria: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuitabilityModel {
    pub units: LayerSource,
    pub criteria: Vec<CriterionSpec>,
    pub aggregation: Aggregation,
    pub output: OutputSpec,
}

impl SuitabilityModel {
    /// Every file the model reads, units first, without repeats.
    pub fn datasets(&self) -> Vec<PathBuf> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let all = std::iter::once(self.units.path.as_path()).chain(
            self.criteria
                .iter()
                .flat_map(|c| c.measure.layer_source().map(|s| s.path.as_path()).into_iter().chain(c.measure.table_path())),
        );
        for p in all {
            if seen.insert(p.to_path_buf()) {
                out.push(p.to_path_buf());
            }
        }
        out
    }

    pub fn criterion_names(&self) -> Vec<&str> {
        self.criteria.iter().map(|c| c.name.as_str()).collect()
    }
}

/// Reads and validates a model document; relative paths resolve against the
/// document's directory.
pub fn load_model(path: impl AsRef<Path>) -> Result<SuitabilityModel> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_model(&text, base)
}

/// Parses a model document. All problems found are reported together.
pub fn parse_model(text: &str, base_dir: &Path) -> Result<SuitabilityModel> {
    let doc: Json = serde_json::from_str(text).map_err(|e| Error::Model(vec![format!("malformed document: {e}")]))?;
    let mut p = Parser {
        base: base_dir,
        errors: Vec::new(),
    };
    let Some(obj) = doc.as_object() else {
        return Err(Error::Model(vec!["document is not an object".into()]));
    };
    for key in obj.keys() {
        if !["version", "units", "criteria", "aggregation", "output"].contains(&key.as_str()) {
            p.err(format!("unknown top-level key '{key}'"));
        }
    }
    match obj.get("version").and_then(Json::as_u64) {
        Some(MODEL_VERSION) => {}
        Some(v) => p.err(format!("unsupported version {v}, expected {MODEL_VERSION}")),
        None => p.err("missing 'version'"),
    }
    let units = match obj.get("units") {
        Some(u) => p.layer_source(u, "units"),
        None => {
            p.err("missing 'units'");
            None
        }
    };
    let criteria = p.criteria(obj.get("criteria"));
    let names: Vec<&str> = criteria.iter().map(|c| c.name.as_str()).collect();
    let aggregation = match obj.get("aggregation") {
        Some(a) => p.aggregation(a, &names),
        None => {
            p.err("missing 'aggregation'");
            None
        }
    };
    let output = p.output(obj.get("output"), &names);
    if !p.errors.is_empty() {
        return Err(Error::Model(p.errors));
    }
    Ok(SuitabilityModel {
        units: units.expect("no errors"),
        criteria,
        aggregation: aggregation.expect("no errors"),
        output: output.expect("no errors"),
    })
}

struct Parser<'a> {
    base: &'a Path,
    errors: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SourceDoc {
    Path(PathBuf),
    Full {
        path: PathBuf,
        #[serde(default)]
        explode: bool,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceToPointDoc {
    #[allow(dead_code)]
    operation: String,
    targets: Json,
    #[serde(default = "euclidean")]
    metric: Metric,
    #[serde(default)]
    representative: RepresentativePoint,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceToLineDoc {
    #[allow(dead_code)]
    operation: String,
    lines: Json,
    cell_size: f64,
    #[serde(default = "euclidean")]
    metric: Metric,
    #[serde(default)]
    representative: RepresentativePoint,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityOfPointDoc {
    #[allow(dead_code)]
    operation: String,
    targets: Json,
    #[serde(default)]
    value_column: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityOfLineDoc {
    #[allow(dead_code)]
    operation: String,
    lines: Json,
    cell_size: f64,
    #[serde(default)]
    mode: LineDensityMode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IdwDoc {
    #[allow(dead_code)]
    operation: String,
    known: Json,
    value_column: String,
    #[serde(default = "default_power")]
    power: f64,
    #[serde(default = "default_neighbors")]
    neighbors: Neighbors,
    #[serde(default)]
    search_radius: Option<f64>,
    #[serde(default)]
    representative: RepresentativePoint,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeDoc {
    #[allow(dead_code)]
    operation: String,
    column: String,
    #[serde(default)]
    table: Option<PathBuf>,
    #[serde(default)]
    layer_key: Option<String>,
    #[serde(default)]
    table_key: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearDoc {
    #[allow(dead_code)]
    operation: String,
    a: f64,
    b: f64,
    #[serde(default)]
    order: ScaleOrder,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReclassifyDoc {
    #[allow(dead_code)]
    operation: String,
    table: ReclassifyTable,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NaturalBreaksDoc {
    #[allow(dead_code)]
    operation: String,
    k: usize,
    scores: Vec<f64>,
}

fn euclidean() -> Metric {
    Metric::Euclidean
}

fn default_power() -> f64 {
    IdwConfig::default().power
}

fn default_neighbors() -> Neighbors {
    IdwConfig::default().neighbors
}

impl Parser<'_> {
    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn typed<T: DeserializeOwned>(&mut self, v: &Json, ctx: &str) -> Option<T> {
        match serde_json::from_value(v.clone()) {
            Ok(t) => Some(t),
            Err(e) => {
                self.err(format!("{ctx}: {e}"));
                None
            }
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn existing(&mut self, p: &Path, ctx: &str) -> Option<PathBuf> {
        let full = self.resolve(p);
        if full.is_file() {
            Some(full)
        } else {
            self.err(format!("{ctx}: dataset '{}' not found", full.display()));
            None
        }
    }

    fn layer_source(&mut self, v: &Json, ctx: &str) -> Option<LayerSource> {
        let (path, explode) = match self.typed::<SourceDoc>(v, ctx)? {
            SourceDoc::Path(p) => (p, false),
            SourceDoc::Full { path, explode } => (path, explode),
        };
        let path = self.existing(&path, ctx)?;
        Some(LayerSource { path, explode })
    }

    fn positive(&mut self, x: f64, what: &str, ctx: &str) {
        if !(x.is_finite() && x > 0.0) {
            self.err(format!("{ctx}: {what} must be positive, got {x}"));
        }
    }

    fn criteria(&mut self, v: Option<&Json>) -> Vec<CriterionSpec> {
        let Some(list) = v.and_then(Json::as_array) else {
            self.err("'criteria' must be a list");
            return Vec::new();
        };
        if list.is_empty() {
            self.err("at least one criterion is required");
        }
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, c) in list.iter().enumerate() {
            let name = c.get("name").and_then(Json::as_str).map(str::to_string);
            let ctx = match &name {
                Some(n) => format!("criterion '{n}'"),
                None => format!("criterion {i}"),
            };
            match &name {
                None => self.err(format!("{ctx}: missing 'name'")),
                Some(n) if n.is_empty() => self.err(format!("{ctx}: empty name")),
                Some(n) if !seen.insert(n.clone()) => self.err(format!("duplicate criterion name '{n}'")),
                _ => {}
            }
            if let Some(obj) = c.as_object() {
                for key in obj.keys() {
                    if !["name", "measure", "transform"].contains(&key.as_str()) {
                        self.err(format!("{ctx}: unknown key '{key}'"));
                    }
                }
            }
            let measure = match c.get("measure") {
                Some(m) => self.measure(m, &format!("{ctx} measure")),
                None => {
                    self.err(format!("{ctx}: missing 'measure'"));
                    None
                }
            };
            let transform = match c.get("transform") {
                Some(t) => self.transform(t, &format!("{ctx} transform")),
                None => {
                    self.err(format!("{ctx}: missing 'transform'"));
                    None
                }
            };
            if let (Some(name), Some(measure), Some(transform)) = (name, measure, transform) {
                out.push(CriterionSpec {
                    name,
                    measure,
                    transform,
                });
            }
        }
        out
    }

    fn operation<'j>(&mut self, v: &'j Json, ctx: &str) -> Option<&'j str> {
        let op = v.get("operation").and_then(Json::as_str);
        if op.is_none() {
            self.err(format!("{ctx}: missing 'operation'"));
        }
        op
    }

    fn measure(&mut self, v: &Json, ctx: &str) -> Option<Measure> {
        let op = self.operation(v, ctx)?;
        match op {
            "distance_to_point" => {
                let d: DistanceToPointDoc = self.typed(v, ctx)?;
                let targets = self.layer_source(&d.targets, ctx)?;
                Some(Measure::DistanceToPoint {
                    targets,
                    metric: d.metric,
                    representative: d.representative,
                })
            }
            "distance_to_line" => {
                let d: DistanceToLineDoc = self.typed(v, ctx)?;
                self.positive(d.cell_size, "cell_size", ctx);
                let lines = self.layer_source(&d.lines, ctx)?;
                Some(Measure::DistanceToLine {
                    lines,
                    cell_size: d.cell_size,
                    metric: d.metric,
                    representative: d.representative,
                })
            }
            "density_of_point" => {
                let d: DensityOfPointDoc = self.typed(v, ctx)?;
                let targets = self.layer_source(&d.targets, ctx)?;
                Some(Measure::DensityOfPoint {
                    targets,
                    value_column: d.value_column,
                })
            }
            "density_of_line" => {
                let d: DensityOfLineDoc = self.typed(v, ctx)?;
                self.positive(d.cell_size, "cell_size", ctx);
                let lines = self.layer_source(&d.lines, ctx)?;
                Some(Measure::DensityOfLine {
                    lines,
                    cell_size: d.cell_size,
                    mode: d.mode,
                })
            }
            "idw" => {
                let d: IdwDoc = self.typed(v, ctx)?;
                let config = IdwConfig {
                    power: d.power,
                    neighbors: d.neighbors,
                    search_radius: d.search_radius,
                };
                if let Err(e) = config.validate() {
                    self.err(format!("{ctx}: {e}"));
                }
                let known = self.layer_source(&d.known, ctx)?;
                Some(Measure::Idw {
                    known,
                    value_column: d.value_column,
                    config,
                    representative: d.representative,
                })
            }
            "attribute" => {
                let d: AttributeDoc = self.typed(v, ctx)?;
                let join = match (d.table, d.layer_key, d.table_key) {
                    (None, None, None) => None,
                    (Some(t), Some(lk), tk) => {
                        let table = self.existing(&t, ctx)?;
                        Some(TableJoin {
                            table,
                            table_key: tk.unwrap_or_else(|| lk.clone()),
                            layer_key: lk,
                        })
                    }
                    _ => {
                        self.err(format!("{ctx}: a joined attribute needs 'table' and 'layer_key'"));
                        return None;
                    }
                };
                Some(Measure::Attribute { column: d.column, join })
            }
            other => {
                self.err(format!("{ctx}: unknown operation '{other}'"));
                None
            }
        }
    }

    fn transform(&mut self, v: &Json, ctx: &str) -> Option<Transform> {
        let op = self.operation(v, ctx)?;
        match op {
            "linear" => {
                let d: LinearDoc = self.typed(v, ctx)?;
                let scale = LinearScale {
                    a: d.a,
                    b: d.b,
                    order: d.order,
                };
                if let Err(e) = scale.validate() {
                    self.err(format!("{ctx}: {e}"));
                }
                Some(Transform::Linear(scale))
            }
            "reclassify" => {
                let d: ReclassifyDoc = self.typed(v, ctx)?;
                if let Err(e) = d.table.validate() {
                    self.err(format!("{ctx}: {e}"));
                }
                Some(Transform::Reclassify { table: d.table })
            }
            "natural_breaks" => {
                let d: NaturalBreaksDoc = self.typed(v, ctx)?;
                if d.k < 2 {
                    self.err(format!("{ctx}: k must be at least 2"));
                }
                if d.scores.len() != d.k {
                    self.err(format!("{ctx}: {} scores given for {} classes", d.scores.len(), d.k));
                }
                if d.scores.iter().any(|s| !s.is_finite()) {
                    self.err(format!("{ctx}: scores must be finite"));
                }
                Some(Transform::NaturalBreaks { k: d.k, scores: d.scores })
            }
            other => {
                self.err(format!("{ctx}: unknown operation '{other}'"));
                None
            }
        }
    }

    fn aggregation(&mut self, v: &Json, names: &[&str]) -> Option<Aggregation> {
        let ctx = "aggregation";
        let method = v.get("method").and_then(Json::as_str);
        let normalize = v.get("normalize").and_then(Json::as_bool).unwrap_or(false);
        let n = names.len();
        match method {
            Some("weights") => {
                let weights: Vec<f64> = match v.get("weights") {
                    Some(Json::Array(_)) => {
                        let w: Vec<f64> = self.typed(&v["weights"], ctx)?;
                        if w.len() != n {
                            self.err(format!("{ctx}: {} weights given for {n} criteria", w.len()));
                            return None;
                        }
                        w
                    }
                    Some(Json::Object(m)) => {
                        for k in m.keys() {
                            if !names.contains(&k.as_str()) {
                                self.err(format!("{ctx}: weight for unknown criterion '{k}'"));
                            }
                        }
                        let mut w = Vec::with_capacity(n);
                        for name in names {
                            match m.get(*name).and_then(Json::as_f64) {
                                Some(x) => w.push(x),
                                None => self.err(format!("{ctx}: no weight for criterion '{name}'")),
                            }
                        }
                        if w.len() != n {
                            return None;
                        }
                        w
                    }
                    _ => {
                        self.err(format!("{ctx}: 'weights' must be a list or an object"));
                        return None;
                    }
                };
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    self.err(format!("{ctx}: weights must be non-negative"));
                }
                let total: f64 = weights.iter().sum();
                if !normalize && (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                    self.err(format!("{ctx}: weights sum to {total}; set \"normalize\": true to rescale"));
                }
                Some(Aggregation {
                    method: AggregationMethod::Weights,
                    weights,
                    normalize,
                    matrix: None,
                    priority: None,
                    seed: None,
                })
            }
            Some("ahp") => {
                let rows: Vec<Vec<f64>> = self.typed(v.get("matrix").unwrap_or(&Json::Null), "aggregation matrix")?;
                if rows.len() != n {
                    self.err(format!("{ctx}: {}x{} matrix for {n} criteria", rows.len(), rows.len()));
                    return None;
                }
                let matrix = match ComparisonMatrix::from_rows(rows) {
                    Ok(m) => m,
                    Err(e) => {
                        self.err(format!("{ctx}: {e}"));
                        return None;
                    }
                };
                let priority = match ahp_weights(&matrix) {
                    Ok(p) => p,
                    Err(e) => {
                        self.err(format!("{ctx}: {e}"));
                        return None;
                    }
                };
                Some(Aggregation {
                    method: AggregationMethod::Ahp,
                    weights: priority.weights.clone(),
                    normalize: false,
                    matrix: Some(matrix),
                    priority: Some(priority),
                    seed: None,
                })
            }
            Some("random_ahp") => {
                let Some(seed) = v.get("seed").and_then(Json::as_u64) else {
                    self.err(format!("{ctx}: random_ahp needs an integer 'seed'"));
                    return None;
                };
                match random_ahp(n, seed) {
                    Ok(r) => Some(Aggregation {
                        method: AggregationMethod::RandomAhp,
                        weights: r.priority.weights.clone(),
                        normalize: false,
                        matrix: Some(r.matrix),
                        priority: Some(r.priority),
                        seed: Some(seed),
                    }),
                    Err(e) => {
                        self.err(format!("{ctx}: {e}"));
                        None
                    }
                }
            }
            Some(other) => {
                self.err(format!("{ctx}: unknown method '{other}'"));
                None
            }
            None => {
                self.err(format!("{ctx}: missing 'method'"));
                None
            }
        }
    }

    fn output(&mut self, v: Option<&Json>, names: &[&str]) -> Option<OutputSpec> {
        let Some(v) = v else {
            return Some(OutputSpec {
                column: "suitability".into(),
                path: None,
                keep_criteria: true,
            });
        };
        let column = v.get("column").and_then(Json::as_str).unwrap_or("suitability").to_string();
        let keep_criteria = v.get("keep_criteria").and_then(Json::as_bool).unwrap_or(true);
        if keep_criteria && names.contains(&column.as_str()) {
            self.err(format!("output column '{column}' clashes with a criterion name"));
        }
        let path = match v.get("path") {
            None | Some(Json::Null) => None,
            Some(Json::String(p)) => Some(self.resolve(Path::new(p))),
            Some(_) => {
                self.err("output: 'path' must be a string");
                None
            }
        };
        Some(OutputSpec {
            column,
            path,
            keep_criteria,
        })
    }
}

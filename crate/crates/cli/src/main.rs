use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use landsuit::aggregate::{ahp_weights, random_ahp, weighted_sum, ComparisonMatrix};
use landsuit::bench::{run_bench, BenchSuite};
use landsuit::geom::{Column, FeatureLayer};
use landsuit::index::Metric;
use landsuit::io::{geojson_string, read_geojson, write_geojson, GeoJsonOptions};
use landsuit::ops::{
    density_of_line, density_of_point, distance_to_line, distance_to_point, idw_cv, idw_estimate, IdwConfig,
    LineDensityMode, MeasurementResult, Neighbors, RepresentativePoint, DEFAULT_CANDIDATE_POWERS,
};
use landsuit::pipeline::{load_model, run_model};
use landsuit::rescale::{linear, natural_breaks, reclassify, LinearScale, ReclassifyTable, ScaleOrder};
use landsuit::Error;

#[derive(Parser)]
#[command(name = "landsuit", version, about = "Vector land-use suitability analysis")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print warnings and timings to stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance from each unit to the nearest point or line.
    #[command(subcommand)]
    Distance(DistanceCommand),
    /// Point or line density within each zone.
    #[command(subcommand)]
    Density(DensityCommand),
    /// Inverse distance weighted estimate at each unit.
    Idw(IdwArgs),
    /// Choose the IDW power by leave-one-out cross validation.
    IdwCv(IdwCvArgs),
    /// Map an attribute through a category or range table.
    Reclassify(ReclassifyArgs),
    /// Jenks natural breaks of a numeric attribute.
    Jenks(JenksArgs),
    /// Min-max rescale a numeric attribute onto [a, b].
    RescaleLinear(RescaleArgs),
    /// AHP weights and consistency ratio of a comparison matrix.
    Ahp(AhpArgs),
    /// Random AHP weights with consistency ratio below 0.1.
    RandomAhp(RandomAhpArgs),
    /// Weighted sum of numeric attributes.
    WeightedSum(WeightedSumArgs),
    /// Run a suitability model document.
    Run(RunArgs),
    /// Time indexed operations against brute-force scans.
    Bench(BenchArgs),
}

#[derive(Args)]
struct LayerOut {
    /// Input layer (GeoJSON).
    #[arg(long)]
    input: PathBuf,
    /// Name of the appended column.
    #[arg(long)]
    column: String,
    /// Output layer; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Replace an existing column of the same name.
    #[arg(long)]
    overwrite: bool,
    /// Split Multi* geometries of every input into parts.
    #[arg(long)]
    explode: bool,
}

#[derive(Args)]
struct RepArgs {
    /// Read representative x coordinates from this column instead of
    /// using centroids (needs --y-column).
    #[arg(long, requires = "y_column")]
    x_column: Option<String>,
    #[arg(long, requires = "x_column")]
    y_column: Option<String>,
}

impl RepArgs {
    fn representative(&self) -> RepresentativePoint {
        match (&self.x_column, &self.y_column) {
            (Some(x), Some(y)) => RepresentativePoint::Columns {
                x: x.clone(),
                y: y.clone(),
            },
            _ => RepresentativePoint::Centroid,
        }
    }
}

#[derive(Subcommand)]
enum DistanceCommand {
    ToPoint {
        #[command(flatten)]
        io: LayerOut,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value = "euclidean", value_parser = parse_metric)]
        metric: Metric,
        #[command(flatten)]
        rep: RepArgs,
    },
    ToLine {
        #[command(flatten)]
        io: LayerOut,
        #[arg(long)]
        lines: PathBuf,
        #[arg(long, value_parser = positive)]
        cell_size: f64,
        #[arg(long, default_value = "euclidean", value_parser = parse_metric)]
        metric: Metric,
        #[command(flatten)]
        rep: RepArgs,
    },
}

#[derive(Subcommand)]
enum DensityCommand {
    OfPoint {
        #[command(flatten)]
        io: LayerOut,
        #[arg(long)]
        targets: PathBuf,
        /// Weight each target by this column instead of counting it once.
        #[arg(long)]
        value_column: Option<String>,
    },
    OfLine {
        #[command(flatten)]
        io: LayerOut,
        #[arg(long)]
        lines: PathBuf,
        #[arg(long, value_parser = positive)]
        cell_size: f64,
        #[arg(long, default_value = "cell-count", value_parser = parse_mode)]
        mode: LineDensityMode,
    },
}

#[derive(Args)]
struct NeighborArgs {
    /// Neighbors used per estimate: a count or "all".
    #[arg(long, default_value = "12", value_parser = parse_neighbors)]
    neighbors: Neighbors,
    #[arg(long, value_parser = positive)]
    search_radius: Option<f64>,
}

#[derive(Args)]
struct IdwArgs {
    #[command(flatten)]
    io: LayerOut,
    #[arg(long)]
    known: PathBuf,
    #[arg(long)]
    value_column: String,
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    power: f64,
    #[command(flatten)]
    nbr: NeighborArgs,
    #[command(flatten)]
    rep: RepArgs,
}

#[derive(Args)]
struct IdwCvArgs {
    #[arg(long)]
    known: PathBuf,
    #[arg(long)]
    value_column: String,
    /// Comma-separated candidate powers.
    #[arg(long, value_delimiter = ',', value_parser = positive)]
    candidates: Vec<f64>,
    #[command(flatten)]
    nbr: NeighborArgs,
    #[arg(long)]
    explode: bool,
}

#[derive(Args)]
struct ReclassifyArgs {
    #[command(flatten)]
    io: LayerOut,
    /// Attribute to reclassify.
    #[arg(long)]
    attribute: String,
    /// JSON table: {"kind": "categorical"|"range", "entries": [...], "default": ...}.
    #[arg(long)]
    table: PathBuf,
}

#[derive(Args)]
struct JenksArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    attribute: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    k: u64,
    /// Append class scores (one per class, lowest first) under --column.
    #[arg(long, value_delimiter = ',', requires = "column")]
    scores: Vec<f64>,
    #[arg(long)]
    column: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    overwrite: bool,
    #[arg(long)]
    explode: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Regular,
    Inverse,
}

#[derive(Args)]
struct RescaleArgs {
    #[command(flatten)]
    io: LayerOut,
    #[arg(long)]
    attribute: String,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, value_enum, default_value = "regular")]
    order: Order,
}

#[derive(Args)]
struct AhpArgs {
    /// Row-major JSON matrix, e.g. '[[1,5],[0.2,1]]'.
    #[arg(long)]
    matrix: String,
}

#[derive(Args)]
struct RandomAhpArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct WeightedSumArgs {
    #[command(flatten)]
    io: LayerOut,
    /// Comma-separated attribute names.
    #[arg(long, value_delimiter = ',', required = true)]
    columns: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    weights: Vec<f64>,
    /// Rescale weights to sum to one.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    model: PathBuf,
    /// Write the run report here as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_suite)]
    suite: BenchSuite,
    /// Comma-separated ascending sizes.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<LineDensityMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<BenchSuite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_neighbors(s: &str) -> Result<Neighbors, String> {
    if s == "all" {
        return Ok(Neighbors::All);
    }
    match s.parse::<usize>() {
        Ok(k) if k > 0 => Ok(Neighbors::Count(k)),
        _ => Err(format!("expected a positive count or \"all\", got '{s}'")),
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult = Result<(), Failure>;

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command, cli.verbose) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_layer(path: &Path, explode: bool) -> Result<FeatureLayer, Failure> {
    Ok(read_geojson(path, GeoJsonOptions { explode })?)
}

fn emit_layer(layer: &FeatureLayer, output: Option<&Path>) -> CliResult {
    match output {
        Some(p) => write_geojson(layer, p)?,
        None => print_stdout(&geojson_string(layer))?,
    }
    Ok(())
}

fn print_stdout(s: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(s.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| Failure::Data(Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }))
}

fn warn(verbose: u8, warnings: &[String]) {
    if verbose > 0 {
        for w in warnings {
            eprintln!("warning: {w}");
        }
    }
}

fn append(io: &LayerOut, mut layer: FeatureLayer, result: MeasurementResult, verbose: u8) -> CliResult {
    warn(verbose, &result.warnings);
    let result = result.named(io.column.clone());
    result.append_to(&mut layer, io.overwrite)?;
    emit_layer(&layer, io.output.as_deref())
}

fn numeric_attr(layer: &FeatureLayer, name: &str) -> Result<Vec<Option<f64>>, Failure> {
    Ok(layer.attributes().numeric(name)?)
}

/// Trims trailing zeros from a six-decimal rendering.
fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn json_out<T: serde::Serialize>(v: &T) -> CliResult {
    print_stdout(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"))
}

fn dispatch(command: Command, verbose: u8) -> CliResult {
    match command {
        Command::Distance(DistanceCommand::ToPoint {
            io,
            targets,
            metric,
            rep,
        }) => {
            let units = read_layer(&io.input, io.explode)?;
            let t = read_layer(&targets, io.explode)?;
            let r = distance_to_point(&units, &t, metric, &rep.representative())?;
            append(&io, units, r, verbose)
        }
        Command::Distance(DistanceCommand::ToLine {
            io,
            lines,
            cell_size,
            metric,
            rep,
        }) => {
            let units = read_layer(&io.input, io.explode)?;
            let l = read_layer(&lines, io.explode)?;
            let r = distance_to_line(&units, &l, cell_size, metric, &rep.representative())?;
            append(&io, units, r, verbose)
        }
        Command::Density(DensityCommand::OfPoint {
            io,
            targets,
            value_column,
        }) => {
            let units = read_layer(&io.input, io.explode)?;
            let t = read_layer(&targets, io.explode)?;
            let r = density_of_point(&units, &t, value_column.as_deref())?;
            append(&io, units, r, verbose)
        }
        Command::Density(DensityCommand::OfLine {
            io,
            lines,
            cell_size,
            mode,
        }) => {
            let units = read_layer(&io.input, io.explode)?;
            let l = read_layer(&lines, io.explode)?;
            let r = density_of_line(&units, &l, cell_size, mode)?;
            append(&io, units, r, verbose)
        }
        Command::Idw(a) => {
            let config = IdwConfig {
                power: a.power,
                neighbors: a.nbr.neighbors,
                search_radius: a.nbr.search_radius,
            };
            config.validate().map_err(usage)?;
            let units = read_layer(&a.io.input, a.io.explode)?;
            let known = read_layer(&a.known, a.io.explode)?;
            let r = idw_estimate(&units, &known, &a.value_column, &config, &a.rep.representative())?;
            append(&a.io, units, r, verbose)
        }
        Command::IdwCv(a) => {
            let candidates = if a.candidates.is_empty() {
                DEFAULT_CANDIDATE_POWERS.to_vec()
            } else {
                a.candidates
            };
            let base = IdwConfig {
                neighbors: a.nbr.neighbors,
                search_radius: a.nbr.search_radius,
                ..IdwConfig::default()
            };
            let known = read_layer(&a.known, a.explode)?;
            let r = idw_cv(&known, &a.value_column, &candidates, &base)?;
            json_out(&r)
        }
        Command::Reclassify(a) => {
            let text = std::fs::read_to_string(&a.table).map_err(|source| Error::Io {
                path: a.table.clone(),
                source,
            })?;
            let table: ReclassifyTable =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.table.display())))?;
            table.validate().map_err(usage)?;
            let mut units = read_layer(&a.io.input, a.io.explode)?;
            let col = units
                .attributes()
                .get(&a.attribute)
                .ok_or_else(|| Error::MissingColumn(a.attribute.clone()))?;
            let values: Vec<_> = (0..col.len()).map(|i| col.get(i)).collect();
            let scores = reclassify(&values, &table)?;
            units.add_column(a.io.column.clone(), Column::Number(scores), a.io.overwrite)?;
            emit_layer(&units, a.io.output.as_deref())
        }
        Command::Jenks(a) => {
            let k = a.k as usize;
            if !a.scores.is_empty() && a.scores.len() != k {
                return Err(Failure::Usage(format!("{} scores given for {k} classes", a.scores.len())));
            }
            let mut units = read_layer(&a.input, a.explode)?;
            let values = numeric_attr(&units, &a.attribute)?;
            let present: Vec<f64> = values.iter().flatten().copied().collect();
            let cb = natural_breaks(&present, k)?;
            match a.column {
                Some(column) if !a.scores.is_empty() => {
                    let scores = values.iter().map(|v| v.map(|x| a.scores[cb.class_of(x)])).collect();
                    units.add_column(column, Column::Number(scores), a.overwrite)?;
                    if verbose > 0 {
                        eprintln!("breaks: {:?}, GVF {}", cb.breaks, short(cb.gvf));
                    }
                    emit_layer(&units, a.output.as_deref())
                }
                Some(_) => Err(Failure::Usage("--column needs --scores".into())),
                None => json_out(&cb),
            }
        }
        Command::RescaleLinear(a) => {
            let order = match a.order {
                Order::Regular => ScaleOrder::Regular,
                Order::Inverse => ScaleOrder::Inverse,
            };
            let scale = LinearScale::new(a.a, a.b, order).map_err(usage)?;
            let mut units = read_layer(&a.io.input, a.io.explode)?;
            let out = linear(&numeric_attr(&units, &a.attribute)?, &scale)?;
            if out.constant_input {
                warn(verbose, &["constant input mapped to the scale midpoint".into()]);
            }
            units.add_column(a.io.column.clone(), Column::Number(out.values), a.io.overwrite)?;
            emit_layer(&units, a.io.output.as_deref())
        }
        Command::Ahp(a) => {
            let rows: Vec<Vec<f64>> =
                serde_json::from_str(&a.matrix).map_err(|e| Failure::Usage(format!("--matrix: {e}")))?;
            let m = ComparisonMatrix::from_rows(rows).map_err(usage)?;
            let p = ahp_weights(&m)?;
            let w: Vec<String> = p.weights.iter().map(|x| short(*x)).collect();
            print_stdout(&format!(
                "weights: {}\nlambda_max: {}\nCR: {}\n",
                w.join(", "),
                short(p.lambda_max),
                short(p.cr)
            ))
        }
        Command::RandomAhp(a) => {
            let r = random_ahp(a.n, a.seed).map_err(|e| match e {
                Error::InvalidParameter(_) => usage(e),
                e => Failure::Data(e),
            })?;
            json_out(&r)
        }
        Command::WeightedSum(a) => {
            if a.columns.len() != a.weights.len() {
                return Err(Failure::Usage(format!(
                    "{} columns but {} weights",
                    a.columns.len(),
                    a.weights.len()
                )));
            }
            let mut units = read_layer(&a.io.input, a.io.explode)?;
            let cols = a
                .columns
                .iter()
                .map(|c| numeric_attr(&units, c))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&[Option<f64>]> = cols.iter().map(Vec::as_slice).collect();
            let out = weighted_sum(&refs, &a.weights, a.normalize)?;
            units.add_column(a.io.column.clone(), Column::Number(out), a.io.overwrite)?;
            emit_layer(&units, a.io.output.as_deref())
        }
        Command::Run(a) => {
            let model = load_model(&a.model)?;
            let (layer, report) = run_model(&model)?;
            for c in &report.criteria {
                warn(verbose, &c.warnings.iter().map(|w| format!("{}: {w}", c.name)).collect::<Vec<_>>());
            }
            warn(verbose, &report.warnings);
            if verbose > 0 {
                eprintln!("total {:.3}s", report.timings.total_seconds);
            }
            if let Some(p) = &a.report {
                report.write(p)?;
            }
            if model.output.path.is_none() {
                print_stdout(&geojson_string(&layer))?;
            }
            Ok(())
        }
        Command::Bench(a) => {
            let t = run_bench(a.suite, &a.sizes, a.seed).map_err(usage)?;
            if a.json {
                json_out(&t)?;
            } else {
                print_stdout(&t.to_tsv())?;
                if verbose > 0 {
                    eprintln!(
                        "log-log slopes: indexed {:?}, brute {:?}",
                        t.indexed_slope, t.brute_slope
                    );
                }
            }
            if t.indexed_faster == Some(false) {
                return Err(Failure::Data(Error::InvalidParameter(format!(
                    "indexed {} was not faster than brute force at n = {}",
                    t.suite,
                    t.rows.last().expect("rows").n
                ))));
            }
            Ok(())
        }
    }
}

use std::path::Path;

use serde_json::{json, Map, Number, Value as Json};

use super::{read_to_string, write_string};
use crate::error::{Error, Result};
use crate::geom::{AttributeTable, Column, FeatureLayer, Geometry, LineString, Point2, Polygon, Value};

/// Decimal places kept for written coordinates.
pub const COORDINATE_DECIMALS: usize = 9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeoJsonOptions {
    /// Split Multi* geometries into one feature per part, duplicating the
    /// properties. Without it Multi* geometries are rejected.
    pub explode: bool,
}

pub fn read_geojson(path: impl AsRef<Path>, options: GeoJsonOptions) -> Result<FeatureLayer> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_geojson(&text, options).map_err(|e| match e {
        Error::Format { context, message } => Error::Format {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })
}

/// Parses a FeatureCollection into a layer. Properties become columns in
/// first-seen order; features lacking a property get nodata.
pub fn parse_geojson(text: &str, options: GeoJsonOptions) -> Result<FeatureLayer> {
    let doc: Json = serde_json::from_str(text).map_err(|e| Error::format("geojson", e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::format("geojson", "top level is not an object"))?;
    if obj.get("type").and_then(Json::as_str) != Some("FeatureCollection") {
        return Err(Error::format("geojson", "expected a FeatureCollection"));
    }
    let features = obj
        .get("features")
        .and_then(Json::as_array)
        .ok_or_else(|| Error::format("geojson", "missing 'features' array"))?;

    let mut geometries = Vec::new();
    let mut rows: Vec<&Map<String, Json>> = Vec::new();
    let empty = Map::new();
    for (i, f) in features.iter().enumerate() {
        let ctx = format!("feature {i}");
        let geom = f
            .get("geometry")
            .filter(|g| !g.is_null())
            .ok_or_else(|| Error::format(&ctx, "missing geometry"))?;
        let props = match f.get("properties") {
            None | Some(Json::Null) => &empty,
            Some(Json::Object(m)) => m,
            Some(_) => return Err(Error::format(&ctx, "properties is not an object")),
        };
        for g in parse_geometry(geom, options.explode, &ctx)? {
            geometries.push(g);
            rows.push(props);
        }
    }
    if let Some(first) = geometries.first() {
        let kind = first.kind();
        if let Some((i, g)) = geometries.iter().enumerate().find(|(_, g)| g.kind() != kind) {
            return Err(Error::format(
                "geojson",
                format!("mixed geometry types: {kind} and {} (part {i})", g.kind()),
            ));
        }
    }

    let mut names: Vec<&str> = Vec::new();
    for props in &rows {
        for k in props.keys() {
            if !names.contains(&k.as_str()) {
                names.push(k);
            }
        }
    }
    let mut attributes = AttributeTable::new(rows.len());
    for name in names {
        let values = rows.iter().map(|p| json_to_value(p.get(name))).collect();
        attributes.insert(name, Column::from_values(values), false)?;
    }
    let crs = obj
        .get("crs")
        .and_then(|c| c.pointer("/properties/name"))
        .and_then(Json::as_str)
        .map(str::to_string);
    FeatureLayer::new(geometries, attributes, crs)
}

fn json_to_value(v: Option<&Json>) -> Value {
    match v {
        None | Some(Json::Null) => Value::Null,
        Some(Json::Bool(b)) => Value::Boolean(*b),
        Some(Json::Number(n)) => match n.as_i64() {
            Some(i) => Value::Integer(i),
            None => Value::Number(n.as_f64().unwrap_or(f64::NAN)),
        },
        Some(Json::String(s)) => Value::Text(s.clone()),
        Some(other) => Value::Text(other.to_string()),
    }
}

fn parse_geometry(g: &Json, explode: bool, ctx: &str) -> Result<Vec<Geometry>> {
    let kind = g
        .get("type")
        .and_then(Json::as_str)
        .ok_or_else(|| Error::format(ctx, "geometry has no type"))?;
    let coords = || {
        g.get("coordinates")
            .ok_or_else(|| Error::format(ctx, format!("{kind} has no coordinates")))
    };
    let multi = |parts: &Json, f: &dyn Fn(&Json) -> Result<Geometry>| -> Result<Vec<Geometry>> {
        if !explode {
            return Err(Error::format(ctx, format!("{kind} needs the explode option")));
        }
        array(parts, ctx)?.iter().map(f).collect()
    };
    let point = |c: &Json| position(c, ctx).map(Geometry::Point);
    let line = |c: &Json| Ok(Geometry::LineString(line_string(c, ctx)?));
    let poly = |c: &Json| Ok(Geometry::Polygon(polygon(c, ctx)?));
    match kind {
        "Point" => Ok(vec![point(coords()?)?]),
        "LineString" => Ok(vec![line(coords()?)?]),
        "Polygon" => Ok(vec![poly(coords()?)?]),
        "MultiPoint" => multi(coords()?, &point),
        "MultiLineString" => multi(coords()?, &line),
        "MultiPolygon" => multi(coords()?, &poly),
        other => Err(Error::format(ctx, format!("unsupported geometry type '{other}'"))),
    }
}

fn array<'a>(v: &'a Json, ctx: &str) -> Result<&'a Vec<Json>> {
    v.as_array().ok_or_else(|| Error::format(ctx, "expected a coordinate array"))
}

fn position(v: &Json, ctx: &str) -> Result<Point2> {
    let a = array(v, ctx)?;
    if a.len() < 2 {
        return Err(Error::format(ctx, "position needs two coordinates"));
    }
    let num = |j: &Json| {
        j.as_f64()
            .ok_or_else(|| Error::format(ctx, format!("non-numeric coordinate {j}")))
    };
    Point2::try_new(num(&a[0])?, num(&a[1])?)
}

fn positions(v: &Json, ctx: &str) -> Result<Vec<Point2>> {
    array(v, ctx)?.iter().map(|p| position(p, ctx)).collect()
}

fn line_string(v: &Json, ctx: &str) -> Result<LineString> {
    LineString::new(positions(v, ctx)?).map_err(|e| Error::format(ctx, e.to_string()))
}

fn polygon(v: &Json, ctx: &str) -> Result<Polygon> {
    let rings = array(v, ctx)?;
    let (ext, holes) = rings
        .split_first()
        .ok_or_else(|| Error::format(ctx, "polygon has no rings"))?;
    let holes = holes.iter().map(|h| positions(h, ctx)).collect::<Result<Vec<_>>>()?;
    Polygon::new(positions(ext, ctx)?, holes).map_err(|e| Error::format(ctx, e.to_string()))
}

pub fn write_geojson(layer: &FeatureLayer, path: impl AsRef<Path>) -> Result<()> {
    write_string(path.as_ref(), &geojson_string(layer))
}

/// Serializes a layer as a FeatureCollection, one feature per line.
/// Coordinates are rounded to [`COORDINATE_DECIMALS`] places; nodata and
/// non-finite attribute values become `null`.
pub fn geojson_string(layer: &FeatureLayer) -> String {
    let mut out = String::from("{\"type\":\"FeatureCollection\",");
    if let Some(crs) = layer.crs() {
        let member = json!({"type": "name", "properties": {"name": crs}});
        out.push_str(&format!("\"crs\":{member},"));
    }
    out.push_str("\"features\":[");
    let columns: Vec<(&str, &Column)> = layer.attributes().columns().collect();
    for (i, g) in layer.geometries().iter().enumerate() {
        let mut props = Map::new();
        for (name, col) in &columns {
            props.insert(name.to_string(), value_to_json(col.get(i)));
        }
        let feature = json!({
            "type": "Feature",
            "geometry": geometry_json(g),
            "properties": props,
        });
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str(&feature.to_string());
    }
    out.push_str("\n]}\n");
    out
}

fn value_to_json(v: Value) -> Json {
    match v {
        Value::Null => Json::Null,
        Value::Boolean(b) => Json::Bool(b),
        Value::Integer(i) => Json::from(i),
        Value::Number(x) => Number::from_f64(x).map_or(Json::Null, Json::Number),
        Value::Text(s) => Json::String(s),
    }
}

fn round_coordinate(x: f64) -> Json {
    let rounded: f64 = format!("{x:.COORDINATE_DECIMALS$}").parse().expect("formatted float parses");
    // Avoid emitting "-0.0".
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    Number::from_f64(rounded).map_or(Json::Null, Json::Number)
}

fn pos_json(p: &Point2) -> Json {
    Json::Array(vec![round_coordinate(p.x), round_coordinate(p.y)])
}

fn ring_json(ring: &[Point2]) -> Json {
    Json::Array(ring.iter().map(pos_json).collect())
}

fn geometry_json(g: &Geometry) -> Json {
    match g {
        Geometry::Point(p) => json!({"type": "Point", "coordinates": pos_json(p)}),
        Geometry::LineString(l) => json!({"type": "LineString", "coordinates": ring_json(l.vertices())}),
        Geometry::Polygon(p) => {
            let rings: Vec<Json> = p.rings().map(ring_json).collect();
            json!({"type": "Polygon", "coordinates": rings})
        }
    }
}

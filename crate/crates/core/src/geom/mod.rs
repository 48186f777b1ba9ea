//! Planar geometry primitives: points, polylines, polygons with holes,
//! bounding boxes, centroids and the point-in-polygon predicate.
//!
//! Coordinates are planar map units; nothing here knows about ellipsoids or
//! reprojection.

mod layer;
mod polygon;

pub use layer::{AttributeTable, Column, FeatureLayer, Value};
pub use polygon::Polygon;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when deciding whether a point lies on a polygon boundary.
pub const BOUNDARY_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Like [`Point2::new`] but rejects NaN and infinite coordinates.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        let p = Point2 { x, y };
        p.ensure_finite()?;
        Ok(p)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(format!("({}, {})", self.x, self.y)))
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Point2::new(self.x + dx, self.y + dy)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn of_point(p: Point2) -> Self {
        BBox {
            min_x: p.x,
            min_y: p.y,
            max_x: p.x,
            max_y: p.y,
        }
    }

    /// Tight bounds of a non-empty point sequence; `None` when empty.
    pub fn of_points<'a, I: IntoIterator<Item = &'a Point2>>(points: I) -> Option<Self> {
        let mut iter = points.into_iter();
        let mut bb = BBox::of_point(*iter.next()?);
        for p in iter {
            bb.expand(*p);
        }
        Some(bb)
    }

    pub fn expand(&mut self, p: Point2) {
        self.min_x = self.min_x.min(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_x = self.max_x.max(p.x);
        self.max_y = self.max_y.max(p.y);
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min_x <= other.max_x
            && other.min_x <= self.max_x
            && self.min_y <= other.max_y
            && other.min_y <= self.max_y
    }

    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.min_x, self.min_y, self.max_x, self.max_y)
    }
}

/// An open polyline with at least two distinct consecutive vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct LineString {
    vertices: Vec<Point2>,
}

impl LineString {
    /// Consecutive duplicate vertices are collapsed before validation.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        for v in &vertices {
            v.ensure_finite()?;
        }
        let mut deduped: Vec<Point2> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if deduped.last() != Some(&v) {
                deduped.push(v);
            }
        }
        if deduped.len() < 2 {
            return Err(Error::InvalidGeometry(
                "line string needs at least two distinct vertices".into(),
            ));
        }
        Ok(LineString { vertices: deduped })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| distance(a, b)).sum()
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.vertices).expect("line string is never empty")
    }

    /// Length-weighted mean of segment midpoints.
    pub fn centroid(&self) -> Point2 {
        let origin = self.vertices[0];
        let (mut sx, mut sy, mut total) = (0.0, 0.0, 0.0);
        for (a, b) in self.segments() {
            let len = distance(a, b);
            sx += len * ((a.x - origin.x) + (b.x - origin.x)) * 0.5;
            sy += len * ((a.y - origin.y) + (b.y - origin.y)) * 0.5;
            total += len;
        }
        Point2::new(origin.x + sx / total, origin.y + sy / total)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        LineString {
            vertices: self.vertices.iter().map(|p| p.translate(dx, dy)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Point,
    LineString,
    Polygon,
}

impl std::fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GeometryKind::Point => "Point",
            GeometryKind::LineString => "LineString",
            GeometryKind::Polygon => "Polygon",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(Point2),
    LineString(LineString),
    Polygon(Polygon),
}

impl Geometry {
    pub fn kind(&self) -> GeometryKind {
        match self {
            Geometry::Point(_) => GeometryKind::Point,
            Geometry::LineString(_) => GeometryKind::LineString,
            Geometry::Polygon(_) => GeometryKind::Polygon,
        }
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Geometry::Point(p) => BBox::of_point(*p),
            Geometry::LineString(l) => l.bbox(),
            Geometry::Polygon(p) => p.bbox(),
        }
    }

    /// Visits every stored vertex, including ring closing vertices.
    pub fn for_each_vertex(&self, mut f: impl FnMut(Point2)) {
        match self {
            Geometry::Point(p) => f(*p),
            Geometry::LineString(l) => l.vertices().iter().copied().for_each(f),
            Geometry::Polygon(p) => {
                p.exterior().iter().copied().for_each(&mut f);
                for h in p.holes() {
                    h.iter().copied().for_each(&mut f);
                }
            }
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        match self {
            Geometry::Point(p) => Geometry::Point(p.translate(dx, dy)),
            Geometry::LineString(l) => Geometry::LineString(l.translate(dx, dy)),
            Geometry::Polygon(p) => Geometry::Polygon(p.translate(dx, dy)),
        }
    }

    pub fn as_point(&self) -> Option<Point2> {
        match self {
            Geometry::Point(p) => Some(*p),
            _ => None,
        }
    }

    pub fn as_line_string(&self) -> Option<&LineString> {
        match self {
            Geometry::LineString(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_polygon(&self) -> Option<&Polygon> {
        match self {
            Geometry::Polygon(p) => Some(p),
            _ => None,
        }
    }
}

/// Result of [`centroid`]. `degenerate` is set when a polygon had zero area
/// and the vertex mean was used instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centroid {
    pub point: Point2,
    pub degenerate: bool,
}

/// Area-weighted centroid for polygons (holes subtract), length-weighted
/// midpoint for lines, identity for points.
pub fn centroid(geom: &Geometry) -> Centroid {
    match geom {
        Geometry::Point(p) => Centroid {
            point: *p,
            degenerate: false,
        },
        Geometry::LineString(l) => Centroid {
            point: l.centroid(),
            degenerate: false,
        },
        Geometry::Polygon(p) => p.centroid(),
    }
}

/// Boundary-inclusive point-in-polygon test (even-odd rule over all rings).
pub fn contains(poly: &Polygon, pt: Point2) -> bool {
    poly.contains(pt)
}

/// Tight bounds over every vertex of every geometry in the layer.
pub fn bbox(layer: &FeatureLayer) -> Result<BBox> {
    layer
        .geometries()
        .iter()
        .map(Geometry::bbox)
        .reduce(|a, b| a.union(&b))
        .ok_or(Error::Empty("empty extent"))
}

pub(crate) fn distance(a: Point2, b: Point2) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Euclidean distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    distance(p, Point2::new(a.x + t * dx, a.y + t * dy))
}

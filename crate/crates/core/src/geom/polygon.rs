use super::{point_segment_distance, BBox, Centroid, Point2, BOUNDARY_EPSILON};
use crate::error::{Error, Result};

/// A polygon with an exterior ring and zero or more holes.
///
/// Rings are stored closed (first vertex repeated at the end). On
/// construction the exterior is oriented counter-clockwise and holes
/// clockwise, so signed-area sums over all rings give the net area.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<Point2>,
    holes: Vec<Vec<Point2>>,
    bbox: BBox,
}

impl Polygon {
    /// Validates and normalizes the rings. Unclosed rings are closed and
    /// consecutive duplicate vertices collapsed. An exterior with zero area
    /// is accepted when all its vertices are collinear (see
    /// [`Polygon::is_degenerate`]); otherwise it must not self-intersect.
    pub fn new(exterior: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self> {
        let mut exterior = normalize_ring(exterior, "exterior")?;
        let area = signed_area(&exterior);
        if area < 0.0 {
            exterior.reverse();
        }
        if !(area == 0.0 && all_collinear(&exterior)) {
            if let Some((i, j)) = find_self_intersection(&exterior) {
                return Err(Error::InvalidGeometry(format!(
                    "exterior ring self-intersects (segments {i} and {j})"
                )));
            }
        }
        let holes = holes
            .into_iter()
            .map(|h| {
                let mut h = normalize_ring(h, "hole")?;
                if signed_area(&h) > 0.0 {
                    h.reverse();
                }
                Ok(h)
            })
            .collect::<Result<Vec<_>>>()?;
        let bbox = BBox::of_points(&exterior).expect("ring has vertices");
        Ok(Polygon {
            exterior,
            holes,
            bbox,
        })
    }

    /// Axis-aligned rectangle, handy for zones and tests.
    pub fn rectangle(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        Polygon::new(
            vec![
                Point2::new(min_x, min_y),
                Point2::new(max_x, min_y),
                Point2::new(max_x, max_y),
                Point2::new(min_x, max_y),
            ],
            vec![],
        )
    }

    pub fn exterior(&self) -> &[Point2] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point2>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point2]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Net area: exterior minus holes.
    pub fn area(&self) -> f64 {
        self.rings().map(signed_area).sum::<f64>().max(0.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() == 0.0
    }

    pub fn centroid(&self) -> Centroid {
        // Work relative to the first vertex to keep the cross products small.
        let o = self.exterior[0];
        let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for ring in self.rings() {
            for w in ring.windows(2) {
                let (x0, y0) = (w[0].x - o.x, w[0].y - o.y);
                let (x1, y1) = (w[1].x - o.x, w[1].y - o.y);
                let cross = x0 * y1 - x1 * y0;
                a2 += cross;
                cx += (x0 + x1) * cross;
                cy += (y0 + y1) * cross;
            }
        }
        if a2 > 0.0 {
            Centroid {
                point: Point2::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2)),
                degenerate: false,
            }
        } else {
            let open = &self.exterior[..self.exterior.len() - 1];
            let n = open.len() as f64;
            let (sx, sy) = open
                .iter()
                .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x - o.x, sy + p.y - o.y));
            Centroid {
                point: Point2::new(o.x + sx / n, o.y + sy / n),
                degenerate: true,
            }
        }
    }

    /// Points on any ring (within [`BOUNDARY_EPSILON`]) count as inside;
    /// otherwise the even-odd rule over all rings decides.
    pub fn contains(&self, p: Point2) -> bool {
        let bb = self.bbox;
        if p.x < bb.min_x - BOUNDARY_EPSILON
            || p.x > bb.max_x + BOUNDARY_EPSILON
            || p.y < bb.min_y - BOUNDARY_EPSILON
            || p.y > bb.max_y + BOUNDARY_EPSILON
        {
            return false;
        }
        let mut inside = false;
        for ring in self.rings() {
            for w in ring.windows(2) {
                let (a, b) = (w[0], w[1]);
                if point_segment_distance(p, a, b) <= BOUNDARY_EPSILON {
                    return true;
                }
                if (a.y > p.y) != (b.y > p.y) {
                    let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                    if p.x < x_cross {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        let shift = |r: &Vec<Point2>| r.iter().map(|p| p.translate(dx, dy)).collect::<Vec<_>>();
        let exterior = shift(&self.exterior);
        Polygon {
            bbox: BBox::of_points(&exterior).expect("ring has vertices"),
            exterior,
            holes: self.holes.iter().map(shift).collect(),
        }
    }
}

fn normalize_ring(ring: Vec<Point2>, what: &str) -> Result<Vec<Point2>> {
    for p in &ring {
        p.ensure_finite()?;
    }
    let mut out: Vec<Point2> = Vec::with_capacity(ring.len() + 1);
    for p in ring {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    if out.len() < 3 {
        return Err(Error::InvalidGeometry(format!(
            "{what} ring needs at least 3 distinct vertices"
        )));
    }
    out.push(out[0]);
    Ok(out)
}

/// Shoelace signed area of a closed ring (positive when counter-clockwise).
pub(crate) fn signed_area(ring: &[Point2]) -> f64 {
    let o = ring[0];
    let mut a2 = 0.0;
    for w in ring.windows(2) {
        a2 += (w[0].x - o.x) * (w[1].y - o.y) - (w[1].x - o.x) * (w[0].y - o.y);
    }
    a2 * 0.5
}

fn all_collinear(ring: &[Point2]) -> bool {
    let a = ring[0];
    let Some(&b) = ring.iter().find(|p| **p != a) else {
        return true;
    };
    ring.iter().all(|&c| orient(a, b, c) == 0.0)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Returns the first pair of non-adjacent ring segments that touch.
fn find_self_intersection(ring: &[Point2]) -> Option<(usize, usize)> {
    let n = ring.len() - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[i + 1]);
        let seg_bb = BBox::of_points([&a, &b]).unwrap();
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (ring[j], ring[j + 1]);
            if !seg_bb.intersects(&BBox::of_points([&c, &d]).unwrap()) {
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

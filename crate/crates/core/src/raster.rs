//! Affine world/grid mapping, supercover line rasterization and zonal cell
//! counts.
//!
//! Cell `(col, row)` covers `[l + col*c, l + (col+1)*c)` in x and
//! `(t - (row+1)*c, t - row*c]` in y, so every world point belongs to exactly
//! one cell. Rows grow downwards from the top bound `t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{bbox, BBox, FeatureLayer, Point2, Polygon};

/// Sentinel stored in cells that carry no data.
pub const NODATA: f64 = -9999.0;

/// Scale `c` (map units per cell) plus the left and top bounds of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub cell_size: f64,
    pub left: f64,
    pub top: f64,
}

impl AffineTransform {
    pub fn new(cell_size: f64, left: f64, top: f64) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::param(format!("cell size must be positive, got {cell_size}")));
        }
        if !(left.is_finite() && top.is_finite()) {
            return Err(Error::NonFinite(format!("grid origin ({left}, {top})")));
        }
        Ok(AffineTransform {
            cell_size,
            left,
            top,
        })
    }

    /// Maps fractional grid coordinates through the augmented matrix
    /// `[[c, 0, l], [0, -c, t], [0, 0, 1]]`.
    pub fn apply(&self, col: f64, row: f64) -> Point2 {
        Point2::new(self.cell_size * col + self.left, -self.cell_size * row + self.top)
    }

    /// Center of cell `(col, row)`.
    pub fn cell_to_world(&self, col: i64, row: i64) -> Point2 {
        self.apply(col as f64 + 0.5, row as f64 + 0.5)
    }

    /// The cell containing `p`; may be negative or past the grid edge.
    pub fn world_to_cell(&self, p: Point2) -> (i64, i64) {
        let col = ((p.x - self.left) / self.cell_size).floor() as i64;
        let row = ((self.top - p.y) / self.cell_size).floor() as i64;
        (col, row)
    }

    fn col_edge(&self, col: i64) -> f64 {
        self.left + col as f64 * self.cell_size
    }

    fn row_edge(&self, row: i64) -> f64 {
        self.top - row as f64 * self.cell_size
    }

    /// Closed square of a cell.
    pub fn cell_bounds(&self, col: i64, row: i64) -> BBox {
        BBox {
            min_x: self.col_edge(col),
            max_x: self.col_edge(col + 1),
            min_y: self.row_edge(row + 1),
            max_y: self.row_edge(row),
        }
    }
}

/// Row-major single-band raster. For occupancy grids a cell is "set" when it
/// holds a value other than zero and the nodata sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    transform: AffineTransform,
    n_rows: usize,
    n_cols: usize,
    cells: Vec<f64>,
    nodata: f64,
}

impl Grid {
    pub fn filled(transform: AffineTransform, n_rows: usize, n_cols: usize, value: f64) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::param("grid needs at least one row and one column"));
        }
        Ok(Grid {
            transform,
            n_rows,
            n_cols,
            cells: vec![value; n_rows * n_cols],
            nodata: NODATA,
        })
    }

    pub fn from_cells(transform: AffineTransform, n_rows: usize, n_cols: usize, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != n_rows * n_cols {
            return Err(Error::LengthMismatch {
                expected: n_rows * n_cols,
                found: cells.len(),
            });
        }
        let mut g = Grid::filled(transform, n_rows, n_cols, 0.0)?;
        g.cells = cells;
        Ok(g)
    }

    pub fn transform(&self) -> &AffineTransform {
        &self.transform
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.cells[row * self.n_cols + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        self.cells[row * self.n_cols + col] = value;
    }

    pub fn is_set(&self, col: usize, row: usize) -> bool {
        let v = self.get(col, row);
        v != 0.0 && v != self.nodata
    }

    /// `(col, row)` of every set cell in row-major order.
    pub fn set_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().enumerate().filter_map(move |(k, &v)| {
            (v != 0.0 && v != self.nodata).then_some((k % self.n_cols, k / self.n_cols))
        })
    }

    pub fn set_count(&self) -> usize {
        self.set_cells().count()
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Point2 {
        self.transform.cell_to_world(col as i64, row as i64)
    }

    /// World extent of the whole grid.
    pub fn extent(&self) -> BBox {
        let c = self.transform.cell_size;
        BBox {
            min_x: self.transform.left,
            max_x: self.transform.left + self.n_cols as f64 * c,
            min_y: self.transform.top - self.n_rows as f64 * c,
            max_y: self.transform.top,
        }
    }
}

/// Burns every cell whose closed square touches a line segment (supercover).
///
/// The grid origin is the top-left corner of the lines' bounding box and the
/// extent is padded outward (right and down) to whole cells so every vertex
/// falls inside it.
pub fn rasterize_lines(lines: &FeatureLayer, cell_size: f64) -> Result<Grid> {
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(Error::param(format!("cell size must be positive, got {cell_size}")));
    }
    let strings = lines.line_strings()?;
    if strings.is_empty() {
        return Err(Error::Empty("empty extent"));
    }
    let bb = bbox(lines)?;
    let tf = AffineTransform::new(cell_size, bb.min_x, bb.max_y)?;
    let n_cols = ((bb.max_x - bb.min_x) / cell_size).floor() as usize + 1;
    let n_rows = ((bb.max_y - bb.min_y) / cell_size).floor() as usize + 1;
    let mut grid = Grid::filled(tf, n_rows, n_cols, 0.0)?;
    for line in strings {
        for (a, b) in line.segments() {
            burn_segment(&mut grid, a, b);
        }
    }
    Ok(grid)
}

fn burn_segment(grid: &mut Grid, a: Point2, b: Point2) {
    let tf = grid.transform;
    let c = tf.cell_size;
    let (ymin, ymax) = (a.y.min(b.y), a.y.max(b.y));
    let max_row = grid.n_rows as i64 - 1;
    let max_col = grid.n_cols as i64 - 1;
    // One extra candidate on each side; exact band tests below decide.
    let r_lo = (((tf.top - ymax) / c).floor() as i64 - 1).max(0);
    let r_hi = (((tf.top - ymin) / c).floor() as i64 + 1).min(max_row);
    for row in r_lo..=r_hi {
        let (band_lo, band_hi) = (tf.row_edge(row + 1), tf.row_edge(row));
        let Some((xa, xb)) = clip_to_band(a, b, band_lo, band_hi) else {
            continue;
        };
        let c_lo = (((xa - tf.left) / c).floor() as i64 - 1).max(0);
        let c_hi = (((xb - tf.left) / c).floor() as i64 + 1).min(max_col);
        for col in c_lo..=c_hi {
            if tf.col_edge(col) <= xb && tf.col_edge(col + 1) >= xa {
                grid.set(col as usize, row as usize, 1.0);
            }
        }
    }
}

/// x-range of the part of segment `a`-`b` inside the closed band
/// `lo <= y <= hi`, if any.
fn clip_to_band(a: Point2, b: Point2, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let dy = b.y - a.y;
    if dy == 0.0 {
        return (a.y >= lo && a.y <= hi).then(|| (a.x.min(b.x), a.x.max(b.x)));
    }
    let (sa, sb) = ((lo - a.y) / dy, (hi - a.y) / dy);
    let s0 = sa.min(sb).max(0.0);
    let s1 = sa.max(sb).min(1.0);
    if s0 > s1 {
        return None;
    }
    let at = |s: f64| {
        if s == 0.0 {
            a.x
        } else if s == 1.0 {
            b.x
        } else {
            a.x + s * (b.x - a.x)
        }
    };
    let (x0, x1) = (at(s0), at(s1));
    Some((x0.min(x1), x0.max(x1)))
}

/// Number of set cells whose centers fall inside `zone` (boundary
/// inclusive). Zones disjoint from the grid count zero.
pub fn zonal_cell_count(grid: &Grid, zone: &Polygon) -> usize {
    let zb = zone.bbox();
    if !zb.intersects(&grid.extent()) {
        return 0;
    }
    let tf = grid.transform;
    let c = tf.cell_size;
    let col_lo = (((zb.min_x - tf.left) / c - 0.5).floor() as i64).max(0);
    let col_hi = (((zb.max_x - tf.left) / c - 0.5).ceil() as i64).min(grid.n_cols as i64 - 1);
    let row_lo = (((tf.top - zb.max_y) / c - 0.5).floor() as i64).max(0);
    let row_hi = (((tf.top - zb.min_y) / c - 0.5).ceil() as i64).min(grid.n_rows as i64 - 1);
    let mut count = 0;
    for row in row_lo..=row_hi {
        for col in col_lo..=col_hi {
            let (col, row) = (col as usize, row as usize);
            if grid.is_set(col, row) && zone.contains(grid.cell_center(col, row)) {
                count += 1;
            }
        }
    }
    count
}

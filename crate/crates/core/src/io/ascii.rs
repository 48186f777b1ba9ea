use std::fmt::Write as _;
use std::path::Path;

use super::{read_to_string, write_string};
use crate::error::{Error, Result};
use crate::raster::{AffineTransform, Grid};

/// ESRI ASCII grid text: six header lines, then one line per row, top row
/// first. Values use the shortest representation that parses back exactly.
pub fn ascii_grid_string(grid: &Grid) -> String {
    let t = grid.transform();
    let c = t.cell_size;
    let mut out = String::new();
    writeln!(out, "ncols {}", grid.n_cols()).unwrap();
    writeln!(out, "nrows {}", grid.n_rows()).unwrap();
    writeln!(out, "xllcorner {}", t.left).unwrap();
    writeln!(out, "yllcorner {}", t.top - grid.n_rows() as f64 * c).unwrap();
    writeln!(out, "cellsize {c}").unwrap();
    writeln!(out, "NODATA_value {}", grid.nodata()).unwrap();
    for row in grid.cells().chunks(grid.n_cols()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_ascii_grid(grid: &Grid, path: impl AsRef<Path>) -> Result<()> {
    write_string(path.as_ref(), &ascii_grid_string(grid))
}

pub fn read_ascii_grid(path: impl AsRef<Path>) -> Result<Grid> {
    parse_ascii_grid(&read_to_string(path.as_ref())?)
}

/// Parses ESRI ASCII grid text. Corner-registered headers only; cells equal
/// to the file's nodata value are stored as the engine sentinel.
pub fn parse_ascii_grid(text: &str) -> Result<Grid> {
    let err = |m: String| Error::format("ascii grid", m);
    let mut tokens = text.split_whitespace();
    let mut header = |key: &str| -> Result<f64> {
        let k = tokens.next().ok_or_else(|| err(format!("missing {key}")))?;
        if !k.eq_ignore_ascii_case(key) {
            return Err(err(format!("expected {key}, found '{k}'")));
        }
        let v = tokens.next().ok_or_else(|| err(format!("missing value for {key}")))?;
        v.parse().map_err(|_| err(format!("bad value '{v}' for {key}")))
    };
    let n_cols = header("ncols")?;
    let n_rows = header("nrows")?;
    let xll = header("xllcorner")?;
    let yll = header("yllcorner")?;
    let c = header("cellsize")?;
    let nodata = header("NODATA_value")?;
    if n_cols.fract() != 0.0 || n_rows.fract() != 0.0 || n_cols < 1.0 || n_rows < 1.0 {
        return Err(err(format!("bad dimensions {n_cols} x {n_rows}")));
    }
    let (n_cols, n_rows) = (n_cols as usize, n_rows as usize);
    let cells = tokens
        .map(|t| {
            t.parse::<f64>()
                .map(|v| if v == nodata { crate::raster::NODATA } else { v })
                .map_err(|_| err(format!("bad cell value '{t}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if cells.len() != n_rows * n_cols {
        return Err(err(format!("expected {} cells, found {}", n_rows * n_cols, cells.len())));
    }
    let transform = AffineTransform::new(c, xll, yll + n_rows as f64 * c)?;
    Grid::from_cells(transform, n_rows, n_cols, cells)
}

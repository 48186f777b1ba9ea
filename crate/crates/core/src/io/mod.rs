//! Reading and writing GeoJSON layers, CSV attribute tables and ESRI ASCII
//! grids.

mod ascii;
mod csv_join;
mod geojson;

pub use ascii::{ascii_grid_string, parse_ascii_grid, read_ascii_grid, write_ascii_grid};
pub use csv_join::{join_table, read_csv_join, read_csv_table, CsvTable};
pub use geojson::{geojson_string, parse_geojson, read_geojson, write_geojson, GeoJsonOptions};

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    GeoJson,
    Csv,
    AsciiGrid,
}

impl DatasetFormat {
    /// Guess from the first meaningful bytes of a file.
    pub fn sniff(content: &str) -> DatasetFormat {
        let head = content.trim_start_matches('\u{feff}').trim_start();
        if head.starts_with('{') {
            DatasetFormat::GeoJson
        } else if head.get(..5).is_some_and(|h| h.eq_ignore_ascii_case("ncols")) {
            DatasetFormat::AsciiGrid
        } else {
            DatasetFormat::Csv
        }
    }

    pub fn from_extension(path: &Path) -> Option<DatasetFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "geojson" | "json" => Some(DatasetFormat::GeoJson),
            "csv" => Some(DatasetFormat::Csv),
            "asc" => Some(DatasetFormat::AsciiGrid),
            _ => None,
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::GeoJson => "geojson",
            DatasetFormat::Csv => "csv",
            DatasetFormat::AsciiGrid => "ascii-grid",
        })
    }
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geojson" => Ok(DatasetFormat::GeoJson),
            "csv" => Ok(DatasetFormat::Csv),
            "ascii-grid" | "asc" => Ok(DatasetFormat::AsciiGrid),
            other => Err(Error::param(format!("unknown dataset format '{other}'"))),
        }
    }
}

/// A dataset on disk with an optional declared format.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DatasetRef {
    pub path: PathBuf,
    pub format: Option<DatasetFormat>,
}

impl DatasetRef {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        DatasetRef {
            path: path.into(),
            format: None,
        }
    }

    pub fn with_format(mut self, format: DatasetFormat) -> Self {
        self.format = Some(format);
        self
    }

    /// Reads the file and checks that its content matches the declared
    /// format, or the extension when none is declared.
    pub fn open(&self) -> Result<(DatasetFormat, String)> {
        let content = read_to_string(&self.path)?;
        let sniffed = DatasetFormat::sniff(&content);
        if let Some(expected) = self.format.or_else(|| DatasetFormat::from_extension(&self.path)) {
            if expected != sniffed {
                return Err(Error::format(
                    self.path.display().to_string(),
                    format!("expected {expected} but content looks like {sniffed}"),
                ));
            }
        }
        Ok((sniffed, content))
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_string(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

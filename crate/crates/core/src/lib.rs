//! Vector-based land-use suitability analysis.
//!
//! The engine follows the usual three stages of a suitability model:
//! measure each land unit against a set of criteria ([`ops`]), transform the
//! measurements onto a common suitability scale ([`rescale`]), and combine
//! them into a single score ([`aggregate`]). [`pipeline`] runs whole models
//! declared in a JSON document, keeping every intermediate in memory.
//!
//! Supporting modules: [`geom`] (features and attribute tables), [`index`]
//! (KD-tree nearest neighbors), [`raster`] (line rasterization and zonal
//! counts), [`io`] (GeoJSON, CSV, ASCII grids) and [`bench`] (scaling runs
//! against brute-force baselines).

pub mod aggregate;
pub mod bench;
pub mod error;
pub mod geom;
pub mod index;
pub mod io;
pub mod ops;
pub mod pipeline;
pub mod raster;
pub mod rescale;

pub use error::{Error, Result};

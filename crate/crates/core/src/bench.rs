//! Scaling benchmarks of the indexed operations against brute-force scans.
//!
//! Only ratios are asserted, never absolute times.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{FeatureLayer, Point2, Polygon};
use crate::index::{KdTree, Metric, DEFAULT_LEAF_SIZE};
use crate::ops::{density_of_point, idw_estimate, IdwConfig, Neighbors, RepresentativePoint};

/// Sizes below this are timed but never asserted.
pub const ASSERTION_FLOOR: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchSuite {
    Nn,
    Idw,
    Density,
}

impl FromStr for BenchSuite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn" => Ok(BenchSuite::Nn),
            "idw" => Ok(BenchSuite::Idw),
            "density" => Ok(BenchSuite::Density),
            other => Err(Error::param(format!("unknown bench suite '{other}'"))),
        }
    }
}

impl fmt::Display for BenchSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchSuite::Nn => "nn",
            BenchSuite::Idw => "idw",
            BenchSuite::Density => "density",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub indexed_seconds: f64,
    pub brute_seconds: f64,
    /// `brute_seconds / indexed_seconds`.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub suite: BenchSuite,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log time against log n; `None` with one size.
    pub indexed_slope: Option<f64>,
    pub brute_slope: Option<f64>,
    /// Whether the largest size reached [`ASSERTION_FLOOR`].
    pub asserted: bool,
    /// At the largest size, indexed was faster than brute force. `None`
    /// when not asserted.
    pub indexed_faster: Option<bool>,
}

impl BenchTable {
    /// Tab-separated table with a header row.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("suite\tn\tindexed_seconds\tbrute_seconds\tspeedup\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\t{:.2}\n",
                self.suite, r.n, r.indexed_seconds, r.brute_seconds, r.speedup
            ));
        }
        s
    }
}

/// `n` uniform points in the square `[0, n]^2`.
pub fn synthetic_points(n: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = n as f64;
    (0..n)
        .map(|_| Point2::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect()
}

fn synthetic_values(n: usize, seed: u64) -> Vec<Option<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Some(rng.random_range(0.0..100.0))).collect()
}

/// Square zones tiling `[0, n]^2`, about one per hundred points.
fn synthetic_zones(n: usize) -> Vec<Polygon> {
    let per_side = ((n / 100).max(1) as f64).sqrt().ceil() as usize;
    let step = n as f64 / per_side as f64;
    let mut out = Vec::with_capacity(per_side * per_side);
    for i in 0..per_side {
        for j in 0..per_side {
            let (x, y) = (i as f64 * step, j as f64 * step);
            out.push(Polygon::rectangle(x, y, x + step, y + step).expect("valid square"));
        }
    }
    out
}

/// Best-of-several wall time; quick functions are repeated until about a
/// fifth of a second has passed.
fn time<T>(mut f: impl FnMut() -> T) -> f64 {
    let mut best = f64::INFINITY;
    let started = Instant::now();
    for rep in 0.. {
        let t = Instant::now();
        black_box(f());
        best = best.min(t.elapsed().as_secs_f64());
        let total = started.elapsed().as_secs_f64();
        if (rep >= 2 && total > 0.2) || best > 0.5 || rep >= 50 {
            break;
        }
    }
    best
}

/// Nearest neighbor by exhaustive scan, ties to the smallest index.
pub fn brute_nearest(p: Point2, targets: &[Point2], metric: Metric) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, t) in targets.iter().enumerate() {
        let d = metric.distance(p, *t);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn brute_idw(p: Point2, known: &[Point2], z: &[f64], k: usize, u: f64) -> f64 {
    let mut d: Vec<(f64, usize)> = known
        .iter()
        .enumerate()
        .map(|(i, q)| (Metric::Euclidean.distance(p, *q), i))
        .collect();
    let k = k.min(d.len());
    d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let near = &d[..k];
    if let Some(&(_, i)) = near.iter().filter(|x| x.0 == 0.0).min_by_key(|x| x.1) {
        return z[i];
    }
    let (num, den) = near.iter().fold((0.0, 0.0), |(n, w), &(di, i)| {
        let wi = di.powf(-u);
        (n + wi * z[i], w + wi)
    });
    num / den
}

fn measure(suite: BenchSuite, n: usize, seed: u64) -> Result<BenchRow> {
    let (indexed_seconds, brute_seconds) = match suite {
        BenchSuite::Nn => {
            let targets = synthetic_points(n, seed);
            let sources = synthetic_points(n, seed.wrapping_add(1));
            let indexed = time(|| {
                let tree = KdTree::build(&targets, DEFAULT_LEAF_SIZE).expect("non-empty");
                sources
                    .par_iter()
                    .map(|&p| tree.nearest(p, Metric::Euclidean).expect("non-empty").distance)
                    .sum::<f64>()
            });
            let brute = time(|| {
                sources
                    .par_iter()
                    .map(|&p| brute_nearest(p, &targets, Metric::Euclidean).1)
                    .sum::<f64>()
            });
            (indexed, brute)
        }
        BenchSuite::Idw => {
            let known_pts = synthetic_points(n, seed);
            let z = synthetic_values(n, seed.wrapping_add(2));
            let zones = FeatureLayer::from_points(synthetic_points(n, seed.wrapping_add(1)));
            let known = FeatureLayer::from_points(known_pts.clone())
                .with_column("z", crate::geom::Column::Number(z.clone()))?;
            let config = IdwConfig {
                power: 2.0,
                neighbors: Neighbors::Count(12),
                search_radius: None,
            };
            let indexed = time(|| {
                idw_estimate(&zones, &known, "z", &config, &RepresentativePoint::Centroid).expect("valid")
            });
            let zs: Vec<f64> = z.iter().map(|v| v.expect("generated")).collect();
            let zone_pts = zones.points()?;
            let brute = time(|| {
                zone_pts
                    .par_iter()
                    .map(|&p| brute_idw(p, &known_pts, &zs, 12, 2.0))
                    .sum::<f64>()
            });
            (indexed, brute)
        }
        BenchSuite::Density => {
            let pts = synthetic_points(n, seed);
            let zones_vec = synthetic_zones(n);
            let targets = FeatureLayer::from_points(pts.clone());
            let zones = FeatureLayer::from_polygons(zones_vec.clone());
            let indexed = time(|| density_of_point(&zones, &targets, None).expect("valid"));
            let brute = time(|| {
                zones_vec
                    .par_iter()
                    .map(|z| pts.iter().filter(|p| z.contains(**p)).count() as f64 / z.area())
                    .collect::<Vec<_>>()
            });
            (indexed, brute)
        }
    };
    Ok(BenchRow {
        n,
        indexed_seconds,
        brute_seconds,
        speedup: brute_seconds / indexed_seconds,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Times `suite` at each size. Sizes must be ascending and positive.
pub fn run_bench(suite: BenchSuite, sizes: &[usize], seed: u64) -> Result<BenchTable> {
    if sizes.is_empty() {
        return Err(Error::param("no bench sizes given"));
    }
    if sizes.contains(&0) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("bench sizes must be positive and strictly ascending"));
    }
    let rows = sizes
        .iter()
        .map(|&n| measure(suite, n, seed))
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let it: Vec<f64> = rows.iter().map(|r| r.indexed_seconds).collect();
    let bt: Vec<f64> = rows.iter().map(|r| r.brute_seconds).collect();
    let last = rows.last().expect("non-empty");
    let asserted = last.n >= ASSERTION_FLOOR;
    Ok(BenchTable {
        suite,
        seed,
        indexed_slope: loglog_slope(&ns, &it),
        brute_slope: loglog_slope(&ns, &bt),
        asserted,
        indexed_faster: asserted.then(|| last.indexed_seconds < last.brute_seconds),
        rows,
    })
}

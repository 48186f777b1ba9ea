use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{representative_points, MeasurementResult, RepresentativePoint};
use crate::error::{Error, Result};
use crate::geom::{FeatureLayer, Point2};
use crate::index::{KdTree, Metric, Neighbor, DEFAULT_LEAF_SIZE};

/// Powers tried by [`idw_cv`] when the caller does not supply any.
pub const DEFAULT_CANDIDATE_POWERS: [f64; 8] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Neighbors {
    All,
    #[serde(untagged)]
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdwConfig {
    pub power: f64,
    pub neighbors: Neighbors,
    pub search_radius: Option<f64>,
}

impl Default for IdwConfig {
    fn default() -> Self {
        IdwConfig {
            power: 2.0,
            neighbors: Neighbors::Count(12),
            search_radius: None,
        }
    }
}

impl IdwConfig {
    pub fn with_power(power: f64) -> Self {
        IdwConfig {
            power,
            ..IdwConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_power(self.power)?;
        if self.neighbors == Neighbors::Count(0) {
            return Err(Error::param("n_neighbors must be positive"));
        }
        if let Some(r) = self.search_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::param(format!("search radius must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

fn validate_power(u: f64) -> Result<()> {
    if u.is_finite() && u > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("power must be positive and finite, got {u}")))
    }
}

/// Known sample points with their values, nodata rows dropped.
struct Samples {
    points: Vec<Point2>,
    values: Vec<f64>,
    tree: KdTree,
}

impl Samples {
    fn load(known: &FeatureLayer, value_column: &str, warnings: &mut Vec<String>) -> Result<Self> {
        let pts = known.points()?;
        let vals = known.attributes().numeric(value_column)?;
        let (mut points, mut values) = (Vec::new(), Vec::new());
        for (p, v) in pts.into_iter().zip(vals) {
            if let Some(v) = v {
                points.push(p);
                values.push(v);
            }
        }
        let dropped = known.len() - points.len();
        if dropped > 0 {
            warnings.push(format!("{dropped} known points have no value in '{value_column}' and were ignored"));
        }
        if points.is_empty() {
            return Err(Error::Empty("no known points with values"));
        }
        let tree = KdTree::build(&points, DEFAULT_LEAF_SIZE)?;
        Ok(Samples { points, values, tree })
    }

    /// Neighbors of `p` ordered by (distance, index), radius applied.
    fn neighbors(&self, p: Point2, count: usize, radius: Option<f64>) -> Result<Vec<Neighbor>> {
        let mut nbrs = if count >= self.points.len() {
            let mut all: Vec<Neighbor> = self
                .points
                .iter()
                .enumerate()
                .map(|(index, q)| Neighbor {
                    index,
                    distance: Metric::Euclidean.distance(p, *q),
                })
                .collect();
            all.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
            all
        } else {
            self.tree.k_nearest(p, count, Metric::Euclidean)?
        };
        if let Some(r) = radius {
            nbrs.retain(|n| n.distance <= r);
        }
        Ok(nbrs)
    }
}

fn neighbor_count(neighbors: Neighbors, n: usize) -> usize {
    match neighbors {
        Neighbors::All => n,
        Neighbors::Count(k) => k,
    }
}

/// Shepard interpolation over an ordered neighbor list. A neighbor at zero
/// distance returns its value exactly; the first one wins on ties.
fn shepard(nbrs: &[Neighbor], values: &[f64], power: f64) -> Option<f64> {
    let nearest = nbrs.first()?;
    if nearest.distance == 0.0 {
        return Some(values[nearest.index]);
    }
    // Weights are scaled by the nearest distance, which leaves the ratio
    // unchanged but keeps d^-u away from overflow and underflow.
    let d0 = nearest.distance;
    let (mut num, mut den) = (0.0, 0.0);
    for n in nbrs {
        let w = (d0 / n.distance).powf(power);
        num += w * values[n.index];
        den += w;
    }
    Some(num / den)
}

/// Inverse-distance-weighted estimate at each zone's representative point.
/// Zones with no known point inside the search radius get nodata.
pub fn idw_estimate(
    zones: &FeatureLayer,
    known: &FeatureLayer,
    value_column: &str,
    config: &IdwConfig,
    rep: &RepresentativePoint,
) -> Result<MeasurementResult> {
    config.validate()?;
    let mut warnings = Vec::new();
    let samples = Samples::load(known, value_column, &mut warnings)?;
    let (targets, rep_warnings) = representative_points(zones, rep)?;
    warnings.extend(rep_warnings);
    let k = neighbor_count(config.neighbors, samples.points.len());
    let values = targets
        .par_iter()
        .map(|&p| {
            let nbrs = samples.neighbors(p, k, config.search_radius)?;
            Ok(shepard(&nbrs, &samples.values, config.power))
        })
        .collect::<Result<Vec<_>>>()?;
    let unresolved = values.iter().filter(|v| v.is_none()).count();
    if unresolved > 0 {
        warnings.push(format!("{unresolved} zones have no known point within the search radius"));
    }
    let mut result = MeasurementResult::new("idw", "value units", values);
    result.warnings = warnings;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdwCvResult {
    pub best_power: f64,
    /// `(power, leave-one-out RMSE)` in candidate order.
    pub rmse: Vec<(f64, f64)>,
    pub evaluated: usize,
    /// Points sharing their location with another known point.
    pub skipped_coincident: usize,
    /// Points with no other known point inside the search radius.
    pub skipped_isolated: usize,
}

/// Leave-one-out cross validation of the power parameter.
///
/// Each known point is predicted from the others with the neighbor and
/// radius settings of `base`; the candidate with the lowest RMSE wins, ties
/// going to the smaller power.
pub fn idw_cv(known: &FeatureLayer, value_column: &str, candidates: &[f64], base: &IdwConfig) -> Result<IdwCvResult> {
    if candidates.is_empty() {
        return Err(Error::param("no candidate powers"));
    }
    for &u in candidates {
        validate_power(u)?;
    }
    base.validate()?;
    let mut warnings = Vec::new();
    let samples = Samples::load(known, value_column, &mut warnings)?;
    let n = samples.points.len();
    if n < 3 {
        return Err(Error::param(format!("cross validation needs at least 3 known points, got {n}")));
    }
    let k = neighbor_count(base.neighbors, n - 1);

    enum Outcome {
        Errors(Vec<f64>),
        Coincident,
        Isolated,
    }

    let outcomes = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = samples.points[i];
            // Ask for one extra so the held-out point itself can be dropped.
            let mut nbrs = samples.neighbors(p, k + 1, None)?;
            if nbrs.iter().any(|nb| nb.index != i && nb.distance == 0.0) {
                return Ok(Outcome::Coincident);
            }
            nbrs.retain(|nb| nb.index != i);
            nbrs.truncate(k);
            if let Some(r) = base.search_radius {
                nbrs.retain(|nb| nb.distance <= r);
            }
            if nbrs.is_empty() {
                return Ok(Outcome::Isolated);
            }
            let truth = samples.values[i];
            Ok(Outcome::Errors(
                candidates
                    .iter()
                    .map(|&u| shepard(&nbrs, &samples.values, u).expect("non-empty") - truth)
                    .collect(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sse = vec![0.0; candidates.len()];
    let (mut evaluated, mut coincident, mut isolated) = (0, 0, 0);
    for o in outcomes {
        match o {
            Outcome::Errors(errs) => {
                evaluated += 1;
                for (acc, e) in sse.iter_mut().zip(errs) {
                    *acc += e * e;
                }
            }
            Outcome::Coincident => coincident += 1,
            Outcome::Isolated => isolated += 1,
        }
    }
    if evaluated == 0 {
        return Err(Error::param("no known point could be cross-validated"));
    }
    let rmse: Vec<(f64, f64)> = candidates
        .iter()
        .zip(&sse)
        .map(|(&u, &s)| (u, (s / evaluated as f64).sqrt()))
        .collect();
    let best_power = rmse
        .iter()
        .copied()
        .reduce(|best, cur| {
            if cur.1 < best.1 || (cur.1 == best.1 && cur.0 < best.0) {
                cur
            } else {
                best
            }
        })
        .expect("non-empty")
        .0;
    Ok(IdwCvResult {
        best_power,
        rmse,
        evaluated,
        skipped_coincident: coincident,
        skipped_isolated: isolated,
    })
}

//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

pub mod compose;

use landsuit::geom::{FeatureLayer, Point2, Polygon};
use landsuit::index::Metric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<Point2> {
    (0..n)
        .map(|_| Point2::new(rng.random_range(lo..hi), rng.random_range(lo..hi)))
        .collect()
}

pub fn dist(a: Point2, b: Point2, metric: Metric) -> f64 {
    let (dx, dy) = ((a.x - b.x).abs(), (a.y - b.y).abs());
    match metric {
        Metric::Euclidean => (dx * dx + dy * dy).sqrt(),
        Metric::Manhattan => dx + dy,
    }
}

/// Linear scan; the smallest index wins ties.
pub fn scan_nearest(p: Point2, targets: &[Point2], metric: Metric) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, &t) in targets.iter().enumerate() {
        let d = dist(p, t, metric);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// All targets ordered by (distance, index).
pub fn scan_sorted(p: Point2, targets: &[Point2], metric: Metric) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = targets.iter().enumerate().map(|(i, &t)| (i, dist(p, t, metric))).collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all
}

pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.x + t * vx, a.y + t * vy);
    ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
}

pub fn polyline_distance(p: Point2, line: &[Point2]) -> f64 {
    line.windows(2)
        .map(|w| segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Whether segment `a`-`b` meets the closed box, by parametric clipping
/// against all four slabs.
pub fn segment_meets_box(a: Point2, b: Point2, min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> bool {
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    let d = [b.x - a.x, b.y - a.y];
    let o = [a.x, a.y];
    let lo = [min_x, min_y];
    let hi = [max_x, max_y];
    for k in 0..2 {
        if d[k] == 0.0 {
            if o[k] < lo[k] || o[k] > hi[k] {
                return false;
            }
        } else {
            let (mut ta, mut tb) = ((lo[k] - o[k]) / d[k], (hi[k] - o[k]) / d[k]);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Crossing-number containment with an explicit on-edge check.
pub fn ring_contains(ring: &[Point2], p: Point2) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if segment_distance(p, a, b) <= 1e-12 {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn polygon_contains(poly: &Polygon, p: Point2) -> bool {
    if !ring_contains(poly.exterior(), p) {
        return false;
    }
    for h in poly.holes() {
        let on_edge = h.windows(2).any(|w| segment_distance(p, w[0], w[1]) <= 1e-12);
        if !on_edge && ring_contains(h, p) {
            return false;
        }
    }
    true
}

pub fn sdcm_of(classes: &[&[f64]]) -> f64 {
    classes
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum()
}

/// Minimum SDCM over every split of sorted `xs` into `k` non-empty runs.
pub fn enumerate_min_sdcm(xs: &[f64], k: usize) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut best = f64::INFINITY;
    let mut cuts = Vec::with_capacity(k);
    fn recurse(sorted: &[f64], start: usize, left: usize, cuts: &mut Vec<usize>, best: &mut f64) {
        let n = sorted.len();
        if left == 1 {
            cuts.push(n);
            let mut prev = 0;
            let classes: Vec<&[f64]> = cuts
                .iter()
                .map(|&c| {
                    let s = &sorted[prev..c];
                    prev = c;
                    s
                })
                .collect();
            *best = best.min(sdcm_of(&classes));
            cuts.pop();
            return;
        }
        for end in start + 1..=n - (left - 1) {
            cuts.push(end);
            recurse(sorted, end, left - 1, cuts, best);
            cuts.pop();
        }
    }
    assert!(k >= 1 && k <= n);
    recurse(&sorted, 0, k, &mut cuts, &mut best);
    best
}

/// Leave-one-out IDW residuals by double loop. Returns `None` for a held-out
/// point with a coincident partner or no neighbor.
pub fn loo_residual(points: &[Point2], values: &[f64], i: usize, k: usize, radius: Option<f64>, u: f64) -> Option<f64> {
    let p = points[i];
    if points.iter().enumerate().any(|(j, &q)| j != i && q == p) {
        return None;
    }
    let mut others: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, &q)| (j, dist(p, q, Metric::Euclidean)))
        .collect();
    others.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    others.truncate(k);
    if let Some(r) = radius {
        others.retain(|&(_, d)| d <= r);
    }
    if others.is_empty() {
        return None;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(j, d) in &others {
        let w = 1.0 / d.powf(u);
        num += w * values[j];
        den += w;
    }
    Some(num / den - values[i])
}

pub fn point_layer(points: &[Point2], column: &str, values: &[f64]) -> FeatureLayer {
    FeatureLayer::from_points(points.iter().copied())
        .with_column(column, landsuit::geom::Column::Number(values.iter().map(|&v| Some(v)).collect()))
        .unwrap()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Weights from a matrix by the row geometric mean, exact for consistent
/// matrices.
pub fn geometric_mean_weights(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    let g: Vec<f64> = rows.iter().map(|r| r.iter().map(|v| v.ln()).sum::<f64>() / n).map(f64::exp).collect();
    let s: f64 = g.iter().sum();
    g.iter().map(|v| v / s).collect()
}

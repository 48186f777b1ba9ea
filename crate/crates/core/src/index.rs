//! Static 2-D KD-tree built with the sliding-midpoint rule.
//!
//! Each node's cell is split at the midpoint of its widest side. If that
//! plane would leave one side empty, it slides to the nearest point so that
//! exactly that point crosses over. The tree is built on coordinates only;
//! the metric is applied at query time, so one tree serves both Euclidean
//! and Manhattan queries.
//!
//! Ties between equidistant points always resolve to the smallest original
//! index, which makes every query reproducible against a linear scan.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BBox, Point2};

pub const DEFAULT_LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    /// Distance in the metric's comparison space: squared for Euclidean,
    /// plain for Manhattan. Monotone in the true distance.
    #[inline]
    fn reduced(self, dx: f64, dy: f64) -> f64 {
        match self {
            Metric::Euclidean => dx * dx + dy * dy,
            Metric::Manhattan => dx.abs() + dy.abs(),
        }
    }

    #[inline]
    fn from_reduced(self, r: f64) -> f64 {
        match self {
            Metric::Euclidean => r.sqrt(),
            Metric::Manhattan => r,
        }
    }

    pub fn distance(self, a: Point2, b: Point2) -> f64 {
        self.from_reduced(self.reduced(a.x - b.x, a.y - b.y))
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "manhattan" | "l1" => Ok(Metric::Manhattan),
            other => Err(Error::param(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KdNode {
    /// Points `start..end` of the tree's internal point order.
    Leaf { start: usize, end: usize },
    /// Left subtree coordinates are `<= value` on `axis`, right are `>= value`.
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub nodes_visited: usize,
    pub leaves_visited: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdTree {
    nodes: Vec<KdNode>,
    points: Vec<Point2>,
    indices: Vec<usize>,
    leaf_size: usize,
}

#[derive(Clone, Copy)]
struct Cell {
    lo: [f64; 2],
    hi: [f64; 2],
}

#[inline]
fn coord(p: Point2, axis: usize) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

impl KdTree {
    pub fn build(points: &[Point2], leaf_size: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("cannot index empty set"));
        }
        if leaf_size == 0 {
            return Err(Error::param("leaf_size must be positive"));
        }
        for p in points {
            p.ensure_finite()?;
        }

        let bb = BBox::of_points(points).expect("non-empty");
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut scratch: Vec<usize> = Vec::with_capacity(points.len());
        let mut nodes = vec![KdNode::Leaf { start: 0, end: 0 }];
        let root_cell = Cell {
            lo: [bb.min_x, bb.min_y],
            hi: [bb.max_x, bb.max_y],
        };
        let mut stack = vec![(0usize, 0usize, points.len(), root_cell)];

        while let Some((node, start, end, cell)) = stack.pop() {
            if end - start <= leaf_size {
                nodes[node] = KdNode::Leaf { start, end };
                continue;
            }
            let slice = &mut order[start..end];
            let (axis, value, n_left, left_cell, right_cell) =
                split_slice(points, slice, &mut scratch, cell);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(KdNode::Leaf { start: 0, end: 0 });
            nodes.push(KdNode::Leaf { start: 0, end: 0 });
            nodes[node] = KdNode::Split {
                axis,
                value,
                left,
                right,
            };
            stack.push((right, start + n_left, end, right_cell));
            stack.push((left, start, start + n_left, left_cell));
        }

        Ok(KdTree {
            nodes,
            points: order.iter().map(|&i| points[i]).collect(),
            indices: order,
            leaf_size,
        })
    }

    pub fn with_default_leaf_size(points: &[Point2]) -> Result<Self> {
        KdTree::build(points, DEFAULT_LEAF_SIZE)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn nodes(&self) -> &[KdNode] {
        &self.nodes
    }

    /// The indexed point with original index `i`.
    pub fn point(&self, i: usize) -> Point2 {
        let pos = self.indices.iter().position(|&j| j == i).expect("index in range");
        self.points[pos]
    }

    /// Original indices of the points held by a leaf node.
    pub fn leaf_indices(&self, node: usize) -> Option<&[usize]> {
        match self.nodes.get(node)? {
            KdNode::Leaf { start, end } => Some(&self.indices[*start..*end]),
            KdNode::Split { .. } => None,
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, KdNode::Leaf { .. }))
            .count()
    }

    /// Length of the longest root-to-leaf path (a single leaf has depth 0).
    pub fn depth(&self) -> usize {
        let mut max_depth = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((node, d)) = stack.pop() {
            match self.nodes[node] {
                KdNode::Leaf { .. } => max_depth = max_depth.max(d),
                KdNode::Split { left, right, .. } => {
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
            }
        }
        max_depth
    }

    /// Structural audit: every point reachable from exactly one leaf, leaves
    /// within `leaf_size`, and split ordering respected in every subtree.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut seen = vec![false; self.len()];
        // (node, lower/upper bounds implied by ancestors)
        let mut stack = vec![(0usize, [f64::NEG_INFINITY; 2], [f64::INFINITY; 2])];
        while let Some((node, lo, hi)) = stack.pop() {
            match self.nodes[node] {
                KdNode::Leaf { start, end } => {
                    if end - start > self.leaf_size {
                        return Err(format!("leaf {node} holds {} points", end - start));
                    }
                    if start == end {
                        return Err(format!("leaf {node} is empty"));
                    }
                    for pos in start..end {
                        let p = self.points[pos];
                        for axis in 0..2 {
                            let c = coord(p, axis);
                            if c < lo[axis] || c > hi[axis] {
                                return Err(format!("point {} violates an ancestor split", self.indices[pos]));
                            }
                        }
                        let idx = self.indices[pos];
                        if std::mem::replace(&mut seen[idx], true) {
                            return Err(format!("point {idx} appears in two leaves"));
                        }
                    }
                }
                KdNode::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let mut left_hi = hi;
                    left_hi[axis] = left_hi[axis].min(value);
                    let mut right_lo = lo;
                    right_lo[axis] = right_lo[axis].max(value);
                    stack.push((left, lo, left_hi));
                    stack.push((right, right_lo, hi));
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(format!("point {i} is unreachable")),
            None => Ok(()),
        }
    }

    pub fn nearest(&self, query: Point2, metric: Metric) -> Result<Neighbor> {
        self.nearest_with_stats(query, metric).map(|(n, _)| n)
    }

    pub fn nearest_with_stats(&self, query: Point2, metric: Metric) -> Result<(Neighbor, QueryStats)> {
        query.ensure_finite()?;
        let q = [query.x, query.y];
        let mut best = (f64::INFINITY, usize::MAX);
        let mut stats = QueryStats::default();
        let mut stack: Vec<(usize, [f64; 2])> = Vec::with_capacity(64);
        stack.push((0, [0.0, 0.0]));

        while let Some((node, off)) = stack.pop() {
            // Equality is kept so that a smaller-index tie is still found.
            if metric.reduced(off[0], off[1]) > best.0 {
                continue;
            }
            stats.nodes_visited += 1;
            match self.nodes[node] {
                KdNode::Leaf { start, end } => {
                    stats.leaves_visited += 1;
                    for pos in start..end {
                        let p = self.points[pos];
                        let d = metric.reduced(query.x - p.x, query.y - p.y);
                        let idx = self.indices[pos];
                        if d < best.0 || (d == best.0 && idx < best.1) {
                            best = (d, idx);
                        }
                    }
                }
                KdNode::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let diff = q[axis] - value;
                    let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                    let mut far_off = off;
                    far_off[axis] = diff.abs();
                    stack.push((far, far_off));
                    stack.push((near, off));
                }
            }
        }

        Ok((
            Neighbor {
                index: best.1,
                distance: metric.from_reduced(best.0),
            },
            stats,
        ))
    }

    /// The `k` nearest points ordered by (distance, original index).
    pub fn k_nearest(&self, query: Point2, k: usize, metric: Metric) -> Result<Vec<Neighbor>> {
        query.ensure_finite()?;
        let k = k.min(self.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        let q = [query.x, query.y];
        // Sorted ascending by (reduced distance, index); at most k entries.
        let mut found: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        let mut stack: Vec<(usize, [f64; 2])> = Vec::with_capacity(64);
        stack.push((0, [0.0, 0.0]));

        while let Some((node, off)) = stack.pop() {
            if found.len() == k && metric.reduced(off[0], off[1]) > found[k - 1].0 {
                continue;
            }
            match self.nodes[node] {
                KdNode::Leaf { start, end } => {
                    for pos in start..end {
                        let p = self.points[pos];
                        let cand = (metric.reduced(query.x - p.x, query.y - p.y), self.indices[pos]);
                        if found.len() == k && !lex_less(cand, found[k - 1]) {
                            continue;
                        }
                        let at = found.partition_point(|&e| lex_less(e, cand));
                        found.insert(at, cand);
                        found.truncate(k);
                    }
                }
                KdNode::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let diff = q[axis] - value;
                    let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                    let mut far_off = off;
                    far_off[axis] = diff.abs();
                    stack.push((far, far_off));
                    stack.push((near, off));
                }
            }
        }

        Ok(found
            .into_iter()
            .map(|(r, index)| Neighbor {
                index,
                distance: metric.from_reduced(r),
            })
            .collect())
    }
}

#[inline]
fn lex_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Chooses a split for `slice` (indices into `points`) and stably partitions
/// it in place. Returns (axis, value, left count, left cell, right cell).
fn split_slice(
    points: &[Point2],
    slice: &mut [usize],
    scratch: &mut Vec<usize>,
    cell: Cell,
) -> (usize, f64, usize, Cell, Cell) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &i in slice.iter() {
        let p = points[i];
        lo[0] = lo[0].min(p.x);
        hi[0] = hi[0].max(p.x);
        lo[1] = lo[1].min(p.y);
        hi[1] = hi[1].max(p.y);
    }
    let spread = [hi[0] - lo[0], hi[1] - lo[1]];

    // Widest side of the cell, unless the points are flat along it.
    let widest = if cell.hi[1] - cell.lo[1] > cell.hi[0] - cell.lo[0] { 1 } else { 0 };
    let axis = if spread[widest] > 0.0 {
        widest
    } else if spread[1 - widest] > 0.0 {
        1 - widest
    } else {
        // All points coincide: split by count, both sides equal to the value.
        let n_left = slice.len() / 2;
        return (0, lo[0], n_left, cell, cell);
    };

    let mut value = 0.5 * (cell.lo[axis] + cell.hi[axis]);
    let below = slice
        .iter()
        .filter(|&&i| coord(points[i], axis) < value)
        .count();

    scratch.clear();
    let n_left;
    if below == 0 {
        // Slide down to the lowest point; it alone goes left.
        value = lo[axis];
        let pick = slice
            .iter()
            .position(|&i| coord(points[i], axis) == value)
            .expect("minimum is attained");
        scratch.push(slice[pick]);
        scratch.extend(slice.iter().enumerate().filter(|&(k, _)| k != pick).map(|(_, &i)| i));
        n_left = 1;
    } else if below == slice.len() {
        // Slide up to the highest point; it alone goes right.
        value = hi[axis];
        let pick = slice
            .iter()
            .position(|&i| coord(points[i], axis) == value)
            .expect("maximum is attained");
        scratch.extend(slice.iter().enumerate().filter(|&(k, _)| k != pick).map(|(_, &i)| i));
        scratch.push(slice[pick]);
        n_left = slice.len() - 1;
    } else {
        scratch.extend(slice.iter().copied().filter(|&i| coord(points[i], axis) < value));
        scratch.extend(slice.iter().copied().filter(|&i| coord(points[i], axis) >= value));
        n_left = below;
    }
    slice.copy_from_slice(scratch);

    let mut left_cell = cell;
    left_cell.hi[axis] = value;
    let mut right_cell = cell;
    right_cell.lo[axis] = value;
    (axis, value, n_left, left_cell, right_cell)
}

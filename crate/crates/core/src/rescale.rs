//! Transformation of raw measurements onto a suitability scale.
//!
//! Three families are provided: table lookup ([`reclassify`]) for categories
//! and value ranges, Jenks natural breaks ([`natural_breaks`]) solved exactly
//! by dynamic programming, and min-max stretching ([`linear`]) in regular or
//! inverse order. Nodata (`None`) passes through every transform unchanged.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Value;

/// A categorical lookup key. Integers and floats compare numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Category {
    Boolean(bool),
    Number(f64),
    Text(String),
}

impl Category {
    fn matches(&self, v: &Value) -> bool {
        match (self, v) {
            (Category::Boolean(a), Value::Boolean(b)) => a == b,
            (Category::Text(a), Value::Text(b)) => a == b,
            (Category::Number(a), v) => v.as_f64().is_some_and(|b| *a == b),
            _ => false,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Boolean(b) => write!(f, "{b}"),
            Category::Number(n) => write!(f, "{n}"),
            Category::Text(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEntry {
    pub value: Category,
    pub score: f64,
}

/// Half-open interval `[low, high)` mapped to `score`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeEntry {
    pub low: f64,
    pub high: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReclassifyTable {
    Categorical {
        entries: Vec<CategoryEntry>,
        #[serde(default)]
        default: Option<f64>,
    },
    Range {
        entries: Vec<RangeEntry>,
        #[serde(default)]
        default: Option<f64>,
    },
}

impl ReclassifyTable {
    pub fn categorical(entries: impl IntoIterator<Item = (Category, f64)>, default: Option<f64>) -> Result<Self> {
        let t = ReclassifyTable::Categorical {
            entries: entries
                .into_iter()
                .map(|(value, score)| CategoryEntry { value, score })
                .collect(),
            default,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn range(entries: impl IntoIterator<Item = (f64, f64, f64)>, default: Option<f64>) -> Result<Self> {
        let t = ReclassifyTable::Range {
            entries: entries
                .into_iter()
                .map(|(low, high, score)| RangeEntry { low, high, score })
                .collect(),
            default,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn default_score(&self) -> Option<f64> {
        match self {
            ReclassifyTable::Categorical { default, .. } | ReclassifyTable::Range { default, .. } => *default,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.default_score() {
            if !d.is_finite() {
                return Err(Error::param("default score must be finite"));
            }
        }
        match self {
            ReclassifyTable::Categorical { entries, .. } => {
                if entries.is_empty() {
                    return Err(Error::param("reclassify table has no entries"));
                }
                for (i, e) in entries.iter().enumerate() {
                    if !e.score.is_finite() {
                        return Err(Error::param(format!("score for {} is not finite", e.value)));
                    }
                    if let Category::Number(n) = e.value {
                        if !n.is_finite() {
                            return Err(Error::param("category keys must be finite"));
                        }
                    }
                    if entries[..i].iter().any(|o| o.value == e.value) {
                        return Err(Error::param(format!("duplicate category {}", e.value)));
                    }
                }
            }
            ReclassifyTable::Range { entries, .. } => {
                if entries.is_empty() {
                    return Err(Error::param("reclassify table has no entries"));
                }
                for e in entries {
                    if !(e.low.is_finite() && e.high.is_finite() && e.score.is_finite()) {
                        return Err(Error::param("range bounds and scores must be finite"));
                    }
                    if e.low >= e.high {
                        return Err(Error::param(format!("empty range [{}, {})", e.low, e.high)));
                    }
                }
                for w in entries.windows(2) {
                    if w[1].low < w[0].high {
                        return Err(Error::param(format!(
                            "ranges [{}, {}) and [{}, {}) are unsorted or overlap",
                            w[0].low, w[0].high, w[1].low, w[1].high
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Score for one value, `None` if nothing matches and there is no default.
    pub fn lookup(&self, v: &Value) -> Option<f64> {
        let hit = match self {
            ReclassifyTable::Categorical { entries, .. } => entries.iter().find(|e| e.value.matches(v)).map(|e| e.score),
            ReclassifyTable::Range { entries, .. } => match v {
                Value::Integer(_) | Value::Number(_) => {
                    let x = v.as_f64().expect("numeric");
                    let i = entries.partition_point(|e| e.low <= x);
                    (i > 0 && x < entries[i - 1].high).then(|| entries[i - 1].score)
                }
                _ => None,
            },
        };
        hit.or(self.default_score())
    }
}

/// Maps each value through `table`. Nulls stay nodata; the first unmatched
/// value is an error unless the table has a default.
pub fn reclassify(values: &[Value], table: &ReclassifyTable) -> Result<Vec<Option<f64>>> {
    table.validate()?;
    values
        .iter()
        .map(|v| {
            if v.is_null() {
                return Ok(None);
            }
            table
                .lookup(v)
                .map(Some)
                .ok_or_else(|| Error::Unmatched(v.to_string()))
        })
        .collect()
}

/// Numeric convenience wrapper over [`reclassify`].
pub fn reclassify_numbers(values: &[Option<f64>], table: &ReclassifyTable) -> Result<Vec<Option<f64>>> {
    let vals: Vec<Value> = values.iter().map(|v| v.map_or(Value::Null, Value::Number)).collect();
    reclassify(&vals, table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBreaks {
    pub k: usize,
    /// `k - 1` strictly ascending interior cut values.
    pub breaks: Vec<f64>,
    pub gvf: f64,
    pub sdam: f64,
    pub sdcm: f64,
}

impl ClassBreaks {
    /// Zero-based class of `x`: the number of breaks at or below it.
    pub fn class_of(&self, x: f64) -> usize {
        self.breaks.partition_point(|&b| b <= x)
    }
}

/// Jenks natural breaks: the contiguous `k`-partition of the sorted values
/// with minimum within-class squared deviation, found exactly.
///
/// The search runs over distinct values weighted by multiplicity, so equal
/// values never straddle a break. Breaks sit midway between the last value of
/// one class and the first of the next.
pub fn natural_breaks(values: &[f64], k: usize) -> Result<ClassBreaks> {
    if k < 2 {
        return Err(Error::param(format!("k must be at least 2, got {k}")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("natural breaks input contains {v}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for &v in &sorted {
        match distinct.last_mut() {
            Some((x, c)) if *x == v => *c += 1.0,
            _ => distinct.push((v, 1.0)),
        }
    }
    let m = distinct.len();
    if m < k {
        return Err(Error::TooFewDistinct { needed: k, found: m });
    }

    // Prefix sums of count, sum and sum of squares, centered on the mean to
    // limit cancellation.
    let n = sorted.len() as f64;
    let center = sorted.iter().sum::<f64>() / n;
    let mut pc = vec![0.0; m + 1];
    let mut ps = vec![0.0; m + 1];
    let mut pq = vec![0.0; m + 1];
    for (i, &(x, c)) in distinct.iter().enumerate() {
        let d = x - center;
        pc[i + 1] = pc[i] + c;
        ps[i + 1] = ps[i] + c * d;
        pq[i + 1] = pq[i] + c * d * d;
    }
    // Squared deviation of distinct values i..j (exclusive) from their mean.
    let ssd = |i: usize, j: usize| {
        let c = pc[j] - pc[i];
        let s = ps[j] - ps[i];
        (pq[j] - pq[i] - s * s / c).max(0.0)
    };

    // cost[j][e]: best cost of splitting the first e distinct values into j+1
    // classes; back[j][e]: start of the last class.
    let mut cost = vec![vec![f64::INFINITY; m + 1]; k];
    let mut back = vec![vec![0usize; m + 1]; k];
    for e in 1..=m {
        cost[0][e] = ssd(0, e);
    }
    for j in 1..k {
        for e in (j + 1)..=m {
            let (mut best, mut arg) = (f64::INFINITY, 0);
            for s in j..e {
                let c = cost[j - 1][s] + ssd(s, e);
                if c < best {
                    best = c;
                    arg = s;
                }
            }
            cost[j][e] = best;
            back[j][e] = arg;
        }
    }
    let mut starts = vec![0usize; k];
    let mut e = m;
    for j in (1..k).rev() {
        starts[j] = back[j][e];
        e = starts[j];
    }

    let breaks: Vec<f64> = starts[1..]
        .iter()
        .map(|&s| {
            let (lo, hi) = (distinct[s - 1].0, distinct[s].0);
            let mid = lo + (hi - lo) / 2.0;
            // Adjacent floats can round the midpoint down onto `lo`.
            if mid <= lo {
                hi
            } else {
                mid
            }
        })
        .collect();

    // Report the objective from a direct two-pass computation rather than
    // the prefix sums used for the search.
    let sdam = squared_deviation(&sorted);
    let mut sdcm = 0.0;
    let mut lo = 0;
    for j in 0..k {
        let end = if j + 1 < k { pc[starts[j + 1]] as usize } else { sorted.len() };
        sdcm += squared_deviation(&sorted[lo..end]);
        lo = end;
    }
    let gvf = if sdam == 0.0 { 1.0 } else { (sdam - sdcm) / sdam };
    Ok(ClassBreaks {
        k,
        breaks,
        gvf,
        sdam,
        sdcm,
    })
}

/// Sum of squared deviations from the mean.
pub fn squared_deviation(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleOrder {
    #[default]
    Regular,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearScale {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub order: ScaleOrder,
}

impl LinearScale {
    pub fn new(a: f64, b: f64, order: ScaleOrder) -> Result<Self> {
        let s = LinearScale { a, b, order };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return Err(Error::param(format!(
                "scale needs finite a < b, got [{}, {}]",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearOutput {
    pub values: Vec<Option<f64>>,
    pub x_min: f64,
    pub x_max: f64,
    /// Set when every input was equal and all outputs are the scale midpoint.
    pub constant_input: bool,
}

/// Min-max stretch of `values` onto `[a, b]`, reversed for inverse order.
///
/// When `a` and `b` share a grid of their larger ulp, the offset from the
/// anchoring end is rounded onto that grid. Both orders then land on exact
/// grid values and `regular(x) + inverse(x) == a + b` holds bit for bit.
pub fn linear(values: &[Option<f64>], scale: &LinearScale) -> Result<LinearOutput> {
    scale.validate()?;
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::Empty("no values to rescale"));
    }
    if let Some(v) = present.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("rescale input contains {v}")));
    }
    let x_min = present.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let LinearScale { a, b, order } = *scale;
    if x_min == x_max {
        let mid = a + (b - a) / 2.0;
        return Ok(LinearOutput {
            values: values.iter().map(|v| v.map(|_| mid)).collect(),
            x_min,
            x_max,
            constant_input: true,
        });
    }
    let u = ulp(a).max(ulp(b));
    let on_grid = (a / u).fract() == 0.0 && (b / u).fract() == 0.0;
    let span = b - a;
    let range = x_max - x_min;
    let map = |x: f64| {
        let t = (x - x_min) / range;
        let q = if t >= 1.0 {
            span
        } else if on_grid {
            ((t * span / u).round() * u).clamp(0.0, span)
        } else {
            t * span
        };
        match order {
            ScaleOrder::Regular if t >= 1.0 => b,
            ScaleOrder::Inverse if t >= 1.0 => a,
            ScaleOrder::Regular => a + q,
            ScaleOrder::Inverse => b - q,
        }
    };
    Ok(LinearOutput {
        values: values.iter().map(|v| v.map(map)).collect(),
        x_min,
        x_max,
        constant_input: false,
    })
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1) - x
    }
}

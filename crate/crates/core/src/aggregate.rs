//! Combining suitability columns: weighted sums and AHP weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random consistency index for n = 1..=15.
pub const RANDOM_INDEX: [f64; 15] = [
    0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49, 1.51, 1.54, 1.56, 1.57, 1.58,
];

pub const MAX_CRITERIA: usize = 15;
pub const RECIPROCITY_TOLERANCE: f64 = 1e-9;
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;
pub const CONVERGENCE_TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 10_000;
pub const CR_THRESHOLD: f64 = 0.1;
pub const MAX_RANDOM_DRAWS: usize = 100_000;

/// The 17 Saaty judgments in ascending order.
pub const SAATY_SCALE: [f64; 17] = [
    1.0 / 9.0,
    1.0 / 8.0,
    1.0 / 7.0,
    1.0 / 6.0,
    1.0 / 5.0,
    1.0 / 4.0,
    1.0 / 3.0,
    1.0 / 2.0,
    1.0,
    2.0,
    3.0,
    4.0,
    5.0,
    6.0,
    7.0,
    8.0,
    9.0,
];

/// `out[i] = sum_k weights[k] * columns[k][i]`, accumulated in criterion
/// order. Nodata in any column gives nodata for that row.
pub fn weighted_sum(columns: &[&[Option<f64>]], weights: &[f64], normalize: bool) -> Result<Vec<Option<f64>>> {
    if columns.is_empty() {
        return Err(Error::Empty("no criteria to combine"));
    }
    if columns.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: columns.len(),
            found: weights.len(),
        });
    }
    let rows = columns[0].len();
    if let Some(c) = columns.iter().find(|c| c.len() != rows) {
        return Err(Error::LengthMismatch {
            expected: rows,
            found: c.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::param(format!("weights must be non-negative, got {w}")));
    }
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = if normalize {
        if total <= 0.0 {
            return Err(Error::param("weights sum to zero"));
        }
        weights.iter().map(|w| w / total).collect()
    } else {
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::param(format!("weights sum to {total}, expected 1")));
        }
        weights.to_vec()
    };
    Ok((0..rows)
        .map(|i| {
            let mut acc = 0.0;
            for (col, w) in columns.iter().zip(&weights) {
                acc += w * col[i]?;
            }
            Some(acc)
        })
        .collect())
}

/// A positive reciprocal pairwise comparison matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ComparisonMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl ComparisonMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if !(2..=MAX_CRITERIA).contains(&n) {
            return Err(Error::Matrix(format!("size must be between 2 and {MAX_CRITERIA}, got {n}")));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Matrix(format!("row {i} has {} entries, expected {n}", r.len())));
        }
        let m = ComparisonMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        };
        m.validate()?;
        Ok(m)
    }

    /// The consistent matrix `a_ij = w_i / w_j`.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::param(format!("weights must be positive, got {x}")));
        }
        let rows = w
            .iter()
            .enumerate()
            .map(|(i, wi)| {
                w.iter()
                    .enumerate()
                    .map(|(j, wj)| if i == j { 1.0 } else { wi / wj })
                    .collect()
            })
            .collect();
        ComparisonMatrix::from_rows(rows)
    }

    /// Fills the upper triangle from `upper` (row-major) and mirrors it.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::LengthMismatch {
                expected: n * n.saturating_sub(1) / 2,
                found: upper.len(),
            });
        }
        let mut rows = vec![vec![1.0; n]; n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().expect("length checked");
                rows[i][j] = v;
                rows[j][i] = 1.0 / v;
            }
        }
        ComparisonMatrix::from_rows(rows)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::Matrix(format!("entry ({i}, {j}) = {a} is not positive")));
                }
            }
            if (self.get(i, i) - 1.0).abs() > RECIPROCITY_TOLERANCE {
                return Err(Error::Matrix(format!("diagonal entry {i} is {}, expected 1", self.get(i, i))));
            }
            for j in (i + 1)..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if (b - 1.0 / a).abs() > RECIPROCITY_TOLERANCE {
                    return Err(Error::Matrix(format!(
                        "entries ({i}, {j}) = {a} and ({j}, {i}) = {b} are not reciprocal"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Whether every off-diagonal entry is a Saaty judgment.
    pub fn is_saaty(&self) -> bool {
        self.entries
            .iter()
            .all(|a| SAATY_SCALE.iter().any(|s| (a - s).abs() <= RECIPROCITY_TOLERANCE))
    }

    /// `B[i][j] = A[p[i]][p[j]]`.
    pub fn permuted(&self, p: &[usize]) -> Result<Self> {
        let rows = p.iter().map(|&i| p.iter().map(|&j| self.get(i, j)).collect()).collect();
        ComparisonMatrix::from_rows(rows)
    }

    fn mul(&self, w: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(w).map(|(a, x)| a * x).sum();
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for ComparisonMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        ComparisonMatrix::from_rows(rows)
    }
}

impl From<ComparisonMatrix> for Vec<Vec<f64>> {
    fn from(m: ComparisonMatrix) -> Self {
        m.rows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityVector {
    pub weights: Vec<f64>,
    pub lambda_max: f64,
    pub cr: f64,
    pub iterations: usize,
}

impl PriorityVector {
    pub fn is_consistent(&self) -> bool {
        self.cr < CR_THRESHOLD
    }
}

/// Principal eigenvector of `m` by power iteration, normalized to unit sum.
///
/// `lambda_max` is the mean of `(A w)_i / w_i`. It cannot fall below `n` for
/// a positive reciprocal matrix, so rounding noise under `n` is clamped.
pub fn ahp_weights(m: &ComparisonMatrix) -> Result<PriorityVector> {
    let n = m.n;
    let mut w = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        m.mul(&w, &mut next);
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        residual = w.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut w, &mut next);
        if residual < CONVERGENCE_TOLERANCE {
            break;
        }
    }
    if residual >= CONVERGENCE_TOLERANCE {
        return Err(Error::NotConverged { iterations, residual });
    }
    // Summing a_ij w_j / w_i - 1 rather than forming the row sums keeps the
    // excess over n free of cancellation; it is exactly zero when every ratio
    // is exactly one.
    let mut excess = 0.0;
    for i in 0..n {
        for j in 0..n {
            excess += m.get(i, j) * w[j] / w[i] - 1.0;
        }
    }
    let excess = (excess / n as f64).max(0.0);
    let lambda_max = n as f64 + excess;
    let cr = if n <= 2 {
        0.0
    } else {
        excess / (n as f64 - 1.0) / RANDOM_INDEX[n - 1]
    };
    Ok(PriorityVector {
        weights: w,
        lambda_max,
        cr,
        iterations,
    })
}

pub fn consistency_ratio(m: &ComparisonMatrix) -> Result<f64> {
    Ok(ahp_weights(m)?.cr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomAhp {
    pub matrix: ComparisonMatrix,
    pub priority: PriorityVector,
    /// Matrices drawn, including the accepted one.
    pub draws: usize,
}

/// Draws Saaty-scale upper triangles uniformly until one has CR below the
/// threshold. The same `(n, seed)` always yields the same result.
pub fn random_ahp(n: usize, seed: u64) -> Result<RandomAhp> {
    if !(2..=MAX_CRITERIA).contains(&n) {
        return Err(Error::param(format!("n must be between 2 and {MAX_CRITERIA}, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut upper = vec![0.0; n * (n - 1) / 2];
    for draws in 1..=MAX_RANDOM_DRAWS {
        for u in upper.iter_mut() {
            *u = SAATY_SCALE[rng.random_range(0..SAATY_SCALE.len())];
        }
        let matrix = ComparisonMatrix::from_upper(n, &upper)?;
        match ahp_weights(&matrix) {
            Ok(priority) if priority.is_consistent() => {
                return Ok(RandomAhp {
                    matrix,
                    priority,
                    draws,
                })
            }
            Ok(_) | Err(Error::NotConverged { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::RejectionCap {
        n,
        draws: MAX_RANDOM_DRAWS,
    })
}

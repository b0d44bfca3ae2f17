//! Dynamic time warping with an optional Sakoe-Chiba band.
//!
//! Indices in [`WarpingPath`] are 1-based: the first pair is always `(1, 1)`
//! and the last is `(N, M)`. Cells outside the band hold `+inf` in the
//! accumulated matrix and are never taken as predecessors.

use std::fmt;

use thiserror::Error;

use crate::series::{minmax_values, SeriesError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandSpec {
    Unconstrained,
    /// Admits cell `(i, j)` iff `|i - j| <= radius`.
    SakoeChiba(usize),
}

impl BandSpec {
    #[inline]
    pub fn admits(self, i: usize, j: usize) -> bool {
        match self {
            BandSpec::Unconstrained => true,
            BandSpec::SakoeChiba(r) => i.abs_diff(j) <= r,
        }
    }

    pub fn radius(self) -> Option<usize> {
        match self {
            BandSpec::Unconstrained => None,
            BandSpec::SakoeChiba(r) => Some(r),
        }
    }

    /// Whether the end cell `(n, m)` can be reached at all.
    pub fn feasible(self, n: usize, m: usize) -> bool {
        self.admits(n, m)
    }
}

impl fmt::Display for BandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandSpec::Unconstrained => f.write_str("unconstrained"),
            BandSpec::SakoeChiba(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DtwError {
    #[error("empty series")]
    EmptySeries,
    #[error("band radius {radius} cannot reach cell ({n},{m}): |N-M| = {}", .n.abs_diff(*.m))]
    BandInfeasible { n: usize, m: usize, radius: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 0-based access.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// Ordered 1-based `(i, j)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpingPath(Vec<(usize, usize)>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathViolation {
    #[error("path is empty")]
    Empty,
    #[error("path does not start at (1,1)")]
    Start,
    #[error("path does not end at ({0},{1})")]
    End(usize, usize),
    #[error("illegal step at position {0}")]
    Step(usize),
    #[error("pair at position {0} lies outside the band")]
    Band(usize),
}

impl WarpingPath {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self(pairs)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Check boundary, monotonicity/continuity (one of the three unit steps)
    /// and band membership against an `n × m` grid.
    pub fn validate(&self, n: usize, m: usize, band: BandSpec) -> Result<(), PathViolation> {
        let p = &self.0;
        let first = *p.first().ok_or(PathViolation::Empty)?;
        if first != (1, 1) {
            return Err(PathViolation::Start);
        }
        if *p.last().expect("non-empty") != (n, m) {
            return Err(PathViolation::End(n, m));
        }
        for (k, w) in p.windows(2).enumerate() {
            let step = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            if !matches!(step, (1, 0) | (0, 1) | (1, 1)) {
                return Err(PathViolation::Step(k + 1));
            }
        }
        if let Some(k) = p.iter().position(|&(i, j)| !band.admits(i, j)) {
            return Err(PathViolation::Band(k));
        }
        Ok(())
    }

    /// Sum of `|x_i - y_j|` along the path.
    pub fn cost(&self, x: &[f64], y: &[f64]) -> f64 {
        self.0.iter().map(|&(i, j)| (x[i - 1] - y[j - 1]).abs()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtwResult {
    pub distance: f64,
    pub path: WarpingPath,
    pub band: BandSpec,
}

/// `|x_i - y_j|` for every pair.
pub fn local_cost_matrix(x: &[f64], y: &[f64]) -> Result<Matrix, DtwError> {
    if x.is_empty() || y.is_empty() {
        return Err(DtwError::EmptySeries);
    }
    let mut c = Matrix::filled(x.len(), y.len(), 0.0);
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            c.set(i, j, (xi - yj).abs());
        }
    }
    Ok(c)
}

/// Accumulated cost under `band`; out-of-band cells stay `+inf`.
pub fn accumulated_cost(cost: &Matrix, band: BandSpec) -> Matrix {
    let (n, m) = (cost.rows(), cost.cols());
    let mut acc = Matrix::filled(n, m, f64::INFINITY);
    for i in 0..n {
        let (lo, hi) = match band {
            BandSpec::Unconstrained => (0, m),
            BandSpec::SakoeChiba(r) => (i.saturating_sub(r), (i + r + 1).min(m)),
        };
        for j in lo..hi {
            let c = cost.get(i, j);
            let v = if i == 0 && j == 0 {
                c
            } else {
                let mut best = f64::INFINITY;
                if i > 0 {
                    best = best.min(acc.get(i - 1, j));
                }
                if j > 0 {
                    best = best.min(acc.get(i, j - 1));
                }
                if i > 0 && j > 0 {
                    best = best.min(acc.get(i - 1, j - 1));
                }
                c + best
            };
            acc.set(i, j, v);
        }
    }
    acc
}

/// Walk back from `(N, M)` to `(1, 1)` through minimal predecessors.
///
/// Ties prefer the diagonal, then `(i-1, j)`, then `(i, j-1)`.
pub fn backtrack(accumulated: &Matrix, band: BandSpec) -> WarpingPath {
    let (n, m) = (accumulated.rows(), accumulated.cols());
    assert!(n > 0 && m > 0, "empty accumulated matrix");
    assert!(
        accumulated.get(n - 1, m - 1).is_finite(),
        "end cell unreachable under {band:?}"
    );
    let (mut i, mut j) = (n - 1, m - 1);
    let mut pairs = vec![(n, m)];
    while (i, j) != (0, 0) {
        let read = |a: usize, b: usize| {
            if band.admits(a, b) {
                accumulated.get(a, b)
            } else {
                f64::INFINITY
            }
        };
        let diag = if i > 0 && j > 0 { read(i - 1, j - 1) } else { f64::INFINITY };
        let up = if i > 0 { read(i - 1, j) } else { f64::INFINITY };
        let left = if j > 0 { read(i, j - 1) } else { f64::INFINITY };
        if diag <= up && diag <= left && diag.is_finite() {
            i -= 1;
            j -= 1;
        } else if up <= left && up.is_finite() {
            i -= 1;
        } else {
            assert!(left.is_finite(), "no finite predecessor at ({},{})", i + 1, j + 1);
            j -= 1;
        }
        pairs.push((i + 1, j + 1));
    }
    pairs.reverse();
    WarpingPath(pairs)
}

/// DTW distance and optimal path. When `normalize_x` is set, `x` is min-max
/// scaled first; `y` is always used as given.
pub fn dtw(x: &[f64], y: &[f64], band: BandSpec, normalize_x: bool) -> Result<DtwResult, DtwError> {
    if x.is_empty() || y.is_empty() {
        return Err(DtwError::EmptySeries);
    }
    if let BandSpec::SakoeChiba(radius) = band {
        if !band.feasible(x.len(), y.len()) {
            return Err(DtwError::BandInfeasible {
                n: x.len(),
                m: y.len(),
                radius,
            });
        }
    }
    let scaled;
    let x = if normalize_x {
        scaled = minmax_values(x)?;
        &scaled[..]
    } else {
        x
    };
    let cost = local_cost_matrix(x, y)?;
    let acc = accumulated_cost(&cost, band);
    let distance = acc.get(x.len() - 1, y.len() - 1);
    let path = backtrack(&acc, band);
    Ok(DtwResult {
        distance,
        path,
        band,
    })
}

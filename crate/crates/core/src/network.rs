//! Rolling distance-correlation graphs over a keyword panel, and the
//! density / clustering time series derived from them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtw::Matrix;
use crate::series::{Date, DateIndexedSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("window of {0} days is too short (need at least 2)")]
    WindowTooShort(usize),
    #[error("{date} has only {available} days of history, window needs {window}")]
    InsufficientHistory {
        date: Date,
        available: i64,
        window: usize,
    },
    #[error("graph has {0} nodes, need at least 2")]
    TooFewNodes(usize),
    #[error("panel: {0}")]
    Panel(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Keyword series sharing one date range.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordPanel {
    keywords: Vec<String>,
    series: Vec<DateIndexedSeries>,
}

impl KeywordPanel {
    pub fn new(entries: Vec<(String, DateIndexedSeries)>) -> Result<Self, NetworkError> {
        let first = entries
            .first()
            .ok_or_else(|| NetworkError::Panel("no keywords".into()))?;
        let (start, len) = (first.1.start(), first.1.len());
        let mut seen = BTreeSet::new();
        for (kw, s) in &entries {
            if !seen.insert(kw.as_str()) {
                return Err(NetworkError::Panel(format!("duplicate keyword {kw:?}")));
            }
            if s.start() != start || s.len() != len {
                return Err(NetworkError::Panel(format!(
                    "keyword {kw:?} covers {}..{}, expected {}..{}",
                    s.start(),
                    s.end(),
                    start,
                    first.1.end()
                )));
            }
        }
        let (keywords, series) = entries.into_iter().unzip();
        Ok(Self { keywords, series })
    }

    /// Trim every member to the dates all of them share.
    pub fn intersect(entries: Vec<(String, DateIndexedSeries)>) -> Result<Self, NetworkError> {
        let from = entries.iter().map(|(_, s)| s.start()).max();
        let to = entries.iter().map(|(_, s)| s.end()).min();
        let (Some(from), Some(to)) = (from, to) else {
            return Err(NetworkError::Panel("no keywords".into()));
        };
        let trimmed = entries
            .into_iter()
            .map(|(k, s)| Ok((k, s.slice(from, to)?)))
            .collect::<Result<Vec<_>, SeriesError>>()?;
        Self::new(trimmed)
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn series(&self) -> &[DateIndexedSeries] {
        &self.series
    }

    pub fn start(&self) -> Date {
        self.series[0].start()
    }

    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_keywords(&self) -> usize {
        self.keywords.len()
    }
}

/// Undirected simple graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdedGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl ThresholdedGraph {
    /// Self-loops are dropped; each pair is stored once as `(min, max)`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| {
                assert!(a < n && b < n, "edge ({a},{b}) out of range for n = {n}");
                (a.min(b), a.max(b))
            })
            .collect();
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.n]; self.n];
        for &(a, b) in &self.edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        adj
    }
}

fn double_centered(v: &[f64]) -> Vec<f64> {
    let w = v.len();
    let mut d = vec![0.0; w * w];
    for k in 0..w {
        for l in 0..w {
            d[k * w + l] = (v[k] - v[l]).abs();
        }
    }
    let row_mean: Vec<f64> = d.chunks(w).map(|r| r.iter().sum::<f64>() / w as f64).collect();
    // distance matrices are symmetric, so column means equal row means
    let grand = row_mean.iter().sum::<f64>() / w as f64;
    for k in 0..w {
        for l in 0..w {
            d[k * w + l] += grand - row_mean[k] - row_mean[l];
        }
    }
    d
}

fn mean_product(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// Sample distance correlation (V-statistic form), in `[0, 1]`.
///
/// Returns 0 when either input is constant.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> Result<f64, NetworkError> {
    if x.len() != y.len() {
        return Err(NetworkError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(NetworkError::WindowTooShort(x.len()));
    }
    let a = double_centered(x);
    let b = double_centered(y);
    Ok(dcor_from_centered(&a, &b))
}

fn dcor_from_centered(a: &[f64], b: &[f64]) -> f64 {
    let dvar_x = mean_product(a, a);
    let dvar_y = mean_product(b, b);
    if dvar_x <= 0.0 || dvar_y <= 0.0 {
        return 0.0;
    }
    let dcov2 = mean_product(a, b).max(0.0);
    (dcov2 / (dvar_x * dvar_y).sqrt()).sqrt().clamp(0.0, 1.0)
}

fn check_window(panel: &KeywordPanel, t: Date, window: usize) -> Result<usize, NetworkError> {
    if window < 2 {
        return Err(NetworkError::WindowTooShort(window));
    }
    let available = t.days_since(panel.start()) + 1;
    if available < window as i64 || t > panel.series()[0].end() {
        return Err(NetworkError::InsufficientHistory {
            date: t,
            available,
            window,
        });
    }
    Ok(available as usize - window)
}

/// Pairwise distance correlation over the `window` days ending at `t`.
pub fn correlation_matrix_at(
    panel: &KeywordPanel,
    t: Date,
    window: usize,
) -> Result<Matrix, NetworkError> {
    let from = check_window(panel, t, window)?;
    let centered: Vec<Vec<f64>> = panel
        .series()
        .iter()
        .map(|s| double_centered(&s.values()[from..from + window]))
        .collect();
    let n = panel.n_keywords();
    let mut m = Matrix::filled(n, n, 1.0);
    for i in 0..n {
        for j in i + 1..n {
            let v = dcor_from_centered(&centered[i], &centered[j]);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(m)
}

/// Edge `{i, j}` iff `matrix[i][j] >= theta`.
pub fn threshold_graph(matrix: &Matrix, theta: f64) -> ThresholdedGraph {
    let n = matrix.rows();
    let edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| matrix.get(i, j) >= theta);
    ThresholdedGraph::new(n, edges)
}

/// `2E / (n(n-1))`.
pub fn network_density(g: &ThresholdedGraph) -> Result<f64, NetworkError> {
    if g.n() < 2 {
        return Err(NetworkError::TooFewNodes(g.n()));
    }
    let n = g.n() as f64;
    Ok(2.0 * g.edge_count() as f64 / (n * (n - 1.0)))
}

/// Global transitivity: `3 × triangles / connected triplets`, or 0 when the
/// graph has no connected triplet.
pub fn clustering_coefficient(g: &ThresholdedGraph) -> f64 {
    let adj = g.adjacency();
    let degree: Vec<usize> = adj.iter().map(|r| r.iter().filter(|&&e| e).count()).collect();
    let triplets: usize = degree.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
    if triplets == 0 {
        return 0.0;
    }
    let mut triangles = 0usize;
    for &(a, b) in g.edges() {
        // count each triangle once via its smallest-index closing vertex c > b
        triangles += (b + 1..g.n()).filter(|&c| adj[a][c] && adj[b][c]).count();
    }
    3.0 * triangles as f64 / triplets as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Density,
    Clustering,
}

impl MetricKind {
    pub const ALL: [MetricKind; 2] = [MetricKind::Density, MetricKind::Clustering];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Density => "density",
            MetricKind::Clustering => "clustering",
        }
    }

    pub fn of(self, g: &ThresholdedGraph) -> Result<f64, NetworkError> {
        match self {
            MetricKind::Density => network_density(g),
            MetricKind::Clustering => Ok(clustering_coefficient(g)),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "density" => Ok(MetricKind::Density),
            "clustering" => Ok(MetricKind::Clustering),
            other => Err(format!("unknown metric {other:?} (expected density|clustering)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMetricSeries {
    pub kind: MetricKind,
    pub series: DateIndexedSeries,
}

/// Correlation matrices for every computable day, oldest first.
pub fn rolling_matrices(panel: &KeywordPanel, window: usize) -> Result<Vec<Matrix>, NetworkError> {
    let first = panel.start().add_days(window as i64 - 1);
    check_window(panel, first, window)?;
    let days = panel.len() - window + 1;
    (0..days)
        .into_par_iter()
        .map(|k| correlation_matrix_at(panel, first.add_days(k as i64), window))
        .collect()
}

/// Metric series from precomputed [`rolling_matrices`].
pub fn metric_series_from_matrices(
    matrices: &[Matrix],
    first_date: Date,
    kind: MetricKind,
    theta: f64,
) -> Result<NetworkMetricSeries, NetworkError> {
    let values = matrices
        .iter()
        .map(|m| kind.of(&threshold_graph(m, theta)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NetworkMetricSeries {
        kind,
        series: DateIndexedSeries::new(first_date, values)?,
    })
}

/// One metric value per day from `start + window - 1` onward.
pub fn metric_series(
    panel: &KeywordPanel,
    kind: MetricKind,
    theta: f64,
    window: usize,
) -> Result<NetworkMetricSeries, NetworkError> {
    let matrices = rolling_matrices(panel, window)?;
    metric_series_from_matrices(&matrices, panel.start().add_days(window as i64 - 1), kind, theta)
}

//! Independent oracles and deterministic synthetic data.
//!
//! Nothing in here shares code with the DP engine or the graph metrics: the
//! DTW oracle enumerates every warping path and the graph oracle inspects
//! every vertex triple. Both are exponential/cubic and capped at 8 nodes or
//! 8 points per side.

use thiserror::Error;

use crate::dtw::BandSpec;
use crate::network::ThresholdedGraph;
use crate::series::{Date, DateIndexedSeries};

pub const ORACLE_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TestkitError {
    #[error("instance too large for exhaustive enumeration ({0} > {ORACLE_MAX})")]
    TooLarge(usize),
    #[error("need at least 2 nodes")]
    TooFewNodes,
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

/// Minimum path cost over all valid warping paths admitted by `band`, or
/// `None` when no path exists.
pub fn brute_force_dtw(x: &[f64], y: &[f64], band: BandSpec) -> Result<Option<f64>, TestkitError> {
    let (n, m) = (x.len(), y.len());
    if n > ORACLE_MAX || m > ORACLE_MAX {
        return Err(TestkitError::TooLarge(n.max(m)));
    }
    if n == 0 || m == 0 {
        return Ok(None);
    }

    fn walk(x: &[f64], y: &[f64], band: BandSpec, i: usize, j: usize, acc: f64, best: &mut Option<f64>) {
        // 1-based (i, j)
        if !band.admits(i, j) {
            return;
        }
        let acc = acc + (x[i - 1] - y[j - 1]).abs();
        if (i, j) == (x.len(), y.len()) {
            *best = Some(best.map_or(acc, |b: f64| b.min(acc)));
            return;
        }
        if i < x.len() && j < y.len() {
            walk(x, y, band, i + 1, j + 1, acc, best);
        }
        if i < x.len() {
            walk(x, y, band, i + 1, j, acc, best);
        }
        if j < y.len() {
            walk(x, y, band, i, j + 1, acc, best);
        }
    }

    let mut best = None;
    walk(x, y, band, 1, 1, 0.0, &mut best);
    Ok(best)
}

/// Every valid path through the grid, 1-based. Used to cross-check the
/// optimum structurally as well as by value.
pub fn enumerate_paths(n: usize, m: usize, band: BandSpec) -> Result<Vec<Vec<(usize, usize)>>, TestkitError> {
    if n > ORACLE_MAX || m > ORACLE_MAX {
        return Err(TestkitError::TooLarge(n.max(m)));
    }
    let mut out = Vec::new();
    let mut stack = vec![vec![(1usize, 1usize)]];
    while let Some(path) = stack.pop() {
        let (i, j) = *path.last().expect("non-empty");
        if !band.admits(i, j) {
            continue;
        }
        if (i, j) == (n, m) {
            out.push(path);
            continue;
        }
        for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
            if i + di <= n && j + dj <= m {
                let mut next = path.clone();
                next.push((i + di, j + dj));
                stack.push(next);
            }
        }
    }
    Ok(out)
}

/// `(density, transitivity)` by direct enumeration of pairs and triples.
pub fn graph_metric_oracle(g: &ThresholdedGraph) -> Result<(f64, f64), TestkitError> {
    let n = g.n();
    if n > ORACLE_MAX {
        return Err(TestkitError::TooLarge(n));
    }
    if n < 2 {
        return Err(TestkitError::TooFewNodes);
    }
    let mut edges = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            edges += usize::from(g.has_edge(a, b));
        }
    }
    let pairs = n * (n - 1) / 2;

    let mut closed = 0usize;
    let mut connected = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let ab = g.has_edge(a, b);
                let bc = g.has_edge(b, c);
                let ac = g.has_edge(a, c);
                // one connected triplet per vertex adjacent to the other two
                connected += usize::from(ab && ac) + usize::from(ab && bc) + usize::from(ac && bc);
                if ab && bc && ac {
                    closed += 1;
                }
            }
        }
    }
    let transitivity = if connected == 0 {
        0.0
    } else {
        3.0 * closed as f64 / connected as f64
    };
    Ok((edges as f64 / pairs as f64, transitivity))
}

/// 64-bit LCG: `state <- state * 6364136223846793005 + 1442695040888963407`.
/// Each draw advances the state once and returns its top 53 bits in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        self.state
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Start date used for all synthetic series.
pub fn synth_start() -> Date {
    Date::from_ymd(2020, 3, 16).expect("valid date")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticScenario {
    pub length: usize,
    pub lag: usize,
    pub noise_amplitude: f64,
    pub seed: u64,
}

impl SyntheticScenario {
    pub fn validate(&self) -> Result<(), TestkitError> {
        if self.length < 2 {
            return Err(TestkitError::Scenario(format!("length {} < 2", self.length)));
        }
        if self.lag >= self.length {
            return Err(TestkitError::Scenario(format!(
                "lag {} must be smaller than length {}",
                self.lag, self.length
            )));
        }
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return Err(TestkitError::Scenario(format!(
                "noise amplitude {} must be finite and >= 0",
                self.noise_amplitude
            )));
        }
        Ok(())
    }

    /// Gaussian bump peaking at 40% of the span, scaled to 1000 cases.
    fn bump(&self) -> Vec<f64> {
        let centre = 0.4 * self.length as f64;
        let width = (self.length as f64 / 8.0).max(1.0);
        (0..self.length)
            .map(|t| {
                let z = (t as f64 - centre) / width;
                1000.0 * (-0.5 * z * z).exp()
            })
            .collect()
    }
}

fn shifted(values: &[f64], lag: usize) -> Vec<f64> {
    (0..values.len()).map(|t| values[t.saturating_sub(lag)]).collect()
}

fn unit_scale(values: &[f64]) -> Vec<f64> {
    crate::series::minmax_values(values).unwrap_or_else(|_| vec![0.0; values.len()])
}

/// A case-like bump and a metric-like copy of it delayed by `lag` days,
/// scaled into `[0, 1]`, with uniform noise in `[-a, a]` clipped to `[0, 1]`.
pub fn synth_pair(sc: &SyntheticScenario) -> Result<(DateIndexedSeries, DateIndexedSeries), TestkitError> {
    sc.validate()?;
    let case = sc.bump();
    let mut rng = Lcg::new(sc.seed);
    let metric: Vec<f64> = unit_scale(&shifted(&case, sc.lag))
        .into_iter()
        .map(|v| (v + sc.noise_amplitude * (2.0 * rng.next_f64() - 1.0)).clamp(0.0, 1.0))
        .collect();
    let start = synth_start();
    Ok((
        DateIndexedSeries::new(start, case).expect("finite"),
        DateIndexedSeries::new(start, metric).expect("finite"),
    ))
}

/// A keyword panel in RSV units (`[0, 100]`) whose members mix the delayed
/// bump with independent noise in varying proportions, so that correlation
/// graphs change over time.
pub fn synth_panel(sc: &SyntheticScenario, n_keywords: usize) -> Result<Vec<(String, DateIndexedSeries)>, TestkitError> {
    sc.validate()?;
    if n_keywords < 2 {
        return Err(TestkitError::TooFewNodes);
    }
    let bump = unit_scale(&sc.bump());
    let mut out = Vec::with_capacity(n_keywords);
    for k in 0..n_keywords {
        let weight = k as f64 / (n_keywords - 1) as f64;
        let signal = shifted(&bump, sc.lag + k % 3);
        let mut rng = Lcg::new(sc.seed.wrapping_add(k as u64 + 1));
        let values = signal
            .iter()
            .map(|&s| {
                let noise = rng.next_f64();
                let jitter = sc.noise_amplitude * (2.0 * rng.next_f64() - 1.0);
                (100.0 * (weight * s + (1.0 - weight) * noise + jitter)).clamp(0.0, 100.0)
            })
            .collect();
        out.push((
            format!("kw{k:02}"),
            DateIndexedSeries::new(synth_start(), values).expect("finite"),
        ));
    }
    Ok(out)
}

/// Active-case companion to a synthetic case curve: every case is removed
/// `delay` days after confirmation.
pub fn synth_active(case: &DateIndexedSeries, delay: usize) -> DateIndexedSeries {
    let v = case.values();
    let mut active = Vec::with_capacity(v.len());
    let mut prev = 0.0;
    for t in 0..v.len() {
        let removed = if t >= delay { v[t - delay] } else { 0.0 };
        prev = (prev + v[t] - removed).max(0.0);
        active.push(prev);
    }
    case.with_values(active).expect("finite")
}

//! Parameter-lattice sweep, per-parameter Kruskal-Wallis tests and the
//! optimal configuration per (metric, case type).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtw::{dtw, BandSpec, DtwError, DtwResult, Matrix};
use crate::network::{metric_series_from_matrices, rolling_matrices, KeywordPanel, MetricKind, NetworkError};
use crate::series::{align_ranges, fmt_sig, minmax_normalize, DateIndexedSeries, SeriesError};
use crate::stats::{kruskal_wallis, KruskalWallis};
use crate::trends::Preprocess;

pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseType {
    Confirmed,
    Active,
}

impl CaseType {
    pub const ALL: [CaseType; 2] = [CaseType::Confirmed, CaseType::Active];

    pub fn name(self) -> &'static str {
        match self {
            CaseType::Confirmed => "confirmed",
            CaseType::Active => "active",
        }
    }
}

impl fmt::Display for CaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "confirmed" => Ok(CaseType::Confirmed),
            "active" => Ok(CaseType::Active),
            other => Err(format!("unknown case type {other:?} (expected confirmed|active)")),
        }
    }
}

/// One point of the parameter lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub metric: MetricKind,
    pub preprocess: Preprocess,
    pub threshold: f64,
    pub window: usize,
    pub case_type: CaseType,
    pub radius: usize,
}

impl SweepConfig {
    /// Lexicographic order over the fields as declared, thresholds compared
    /// numerically.
    pub fn cmp_lex(&self, other: &Self) -> std::cmp::Ordering {
        self.metric
            .cmp(&other.metric)
            .then(self.preprocess.cmp(&other.preprocess))
            .then(self.threshold.total_cmp(&other.threshold))
            .then(self.window.cmp(&other.window))
            .then(self.case_type.cmp(&other.case_type))
            .then(self.radius.cmp(&other.radius))
    }
}

/// Value domains for each swept parameter. Missing keys in a config file
/// fall back to the full default lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterDomains {
    pub metric: Vec<MetricKind>,
    pub preprocess: Vec<Preprocess>,
    pub threshold: Vec<f64>,
    pub window: Vec<usize>,
    pub case_type: Vec<CaseType>,
    pub radius: Vec<usize>,
}

impl Default for ParameterDomains {
    fn default() -> Self {
        Self {
            metric: MetricKind::ALL.to_vec(),
            preprocess: Preprocess::ALL.to_vec(),
            threshold: vec![0.4, 0.5, 0.6, 0.8],
            window: vec![15, 30],
            case_type: CaseType::ALL.to_vec(),
            radius: vec![7, 15, 20, 30, 50],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("parameter {0} has an empty domain")]
    EmptyDomain(&'static str),
    #[error("threshold {0} outside (0, 1]")]
    BadThreshold(f64),
    #[error("window {0} must be at least 2")]
    BadWindow(usize),
    #[error("no panel for preprocessing {0}")]
    MissingPanel(Preprocess),
    #[error("no case series for {0}")]
    MissingCases(CaseType),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Dtw(#[from] DtwError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl SweepError {
    /// Short machine-readable tag used in the `status` column.
    pub fn status(&self) -> &'static str {
        match self {
            SweepError::Dtw(DtwError::BandInfeasible { .. }) => "band_infeasible",
            SweepError::Dtw(DtwError::Series(SeriesError::DegenerateRange(_)))
            | SweepError::Series(SeriesError::DegenerateRange(_)) => "degenerate_range",
            SweepError::Series(SeriesError::NoOverlap) => "no_overlap",
            SweepError::Network(NetworkError::InsufficientHistory { .. }) => "insufficient_history",
            SweepError::MissingPanel(_) | SweepError::MissingCases(_) => "missing_input",
            _ => "error",
        }
    }
}

impl ParameterDomains {
    pub fn validate(&self) -> Result<(), SweepError> {
        let sizes = [
            ("metric", self.metric.len()),
            ("preprocess", self.preprocess.len()),
            ("threshold", self.threshold.len()),
            ("window", self.window.len()),
            ("case_type", self.case_type.len()),
            ("radius", self.radius.len()),
        ];
        if let Some((name, _)) = sizes.iter().find(|(_, n)| *n == 0) {
            return Err(SweepError::EmptyDomain(name));
        }
        if let Some(&t) = self.threshold.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(SweepError::BadThreshold(t));
        }
        if let Some(&w) = self.window.iter().find(|w| **w < 2) {
            return Err(SweepError::BadWindow(w));
        }
        Ok(())
    }

    /// Cartesian product with `metric` varying slowest and `radius` fastest,
    /// each domain in its listed order. Repeated values are dropped.
    pub fn enumerate(&self) -> Vec<SweepConfig> {
        fn dedup<T: PartialEq + Copy>(v: &[T]) -> Vec<T> {
            let mut out: Vec<T> = Vec::with_capacity(v.len());
            for &x in v {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
            out
        }
        let (metric, preprocess, threshold) = (dedup(&self.metric), dedup(&self.preprocess), dedup(&self.threshold));
        let (window, case_type, radius) = (dedup(&self.window), dedup(&self.case_type), dedup(&self.radius));
        let mut out = Vec::new();
        for &m in &metric {
            for &p in &preprocess {
                for &t in &threshold {
                    for &w in &window {
                        for &c in &case_type {
                            for &r in &radius {
                                out.push(SweepConfig {
                                    metric: m,
                                    preprocess: p,
                                    threshold: t,
                                    window: w,
                                    case_type: c,
                                    radius: r,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// The full default lattice (320 configurations).
pub fn enumerate_configs() -> Vec<SweepConfig> {
    ParameterDomains::default().enumerate()
}

/// Panels per preprocessing method and raw case series per case type.
#[derive(Debug, Clone, Default)]
pub struct SweepInputs {
    pub panels: BTreeMap<Preprocess, KeywordPanel>,
    pub cases: BTreeMap<CaseType, DateIndexedSeries>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub outcome: Result<Score, SweepError>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub dtw_score: f64,
    pub path_length: usize,
}

impl SweepResult {
    pub fn score(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|s| s.dtw_score)
    }
}

/// Metric series for one config.
pub fn config_metric_series(inputs: &SweepInputs, config: &SweepConfig) -> Result<DateIndexedSeries, SweepError> {
    let panel = inputs
        .panels
        .get(&config.preprocess)
        .ok_or(SweepError::MissingPanel(config.preprocess))?;
    let matrices = rolling_matrices(panel, config.window)?;
    metric_from(&matrices, panel, config)
}

fn metric_from(matrices: &[Matrix], panel: &KeywordPanel, config: &SweepConfig) -> Result<DateIndexedSeries, SweepError> {
    let first = panel.start().add_days(config.window as i64 - 1);
    Ok(metric_series_from_matrices(matrices, first, config.metric, config.threshold)?.series)
}

fn normalized_cases(inputs: &SweepInputs, case_type: CaseType) -> Result<DateIndexedSeries, SweepError> {
    let raw = inputs.cases.get(&case_type).ok_or(SweepError::MissingCases(case_type))?;
    Ok(minmax_normalize(raw)?)
}

fn align_and_warp(
    cases_norm: &DateIndexedSeries,
    metric: &DateIndexedSeries,
    radius: usize,
) -> Result<(DateIndexedSeries, DateIndexedSeries, DtwResult), SweepError> {
    let (x, y) = align_ranges(cases_norm, metric)?;
    let r = dtw(x.values(), y.values(), BandSpec::SakoeChiba(radius), false)?;
    Ok((x, y, r))
}

/// Evaluate a single configuration from scratch: build the metric series,
/// min-max normalize the case series over its full range, align dates and
/// run banded DTW with the case series as `x`.
pub fn evaluate_config(inputs: &SweepInputs, config: &SweepConfig) -> Result<DtwResult, SweepError> {
    let metric = config_metric_series(inputs, config)?;
    let cases = normalized_cases(inputs, config.case_type)?;
    Ok(align_and_warp(&cases, &metric, config.radius)?.2)
}

/// Evaluate every configuration. Results come back in `configs` order; a
/// failing configuration yields an error entry and does not stop the sweep.
///
/// `threads` caps parallelism (`None` = rayon default). The output does not
/// depend on the thread count.
pub fn run_sweep(inputs: &SweepInputs, configs: &[SweepConfig], threads: Option<usize>) -> Vec<SweepResult> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().expect("thread pool");
    pool.install(|| sweep_in_pool(inputs, configs))
}

type MatrixKey = (Preprocess, usize);
type MetricKey = (Preprocess, usize, MetricKind, u64);

fn sweep_in_pool(inputs: &SweepInputs, configs: &[SweepConfig]) -> Vec<SweepResult> {
    let mut matrix_keys: Vec<MatrixKey> = configs.iter().map(|c| (c.preprocess, c.window)).collect();
    matrix_keys.sort();
    matrix_keys.dedup();
    let matrices: BTreeMap<MatrixKey, Result<Vec<Matrix>, SweepError>> = matrix_keys
        .into_par_iter()
        .map(|key| {
            let m = inputs
                .panels
                .get(&key.0)
                .ok_or(SweepError::MissingPanel(key.0))
                .and_then(|p| Ok(rolling_matrices(p, key.1)?));
            (key, m)
        })
        .collect();

    let mut metric_keys: Vec<(MetricKey, SweepConfig)> = configs
        .iter()
        .map(|c| ((c.preprocess, c.window, c.metric, c.threshold.to_bits()), *c))
        .collect();
    metric_keys.sort_by_key(|k| k.0);
    metric_keys.dedup_by(|a, b| a.0 == b.0);
    let metrics: BTreeMap<MetricKey, Result<DateIndexedSeries, SweepError>> = metric_keys
        .into_par_iter()
        .map(|(key, cfg)| {
            let series = match &matrices[&(key.0, key.1)] {
                Ok(ms) => metric_from(ms, &inputs.panels[&key.0], &cfg),
                Err(e) => Err(e.clone()),
            };
            (key, series)
        })
        .collect();

    let cases: BTreeMap<CaseType, Result<DateIndexedSeries, SweepError>> = CaseType::ALL
        .iter()
        .map(|&c| (c, normalized_cases(inputs, c)))
        .collect();

    configs
        .par_iter()
        .map(|config| {
            let key = (config.preprocess, config.window, config.metric, config.threshold.to_bits());
            let outcome = match (&metrics[&key], &cases[&config.case_type]) {
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                (Ok(metric), Ok(case)) => align_and_warp(case, metric, config.radius).map(|(_, _, r)| Score {
                    dtw_score: r.distance,
                    path_length: r.path.len(),
                }),
            };
            SweepResult {
                config: *config,
                outcome,
            }
        })
        .collect()
}

/// Swept parameters, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parameter {
    Metric,
    Preprocess,
    Threshold,
    Window,
    CaseType,
    Radius,
}

impl Parameter {
    pub const ALL: [Parameter; 6] = [
        Parameter::Metric,
        Parameter::Preprocess,
        Parameter::Threshold,
        Parameter::Window,
        Parameter::CaseType,
        Parameter::Radius,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Metric => "metric",
            Parameter::Preprocess => "preprocess",
            Parameter::Threshold => "threshold",
            Parameter::Window => "window",
            Parameter::CaseType => "case_type",
            Parameter::Radius => "radius",
        }
    }

    pub fn level(self, c: &SweepConfig) -> String {
        match self {
            Parameter::Metric => c.metric.name().to_string(),
            Parameter::Preprocess => c.preprocess.name().to_string(),
            Parameter::Threshold => fmt_sig(c.threshold),
            Parameter::Window => c.window.to_string(),
            Parameter::CaseType => c.case_type.name().to_string(),
            Parameter::Radius => c.radius.to_string(),
        }
    }
}

impl FromStr for Parameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown parameter {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: String,
    pub mean_dtw: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterReport {
    pub parameter: &'static str,
    pub levels: Vec<LevelSummary>,
    /// `None` when fewer than two levels (or too few observations) remain.
    pub h: Option<f64>,
    pub p: Option<f64>,
    pub significant: bool,
}

/// Per-level mean score and the Kruskal-Wallis test across levels.
/// Failed configurations are excluded. Levels appear in order of first
/// occurrence in `results`.
pub fn summarize_parameter(results: &[SweepResult], parameter: Parameter) -> ParameterReport {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        if let Some(s) = r.score() {
            let level = parameter.level(&r.config);
            groups
                .entry(level.clone())
                .or_insert_with(|| {
                    order.push(level);
                    Vec::new()
                })
                .push(s);
        }
    }
    let ordered: Vec<(String, Vec<f64>)> = order
        .into_iter()
        .map(|l| {
            let g = groups.remove(&l).expect("grouped");
            (l, g)
        })
        .collect();
    let levels = ordered
        .iter()
        .map(|(l, g)| LevelSummary {
            level: l.clone(),
            mean_dtw: g.iter().sum::<f64>() / g.len() as f64,
            count: g.len(),
        })
        .collect();
    let kw: Option<KruskalWallis> =
        kruskal_wallis(&ordered.into_iter().map(|(_, g)| g).collect::<Vec<_>>()).ok();
    ParameterReport {
        parameter: parameter.name(),
        levels,
        h: kw.map(|k| k.h),
        p: kw.map(|k| k.p),
        significant: kw.is_some_and(|k| k.p < ALPHA),
    }
}

/// Reports for all six parameters.
pub fn parameter_reports(results: &[SweepResult]) -> Vec<ParameterReport> {
    Parameter::ALL.iter().map(|&p| summarize_parameter(results, p)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalRow {
    pub metric: MetricKind,
    pub case_type: CaseType,
    pub config: SweepConfig,
    pub score: Score,
}

/// Minimum-score configuration for each (metric, case type) present among
/// the successful results; ties go to the lexicographically first config.
pub fn optimal_configs(results: &[SweepResult]) -> Vec<OptimalRow> {
    let mut best: BTreeMap<(MetricKind, CaseType), (SweepConfig, Score)> = BTreeMap::new();
    for r in results {
        let Ok(score) = r.outcome else { continue };
        let key = (r.config.metric, r.config.case_type);
        let replace = match best.get(&key) {
            None => true,
            Some((cfg, s)) => {
                score.dtw_score < s.dtw_score
                    || (score.dtw_score == s.dtw_score && r.config.cmp_lex(cfg).is_lt())
            }
        };
        if replace {
            best.insert(key, (r.config, score));
        }
    }
    best.into_iter()
        .map(|((metric, case_type), (config, score))| OptimalRow {
            metric,
            case_type,
            config,
            score,
        })
        .collect()
}

/// `metric,preprocess,threshold,window,case_type,radius,dtw_score,status`
pub fn sweep_csv(results: &[SweepResult]) -> String {
    let mut out = String::from("metric,preprocess,threshold,window,case_type,radius,dtw_score,status\n");
    for r in results {
        let c = &r.config;
        let (score, status) = match &r.outcome {
            Ok(s) => (fmt_sig(s.dtw_score), "ok"),
            Err(e) => (String::new(), e.status()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.metric,
            c.preprocess,
            fmt_sig(c.threshold),
            c.window,
            c.case_type,
            c.radius,
            score,
            status
        ));
    }
    out
}

/// One row per (metric, case type).
pub fn optimal_csv(rows: &[OptimalRow]) -> String {
    let mut out = String::from("metric,case_type,preprocess,threshold,window,radius,dtw_score,path_length\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.metric,
            r.case_type,
            r.config.preprocess,
            fmt_sig(r.config.threshold),
            r.config.window,
            r.config.radius,
            fmt_sig(r.score.dtw_score),
            r.score.path_length
        ));
    }
    out
}

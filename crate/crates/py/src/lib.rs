//! Python bindings for `warpwatch-core`.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use warpwatch_core::cases::{active_cases as core_active, CaseKind, CaseSeries};
use warpwatch_core::network::{self, KeywordPanel, ThresholdedGraph};
use warpwatch_core::series::{minmax_normalize as core_minmax, Date, DateIndexedSeries};
use warpwatch_core::stats;
use warpwatch_core::sweep::{self as core_sweep, CaseType, ParameterDomains, SweepInputs};
use warpwatch_core::testkit::{self, SyntheticScenario};
use warpwatch_core::{BandSpec, DtwError, MetricKind, Preprocess};

create_exception!(warpwatch, BandInfeasibleError, PyException);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn band(radius: Option<usize>) -> BandSpec {
    radius.map_or(BandSpec::Unconstrained, BandSpec::SakoeChiba)
}

fn parse_date(s: &str) -> PyResult<Date> {
    s.parse().map_err(value_err)
}

fn series(start: Date, values: Vec<f64>) -> PyResult<DateIndexedSeries> {
    DateIndexedSeries::new(start, values).map_err(value_err)
}

fn panel(start: Date, keywords: BTreeMap<String, Vec<f64>>) -> PyResult<KeywordPanel> {
    let entries = keywords
        .into_iter()
        .map(|(k, v)| Ok((k, series(start, v)?)))
        .collect::<PyResult<Vec<_>>>()?;
    KeywordPanel::new(entries).map_err(value_err)
}

/// Result of a DTW run. Path indices are 1-based.
#[pyclass(frozen, get_all)]
struct DtwResult {
    distance: f64,
    path: Vec<(usize, usize)>,
    radius: Option<usize>,
}

#[pymethods]
impl DtwResult {
    fn __repr__(&self) -> String {
        let r = self.radius.map_or("None".to_string(), |r| r.to_string());
        format!("DtwResult(distance={}, path_length={}, radius={r})", self.distance, self.path.len())
    }
}

/// DTW between `x` and `y` with an optional Sakoe-Chiba radius.
#[pyfunction]
#[pyo3(signature = (x, y, radius=None, normalize_x=false))]
fn dtw(x: Vec<f64>, y: Vec<f64>, radius: Option<usize>, normalize_x: bool) -> PyResult<DtwResult> {
    match warpwatch_core::dtw(&x, &y, band(radius), normalize_x) {
        Ok(r) => Ok(DtwResult {
            distance: r.distance,
            path: r.path.pairs().to_vec(),
            radius,
        }),
        Err(e @ DtwError::BandInfeasible { .. }) => Err(BandInfeasibleError::new_err(e.to_string())),
        Err(e) => Err(value_err(e)),
    }
}

/// Exhaustive DTW over every warping path; `None` if the band admits none.
#[pyfunction]
#[pyo3(signature = (x, y, radius=None))]
fn brute_force_dtw(x: Vec<f64>, y: Vec<f64>, radius: Option<usize>) -> PyResult<Option<f64>> {
    testkit::brute_force_dtw(&x, &y, band(radius)).map_err(value_err)
}

#[pyfunction]
fn minmax_normalize(values: Vec<f64>) -> PyResult<Vec<f64>> {
    let s = series(testkit::synth_start(), values)?;
    Ok(core_minmax(&s).map_err(value_err)?.into_values())
}

#[pyfunction]
fn distance_correlation(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    network::distance_correlation(&x, &y).map_err(value_err)
}

/// `(density, clustering)` of an undirected graph on `n` nodes.
#[pyfunction]
fn graph_metrics(n: usize, edges: Vec<(usize, usize)>) -> PyResult<(f64, f64)> {
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(value_err(format!("edge ({a}, {b}) out of range for {n} nodes")));
    }
    let g = ThresholdedGraph::new(n, edges);
    Ok((network::network_density(&g).map_err(value_err)?, network::clustering_coefficient(&g)))
}

/// Daily network metric for a keyword panel (`{keyword: values}` sharing `start`).
/// Returns `(first_date, values)`.
#[pyfunction]
#[pyo3(signature = (panel_values, start, metric="density", threshold=0.5, window=15))]
fn metric_series(
    panel_values: BTreeMap<String, Vec<f64>>,
    start: &str,
    metric: &str,
    threshold: f64,
    window: usize,
) -> PyResult<(String, Vec<f64>)> {
    let kind: MetricKind = metric.parse().map_err(value_err)?;
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(value_err(format!("threshold {threshold} outside (0, 1]")));
    }
    let p = panel(parse_date(start)?, panel_values)?;
    let s = network::metric_series(&p, kind, threshold, window).map_err(value_err)?.series;
    Ok((s.start().to_string(), s.into_values()))
}

/// `(h, p, dof)`.
#[pyfunction]
fn kruskal_wallis(groups: Vec<Vec<f64>>) -> PyResult<(f64, f64, usize)> {
    let kw = stats::kruskal_wallis(&groups).map_err(value_err)?;
    Ok((kw.h, kw.p, kw.dof))
}

#[pyfunction]
fn chi_square_sf(x: f64, dof: usize) -> f64 {
    stats::chi_square_sf(x, dof)
}

/// Active cases from daily confirmed and removed counts.
/// Returns `(active, clamped_day_indices)`.
#[pyfunction]
fn active_cases(confirmed: Vec<f64>, removed: Vec<f64>) -> PyResult<(Vec<f64>, Vec<usize>)> {
    let start = testkit::synth_start();
    let c = CaseSeries { kind: CaseKind::Confirmed, series: series(start, confirmed)? };
    let r = CaseSeries { kind: CaseKind::Removed, series: series(start, removed)? };
    let (a, clamps) = core_active(&c, &r).map_err(value_err)?;
    let idx = clamps.iter().map(|e| e.date.days_since(start) as usize).collect();
    Ok((a.series.into_values(), idx))
}

/// Synthetic `(case, metric)` pair with a known lag.
#[pyfunction]
#[pyo3(signature = (length=120, lag=10, noise=0.0, seed=42))]
fn synth_pair(length: usize, lag: usize, noise: f64, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let sc = SyntheticScenario { length, lag, noise_amplitude: noise, seed };
    let (c, m) = testkit::synth_pair(&sc).map_err(value_err)?;
    Ok((c.into_values(), m.into_values()))
}

/// Synthetic keyword panel `{keyword: values}` in `[0, 100]`.
#[pyfunction]
#[pyo3(signature = (n_keywords, length=120, lag=10, noise=0.0, seed=42))]
fn synth_panel(n_keywords: usize, length: usize, lag: usize, noise: f64, seed: u64) -> PyResult<BTreeMap<String, Vec<f64>>> {
    let sc = SyntheticScenario { length, lag, noise_amplitude: noise, seed };
    let p = testkit::synth_panel(&sc, n_keywords).map_err(value_err)?;
    Ok(p.into_iter().map(|(k, s)| (k, s.into_values())).collect())
}

fn parse_names<T: std::str::FromStr<Err = String>>(names: &[String]) -> PyResult<Vec<T>> {
    names.iter().map(|n| n.parse().map_err(value_err)).collect()
}

/// Run the parameter sweep.
///
/// `panels` maps `"rescaling_daily"`/`"msv"` to `{keyword: values}`, `cases`
/// maps `"confirmed"`/`"active"` to values; every series starts at `start`.
/// `domains` overrides parameter domains, e.g. `{"radius": [7, 50]}`.
/// Returns one dict per configuration.
#[pyfunction]
#[pyo3(signature = (panels, cases, start, domains=None, threads=None))]
fn sweep<'py>(
    py: Python<'py>,
    panels: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    cases: BTreeMap<String, Vec<f64>>,
    start: &str,
    domains: Option<Bound<'py, PyDict>>,
    threads: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let start = parse_date(start)?;
    let mut d = ParameterDomains::default();
    if let Some(domains) = domains {
        for (key, vals) in domains.iter() {
            let key: String = key.extract()?;
            match key.as_str() {
                "metric" => d.metric = parse_names(&vals.extract::<Vec<String>>()?)?,
                "preprocess" => d.preprocess = parse_names(&vals.extract::<Vec<String>>()?)?,
                "case_type" => d.case_type = parse_names(&vals.extract::<Vec<String>>()?)?,
                "threshold" => d.threshold = vals.extract()?,
                "window" => d.window = vals.extract()?,
                "radius" => d.radius = vals.extract()?,
                other => return Err(value_err(format!("unknown parameter {other:?}"))),
            }
        }
    }
    d.validate().map_err(value_err)?;

    let mut inputs = SweepInputs { panels: BTreeMap::new(), cases: BTreeMap::new() };
    for (name, kw) in panels {
        let method: Preprocess = name.parse().map_err(value_err)?;
        inputs.panels.insert(method, panel(start, kw)?);
    }
    for (name, values) in cases {
        let ct: CaseType = name.parse().map_err(value_err)?;
        inputs.cases.insert(ct, series(start, values)?);
    }
    let configs = d.enumerate();
    let results = py.detach(|| core_sweep::run_sweep(&inputs, &configs, threads));
    results
        .iter()
        .map(|r| {
            let row = PyDict::new(py);
            row.set_item("metric", r.config.metric.name())?;
            row.set_item("preprocess", r.config.preprocess.name())?;
            row.set_item("threshold", r.config.threshold)?;
            row.set_item("window", r.config.window)?;
            row.set_item("case_type", r.config.case_type.name())?;
            row.set_item("radius", r.config.radius)?;
            match &r.outcome {
                Ok(s) => {
                    row.set_item("dtw_score", s.dtw_score)?;
                    row.set_item("path_length", s.path_length)?;
                    row.set_item("status", "ok")?;
                }
                Err(e) => {
                    row.set_item("dtw_score", py.None())?;
                    row.set_item("path_length", py.None())?;
                    row.set_item("status", e.status())?;
                }
            }
            Ok(row)
        })
        .collect()
}

#[pymodule]
fn warpwatch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("BandInfeasibleError", m.py().get_type::<BandInfeasibleError>())?;
    m.add_class::<DtwResult>()?;
    m.add_function(wrap_pyfunction!(dtw, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_dtw, m)?)?;
    m.add_function(wrap_pyfunction!(minmax_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(distance_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(graph_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(metric_series, m)?)?;
    m.add_function(wrap_pyfunction!(kruskal_wallis, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_sf, m)?)?;
    m.add_function(wrap_pyfunction!(active_cases, m)?)?;
    m.add_function(wrap_pyfunction!(synth_pair, m)?)?;
    m.add_function(wrap_pyfunction!(synth_panel, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}

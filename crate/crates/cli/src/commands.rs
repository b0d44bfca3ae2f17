use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use warpwatch_core::cases::{active_cases, daily_confirmed, daily_removed, read_linelist, DateRange};
use warpwatch_core::network::{metric_series, KeywordPanel};
use warpwatch_core::series::{align_ranges, fmt_sig, minmax_normalize, read_series_csv, series_to_csv, Date};
use warpwatch_core::sweep::{
    optimal_configs, optimal_csv, parameter_reports, run_sweep, sweep_csv, CaseType, ParameterDomains, SweepInputs,
    ALPHA,
};
use warpwatch_core::testkit::{synth_active, synth_pair, synth_panel, SyntheticScenario};
use warpwatch_core::trends::{read_segments, read_weekly, reconstruct_all};
use warpwatch_core::{dtw as run_dtw, BandSpec, DateIndexedSeries, MetricKind, Preprocess};

use crate::error::CliError;
use crate::manifest::{csv_files, RunManifest};
use crate::output::{create_dir, num, write_file, write_json, write_manifest};

pub const THREADS_ENV: &str = "WARPWATCH_THREADS";

/// Days between confirmation and removal in the synthetic active series.
const SYNTH_REMOVAL_DELAY: usize = 14;

pub fn parse_band(s: &str) -> Result<BandSpec, String> {
    match s {
        "unconstrained" | "inf" | "none" => Ok(BandSpec::Unconstrained),
        _ => s
            .parse::<usize>()
            .map(BandSpec::SakoeChiba)
            .map_err(|_| format!("expected a non-negative integer or `unconstrained`, got {s:?}")),
    }
}

fn band_value(band: BandSpec) -> Value {
    match band {
        BandSpec::Unconstrained => Value::String("unconstrained".into()),
        BandSpec::SakoeChiba(r) => json!(r),
    }
}

fn load_series(manifest: &mut RunManifest, role: &str, path: &Path) -> Result<DateIndexedSeries, CliError> {
    let bytes = manifest.read_input(role, path)?;
    read_series_csv(&bytes[..]).map_err(|e| CliError::from(e).context(&path.display().to_string()))
}

fn load_panel(manifest: &mut RunManifest, role: &str, dir: &Path) -> Result<KeywordPanel, CliError> {
    let mut entries = Vec::new();
    for path in csv_files(dir)? {
        let name = path.file_name().expect("file").to_string_lossy().into_owned();
        let keyword = path.file_stem().expect("stem").to_string_lossy().into_owned();
        let series = load_series(manifest, &format!("{role}/{name}"), &path)?;
        entries.push((keyword, series));
    }
    if entries.is_empty() {
        return Err(CliError::input(format!("{}: no .csv files", dir.display())));
    }
    KeywordPanel::new(entries).map_err(|e| CliError::from(e).context(&dir.display().to_string()))
}

fn check_keyword_filename(kw: &str) -> Result<(), CliError> {
    if kw.is_empty() || kw.starts_with('.') || kw.contains(['/', '\\', '\0']) {
        return Err(CliError::input(format!("keyword {kw:?} cannot be used as a file name")));
    }
    Ok(())
}

pub fn preprocess(segments: &Path, weekly: Option<&Path>, method: Preprocess, out: &Path) -> Result<(), CliError> {
    if method == Preprocess::RescalingDaily && weekly.is_none() {
        return Err(CliError::input("--method rescale requires --weekly"));
    }
    let mut manifest = RunManifest::new("preprocess");
    manifest.param("method", method.name());
    let seg_bytes = manifest.read_input("segments", segments)?;
    let segs = read_segments(&seg_bytes[..]).map_err(|e| CliError::from(e).context(&segments.display().to_string()))?;
    let weekly_series = match (method, weekly) {
        (Preprocess::RescalingDaily, Some(path)) => {
            let bytes = manifest.read_input("weekly", path)?;
            Some(read_weekly(&bytes[..]).map_err(|e| CliError::from(e).context(&path.display().to_string()))?)
        }
        _ => None,
    };
    let series = reconstruct_all(&segs, weekly_series.as_deref(), method)?;
    for (kw, _) in &series {
        check_keyword_filename(kw)?;
    }
    create_dir(out)?;
    for (kw, s) in &series {
        write_file(out, &format!("{kw}.csv"), &series_to_csv(s))?;
    }
    write_manifest(out, &manifest)
}

pub fn metrics(panel: &Path, metric: MetricKind, threshold: f64, window: usize, out: &Path) -> Result<(), CliError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(CliError::input(format!("--threshold {threshold} outside (0, 1]")));
    }
    if window < 2 {
        return Err(CliError::input(format!("--window {window} must be at least 2")));
    }
    let mut manifest = RunManifest::new("metrics");
    manifest
        .param("metric", metric.name())
        .param("threshold", num(threshold))
        .param("window", window);
    let panel = load_panel(&mut manifest, "panel", panel)?;
    let series = metric_series(&panel, metric, threshold, window)?.series;
    create_dir(out)?;
    write_file(out, &format!("{}.csv", metric.name()), &series_to_csv(&series))?;
    write_manifest(out, &manifest)
}

pub fn cases(
    linelist: &Path,
    region: &str,
    province: &str,
    start: Date,
    end: Date,
    out: &Path,
) -> Result<(), CliError> {
    let range = DateRange::new(start, end)?;
    let mut manifest = RunManifest::new("cases");
    manifest
        .param("region", region)
        .param("province", province)
        .param("start", start.to_string())
        .param("end", end.to_string());
    let bytes = manifest.read_input("linelist", linelist)?;
    let records = read_linelist(&bytes[..], region, province)
        .map_err(|e| CliError::from(e).context(&linelist.display().to_string()))?;
    let confirmed = daily_confirmed(&records, range);
    let removed = daily_removed(&records, range);
    let (active, clamps) = active_cases(&confirmed, &removed)?;
    if !clamps.is_empty() {
        eprintln!(
            "warpwatch: active cases clamped to 0 on {} day(s); see clamps.csv",
            clamps.len()
        );
    }
    let mut log = String::from("date,raw_active\n");
    for c in &clamps {
        let _ = writeln!(log, "{},{}", c.date, fmt_sig(c.raw));
    }
    create_dir(out)?;
    write_file(out, "confirmed.csv", &series_to_csv(&confirmed.series))?;
    write_file(out, "active.csv", &series_to_csv(&active.series))?;
    write_file(out, "clamps.csv", &log)?;
    write_manifest(out, &manifest)
}

pub fn dtw(case: &Path, metric: &Path, band: BandSpec, normalize: bool, trim: bool, out: &Path) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("dtw");
    manifest
        .param("radius", band_value(band))
        .param("normalize", normalize)
        .param("trim", trim);
    let case_series = load_series(&mut manifest, "case", case)?;
    let metric_series = load_series(&mut manifest, "metric", metric)?;
    let (overlap_case, overlap_metric) = align_ranges(&case_series, &metric_series)?;
    let (x, y) = if trim {
        (overlap_case, overlap_metric)
    } else {
        (case_series, metric_series)
    };
    let x = if normalize { minmax_normalize(&x)? } else { x };
    let result = run_dtw(x.values(), y.values(), band, false)?;

    let mut alignment = String::from("case_index,metric_index,case_date,metric_date,normalized_case,metric_value\n");
    for &(i, j) in result.path.pairs() {
        let _ = writeln!(
            alignment,
            "{i},{j},{},{},{},{}",
            x.date_at(i - 1),
            y.date_at(j - 1),
            fmt_sig(x.values()[i - 1]),
            fmt_sig(y.values()[j - 1])
        );
    }
    let report = json!({
        "manifest": manifest.to_value(),
        "distance": num(result.distance),
        "radius": band_value(band),
        "path_length": result.path.len(),
        "case": { "start": x.start().to_string(), "end": x.end().to_string(), "length": x.len() },
        "metric": { "start": y.start().to_string(), "end": y.end().to_string(), "length": y.len() },
    });
    create_dir(out)?;
    write_json(out, "result.json", &report)?;
    write_file(out, "alignment.csv", &alignment)?;
    write_manifest(out, &manifest)
}

pub struct SweepPaths {
    pub config: Option<PathBuf>,
    pub rescale_panel: Option<PathBuf>,
    pub msv_panel: Option<PathBuf>,
    pub confirmed: Option<PathBuf>,
    pub active: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn sweep_threads() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::input(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
    }
}

pub fn sweep(paths: SweepPaths) -> Result<(), CliError> {
    let threads = sweep_threads()?;
    let mut manifest = RunManifest::new("sweep");
    let domains: ParameterDomains = match &paths.config {
        None => ParameterDomains::default(),
        Some(p) => {
            let bytes = manifest.read_input("config", p)?;
            serde_json::from_slice(&bytes).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?
        }
    };
    domains.validate()?;
    manifest.param(
        "domains",
        json!({
            "metric": domains.metric.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "preprocess": domains.preprocess.iter().map(|p| p.name()).collect::<Vec<_>>(),
            "threshold": domains.threshold.iter().map(|&t| num(t)).collect::<Vec<_>>(),
            "window": domains.window,
            "case_type": domains.case_type.iter().map(|c| c.name()).collect::<Vec<_>>(),
            "radius": domains.radius,
        }),
    );

    let mut panels = BTreeMap::new();
    for method in Preprocess::ALL {
        if !domains.preprocess.contains(&method) {
            continue;
        }
        let (flag, path) = match method {
            Preprocess::RescalingDaily => ("--rescale-panel", &paths.rescale_panel),
            Preprocess::Msv => ("--msv-panel", &paths.msv_panel),
        };
        let dir = path
            .as_deref()
            .ok_or_else(|| CliError::input(format!("{flag} is required when sweeping {}", method.name())))?;
        panels.insert(method, load_panel(&mut manifest, method.name(), dir)?);
    }
    let mut cases = BTreeMap::new();
    for ct in CaseType::ALL {
        if !domains.case_type.contains(&ct) {
            continue;
        }
        let (flag, path) = match ct {
            CaseType::Confirmed => ("--confirmed", &paths.confirmed),
            CaseType::Active => ("--active", &paths.active),
        };
        let file = path
            .as_deref()
            .ok_or_else(|| CliError::input(format!("{flag} is required when sweeping {}", ct.name())))?;
        cases.insert(ct, load_series(&mut manifest, ct.name(), file)?);
    }

    let inputs = SweepInputs { panels, cases };
    let configs = domains.enumerate();
    let results = run_sweep(&inputs, &configs, threads);
    let succeeded = results.iter().filter(|r| r.outcome.is_ok()).count();

    let mut parameters = Map::new();
    for rep in parameter_reports(&results) {
        let levels: Vec<Value> = rep
            .levels
            .iter()
            .map(|l| json!({ "level": l.level, "mean_dtw": num(l.mean_dtw), "count": l.count }))
            .collect();
        parameters.insert(
            rep.parameter.to_string(),
            json!({
                "levels": levels,
                "h": rep.h.map_or(Value::Null, num),
                "p": rep.p.map_or(Value::Null, num),
                "significant": rep.significant,
            }),
        );
    }
    let report = json!({
        "manifest": manifest.to_value(),
        "alpha": num(ALPHA),
        "configs": { "total": results.len(), "succeeded": succeeded, "failed": results.len() - succeeded },
        "parameters": parameters,
    });

    create_dir(&paths.out)?;
    write_file(&paths.out, "sweep.csv", &sweep_csv(&results))?;
    write_json(&paths.out, "report.json", &report)?;
    write_file(&paths.out, "optimal.csv", &optimal_csv(&optimal_configs(&results)))?;
    write_manifest(&paths.out, &manifest)?;
    if succeeded == 0 {
        return Err(CliError::Infeasible(format!(
            "all {} configurations failed; see sweep.csv",
            results.len()
        )));
    }
    Ok(())
}

pub fn synth(
    length: usize,
    lag: usize,
    noise: f64,
    seed: u64,
    panel_keywords: Option<usize>,
    out: &Path,
) -> Result<(), CliError> {
    let sc = SyntheticScenario { length, lag, noise_amplitude: noise, seed };
    let mut manifest = RunManifest::new("synth");
    manifest
        .param("length", length)
        .param("lag", lag)
        .param("noise", num(noise))
        .param("seed", seed);
    let (case, metric) = synth_pair(&sc)?;
    let panels = match panel_keywords {
        None => None,
        Some(k) => {
            manifest.param("panel_keywords", k);
            let alt = SyntheticScenario { seed: seed.wrapping_add(1), ..sc };
            Some((synth_panel(&sc, k)?, synth_panel(&alt, k)?))
        }
    };
    create_dir(out)?;
    write_file(out, "case.csv", &series_to_csv(&case))?;
    write_file(out, "metric.csv", &series_to_csv(&metric))?;
    write_file(out, "active.csv", &series_to_csv(&synth_active(&case, SYNTH_REMOVAL_DELAY)))?;
    if let Some((rescale, msv)) = panels {
        for (name, panel) in [("panel_rescale", rescale), ("panel_msv", msv)] {
            let dir = out.join(name);
            create_dir(&dir)?;
            for (kw, s) in &panel {
                write_file(&dir, &format!("{kw}.csv"), &series_to_csv(s))?;
            }
        }
    }
    write_manifest(out, &manifest)
}

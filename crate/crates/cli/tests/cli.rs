mod common;

use std::fs;
use std::path::Path;

use common::*;
use tempfile::TempDir;
use warpwatch_core::series::Date;

fn day(s: &str) -> Date {
    s.parse().unwrap()
}

fn write_segments(path: &Path, keywords: &[&str], starts: &[&str]) {
    let mut s = String::from("keyword,segment_start,date,value\n");
    for (k, kw) in keywords.iter().enumerate() {
        for (n, start) in starts.iter().enumerate() {
            let d0 = day(start);
            for t in 0..30 {
                let v = (t * (3 + k) + 7 * n) % 101;
                s.push_str(&format!("{kw},{d0},{},{v}\n", d0.add_days(t as i64)));
            }
        }
    }
    fs::write(path, s).unwrap();
}

fn write_weekly(path: &Path, keywords: &[&str], first: &str, weeks: usize) {
    let mut s = String::from("keyword,week_start,value\n");
    for kw in keywords {
        for w in 0..weeks {
            s.push_str(&format!("{kw},{},{}\n", day(first).add_days(7 * w as i64), 20 + 10 * (w % 5)));
        }
    }
    fs::write(path, s).unwrap();
}

fn write_series(path: &Path, start: &str, values: &[f64]) {
    let mut s = String::from("date,value\n");
    for (t, v) in values.iter().enumerate() {
        s.push_str(&format!("{},{v}\n", day(start).add_days(t as i64)));
    }
    fs::write(path, s).unwrap();
}

fn write_panel(dir: &Path, series: &[Vec<f64>]) {
    fs::create_dir_all(dir).unwrap();
    for (k, v) in series.iter().enumerate() {
        write_series(&dir.join(format!("kw{k}.csv")), "2020-01-01", v);
    }
}

#[test]
fn preprocess_rescale_writes_one_file_per_keyword() {
    let tmp = TempDir::new().unwrap();
    let (seg, wk, out) = (tmp.path().join("seg.csv"), tmp.path().join("wk.csv"), tmp.path().join("out"));
    write_segments(&seg, &["flu", "cough"], &["2020-01-01", "2020-01-16"]);
    write_weekly(&wk, &["flu", "cough"], "2019-12-30", 8);
    ok(warpwatch(&["preprocess", "--segments", p(&seg), "--weekly", p(&wk), "--method", "rescale", "--out", p(&out)]));
    for kw in ["flu", "cough"] {
        let csv = read(out.join(format!("{kw}.csv")));
        assert_eq!(csv.lines().next(), Some("date,value"));
        assert_eq!(values(&csv).len(), 45);
    }
    let m = json(out.join("manifest.json"));
    assert_eq!(m["command"], "preprocess");
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);

    let msv = tmp.path().join("msv");
    ok(warpwatch(&["preprocess", "--segments", p(&seg), "--method", "msv", "--out", p(&msv)]));
    let v = values(&read(msv.join("flu.csv")));
    assert_eq!(v.len(), 45);
    assert_eq!(v.iter().cloned().fold(f64::MIN, f64::max), 100.0);
}

#[test]
fn preprocess_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let seg = tmp.path().join("seg.csv");
    let out = tmp.path().join("out");
    write_segments(&seg, &["flu"], &["2020-01-01", "2020-03-01"]);
    let r = warpwatch(&["preprocess", "--segments", p(&seg), "--method", "msv", "--out", p(&out)]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("overlap"), "{}", stderr(&r));

    let r = warpwatch(&["preprocess", "--segments", p(&seg), "--method", "rescale", "--out", p(&out)]);
    assert_eq!(code(&r), 2);
    let missing = tmp.path().join("nope.csv");
    let r = warpwatch(&["preprocess", "--segments", p(&seg), "--weekly", p(&missing), "--method", "rescale", "--out", p(&out)]);
    assert_eq!(code(&r), 2);
    let r = warpwatch(&["preprocess", "--segments", p(&seg), "--method", "median", "--out", p(&out)]);
    assert_eq!(code(&r), 2);
}

#[test]
fn metrics_row_count_and_threshold_validation() {
    let tmp = TempDir::new().unwrap();
    let panel = tmp.path().join("panel");
    let series: Vec<Vec<f64>> = (0..4)
        .map(|k| (0..366).map(|t| ((t * (5 + 2 * k) + k) % 17) as f64).collect())
        .collect();
    write_panel(&panel, &series);
    let out = tmp.path().join("out");
    ok(warpwatch(&["metrics", "--panel", p(&panel), "--metric", "density", "--threshold", "0.5", "--window", "15", "--out", p(&out)]));
    let csv = read(out.join("density.csv"));
    assert_eq!(values(&csv).len(), 352);
    assert!(csv.lines().nth(1).unwrap().starts_with("2020-01-15,"));

    for bad in ["0", "1.5", "-0.2"] {
        let r = warpwatch(&["metrics", "--panel", p(&panel), "--metric", "density", "--threshold", bad, "--out", p(&out)]);
        assert_eq!(code(&r), 2, "threshold {bad}");
    }
    let r = warpwatch(&["metrics", "--panel", p(&panel), "--metric", "density", "--threshold", "0.5", "--window", "400", "--out", p(&out)]);
    assert_eq!(code(&r), 3);
}

#[test]
fn clustering_of_identical_series_is_one() {
    let tmp = TempDir::new().unwrap();
    let panel = tmp.path().join("panel");
    let s: Vec<f64> = (0..60).map(|t| ((t * 7) % 11) as f64).collect();
    write_panel(&panel, &[s.clone(), s.clone(), s]);
    let out = tmp.path().join("out");
    ok(warpwatch(&["metrics", "--panel", p(&panel), "--metric", "clustering", "--threshold", "0.8", "--window", "15", "--out", p(&out)]));
    let v = values(&read(out.join("clustering.csv")));
    assert_eq!(v.len(), 46);
    assert!(v.iter().all(|&x| x == 1.0));
}

const LINELIST: &str = "\
CaseCode,Age,RegionRes,ProvinceRes,DateRepConf,DateRepRem
C1,30,NCR,NCR,2020-03-16,2020-03-20
C2,41,NCR,NCR,2020-03-16,
C3,25,NCR,NCR,2020-03-17,2020-03-18
C4,60,Region IV-A,Laguna,2020-03-17,2020-03-19
C5,33,NCR,NCR,2020-03-19,2020-03-19
";

#[test]
fn cases_from_linelist() {
    let tmp = TempDir::new().unwrap();
    let ll = tmp.path().join("ll.csv");
    fs::write(&ll, LINELIST).unwrap();
    let out = tmp.path().join("out");
    ok(warpwatch(&["cases", "--linelist", p(&ll), "--start", "2020-03-15", "--end", "2020-03-21", "--out", p(&out)]));
    let c = read(out.join("confirmed.csv"));
    let a = read(out.join("active.csv"));
    assert_eq!(values(&c), vec![0.0, 2.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
    assert_eq!(values(&a), vec![0.0, 2.0, 3.0, 2.0, 2.0, 1.0, 1.0]);
    let dates = |s: &str| s.lines().skip(1).map(|l| l.split(',').next().unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(dates(&c), dates(&a));

    let none = tmp.path().join("none");
    ok(warpwatch(&["cases", "--linelist", p(&ll), "--region", "CAR", "--province", "Benguet", "--start", "2020-03-15", "--end", "2020-03-21", "--out", p(&none)]));
    assert!(values(&read(none.join("confirmed.csv"))).iter().all(|&v| v == 0.0));
    assert!(values(&read(none.join("active.csv"))).iter().all(|&v| v == 0.0));
}

#[test]
fn malformed_linelist_date_reports_row() {
    let tmp = TempDir::new().unwrap();
    let ll = tmp.path().join("ll.csv");
    fs::write(&ll, LINELIST.replace("2020-03-17,2020-03-18", "03/17/2020,2020-03-18")).unwrap();
    let r = warpwatch(&["cases", "--linelist", p(&ll), "--start", "2020-03-15", "--end", "2020-03-21", "--out", p(&tmp.path().join("o"))]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("row 4"), "{}", stderr(&r));
}

#[test]
fn clamped_days_are_logged() {
    let tmp = TempDir::new().unwrap();
    let ll = tmp.path().join("ll.csv");
    fs::write(&ll, "RegionRes,ProvinceRes,DateRepConf,DateRepRem\nNCR,NCR,2020-03-10,2020-03-16\n").unwrap();
    let out = tmp.path().join("out");
    let r = ok(warpwatch(&["cases", "--linelist", p(&ll), "--start", "2020-03-15", "--end", "2020-03-17", "--out", p(&out)]));
    assert!(stderr(&r).contains("clamped"));
    assert_eq!(read(out.join("clamps.csv")), "date,raw_active\n2020-03-16,-1\n");
    assert_eq!(values(&read(out.join("active.csv"))), vec![0.0, 0.0, 0.0]);
}

#[test]
fn dtw_identical_series_aligns_on_the_diagonal() {
    let tmp = TempDir::new().unwrap();
    let s = tmp.path().join("s.csv");
    write_series(&s, "2020-01-01", &[0.0, 0.25, 1.0, 0.5, 0.75]);
    let out = tmp.path().join("out");
    ok(warpwatch(&["dtw", p(&s), p(&s), "--radius", "7", "--out", p(&out)]));
    let r = json(out.join("result.json"));
    assert_eq!(r["distance"], 0.0);
    assert_eq!(r["radius"], 7);
    assert_eq!(r["path_length"], 5);
    assert_eq!(r["manifest"]["command"], "dtw");
    let rows: Vec<String> = read(out.join("alignment.csv")).lines().map(String::from).collect();
    assert_eq!(rows[0], "case_index,metric_index,case_date,metric_date,normalized_case,metric_value");
    assert_eq!(rows[3], "3,3,2020-01-03,2020-01-03,1,1");
    assert!(rows[1..].iter().all(|l| {
        let f: Vec<&str> = l.split(',').collect();
        f[0] == f[1] && f[2] == f[3]
    }));
}

#[test]
fn dtw_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let (a, b, c) = (tmp.path().join("a.csv"), tmp.path().join("b.csv"), tmp.path().join("c.csv"));
    write_series(&a, "2020-01-01", &[1.0, 2.0, 3.0]);
    write_series(&b, "2020-01-01", &(0..10).map(f64::from).collect::<Vec<_>>());
    write_series(&c, "2021-01-01", &[1.0, 2.0]);
    let out = p(&tmp.path().join("o")).to_string();
    assert_eq!(code(&warpwatch(&["dtw", p(&a), p(&b), "--radius", "2", "--out", &out])), 3);
    assert_eq!(code(&warpwatch(&["dtw", p(&a), p(&c), "--radius", "2", "--out", &out])), 2);
    assert_eq!(code(&warpwatch(&["dtw", p(&a), p(&b), "--radius", "wide", "--out", &out])), 2);
    ok(warpwatch(&["dtw", p(&a), p(&b), "--radius", "unconstrained", "--out", &out]));
    ok(warpwatch(&["dtw", p(&a), p(&b), "--radius", "2", "--trim", "--out", &out]));
    let flat = tmp.path().join("flat.csv");
    write_series(&flat, "2020-01-01", &[4.0, 4.0, 4.0]);
    assert_eq!(code(&warpwatch(&["dtw", p(&flat), p(&a), "--radius", "2", "--out", &out])), 3);
    ok(warpwatch(&["dtw", p(&flat), p(&a), "--radius", "2", "--no-normalize", "--out", &out]));
}

#[test]
fn synth_is_deterministic_and_validated() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        ok(warpwatch(&["synth", "--lag", "10", "--seed", "42", "--out", p(dir)]));
    }
    for f in ["case.csv", "metric.csv", "active.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(code(&warpwatch(&["synth", "--length", "30", "--lag", "30", "--out", p(&a)])), 2);
    assert_eq!(code(&warpwatch(&["synth", "--noise", "-1", "--out", p(&a)])), 2);
}

#[test]
fn synth_without_lag_or_noise_has_near_zero_distance() {
    let tmp = TempDir::new().unwrap();
    let s = tmp.path().join("s");
    ok(warpwatch(&["synth", "--lag", "0", "--noise", "0", "--out", p(&s)]));
    let out = tmp.path().join("d");
    ok(warpwatch(&["dtw", p(&s.join("case.csv")), p(&s.join("metric.csv")), "--radius", "7", "--out", p(&out)]));
    let r = json(out.join("result.json"));
    // both files carry 9 significant digits, so exact zero is out of reach
    assert!(r["distance"].as_f64().unwrap() < 1e-6, "{r}");
    assert_eq!(r["path_length"], 120);
}

#[test]
fn sweep_with_partial_config() {
    let tmp = TempDir::new().unwrap();
    let inputs = tmp.path().join("in");
    synth_inputs(&inputs, 70);
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"metric": ["density"], "preprocess": ["msv"], "radius": [7, 50]}"#).unwrap();
    let out = tmp.path().join("out");
    ok(warpwatch(&[
        "sweep", "--config", p(&cfg), "--msv-panel", p(&inputs.join("panel_msv")),
        "--confirmed", p(&inputs.join("case.csv")), "--active", p(&inputs.join("active.csv")), "--out", p(&out),
    ]));
    let rows = read(out.join("sweep.csv"));
    assert_eq!(rows.lines().count(), 1 + 4 * 2 * 2 * 2);
    assert!(rows.lines().skip(1).all(|l| l.starts_with("density,msv,") && l.ends_with(",ok")));
    let report = json(out.join("report.json"));
    assert_eq!(report["parameters"]["metric"]["h"], serde_json::Value::Null);
    assert_eq!(report["parameters"]["radius"]["levels"].as_array().unwrap().len(), 2);
    assert_eq!(read(out.join("optimal.csv")).lines().count(), 3);
}

#[test]
fn sweep_input_errors() {
    let tmp = TempDir::new().unwrap();
    let inputs = tmp.path().join("in");
    synth_inputs(&inputs, 60);
    let out = tmp.path().join("out");
    let base = sweep_args(&inputs, &out);
    let args: Vec<&str> = base.iter().map(String::as_str).collect();

    // a default sweep needs both panels
    let without_msv: Vec<&str> = args.iter().enumerate().filter(|(i, _)| *i != 3 && *i != 4).map(|(_, a)| *a).collect();
    assert_eq!(code(&warpwatch(&without_msv)), 2);

    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"radii": [7]}"#).unwrap();
    let mut with_cfg = args.clone();
    with_cfg.extend(["--config", p(&cfg)]);
    assert_eq!(code(&warpwatch(&with_cfg)), 2);
    fs::write(&cfg, r#"{"threshold": [0.0]}"#).unwrap();
    assert_eq!(code(&warpwatch(&with_cfg)), 2);

    assert_eq!(code(&warpwatch_env(&args, &[("WARPWATCH_THREADS", "zero")])), 2);
    assert_eq!(code(&warpwatch_env(&args, &[("WARPWATCH_THREADS", "0")])), 2);

    // every configuration needs more history than the panel holds
    fs::write(&cfg, r#"{"window": [90]}"#).unwrap();
    let r = warpwatch(&with_cfg);
    assert_eq!(code(&r), 3);
    let rows = read(out.join("sweep.csv"));
    assert!(rows.lines().skip(1).all(|l| l.ends_with(",,insufficient_history")));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let inputs = tmp.path().join("in");
    synth_inputs(&inputs, 60);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let args = sweep_args(&inputs, dir);
        ok(warpwatch(&args.iter().map(String::as_str).collect::<Vec<_>>()));
        ok(warpwatch(&["dtw", p(&inputs.join("case.csv")), p(&inputs.join("metric.csv")), "--radius", "15", "--out", p(&dir.join("dtw"))]));
        ok(warpwatch(&["metrics", "--panel", p(&inputs.join("panel_msv")), "--metric", "clustering", "--threshold", "0.6", "--out", p(&dir.join("m"))]));
    }
    for f in ["sweep.csv", "report.json", "optimal.csv", "manifest.json", "dtw/result.json", "dtw/alignment.csv", "m/clustering.csv", "m/manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let m = json(a.join("manifest.json"));
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2 * 8 + 2);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

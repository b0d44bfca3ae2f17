//! Reconstruction of long daily search-volume series from 30-day segments.
//!
//! Two methods are provided:
//!
//! * [`rescale_daily`] anchors every segment to a full-period weekly series.
//!   Each (segment, week) bucket gets the factor
//!   `weekly(w) / mean(segment days in w)` (0 when that mean is 0), and days
//!   supplied by several segments are averaged.
//! * [`msv_merge`] chains segments forward from the earliest one, scaling each
//!   new segment by the mean ratio `merged / segment` over the overlap days
//!   where the segment is positive, then rescales the result to a maximum of
//!   100.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{Date, DateIndexedSeries, DateParseError, SeriesError};

pub const SEGMENT_DAYS: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrendsError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: value {value} outside [0, 100]")]
    Range { line: u64, value: f64 },
    #[error("coverage: {0}")]
    Coverage(String),
    #[error("segment starting {next} does not overlap data ending {prev_end}")]
    NoOverlap { prev_end: Date, next: Date },
    #[error("keyword mismatch: {0:?} vs {1:?}")]
    KeywordMismatch(String, String),
    #[error("no segments")]
    NoSegments,
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Thirty consecutive daily RSV values for one keyword.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySegment {
    keyword: String,
    start: Date,
    values: Vec<f64>,
}

impl DailySegment {
    pub fn new(keyword: impl Into<String>, start: Date, values: Vec<f64>) -> Result<Self, TrendsError> {
        if values.len() != SEGMENT_DAYS {
            return Err(TrendsError::Parse {
                line: 0,
                message: format!("segment has {} days, expected {SEGMENT_DAYS}", values.len()),
            });
        }
        if let Some(&v) = values.iter().find(|v| !(0.0..=100.0).contains(*v)) {
            return Err(TrendsError::Range { line: 0, value: v });
        }
        Ok(Self {
            keyword: keyword.into(),
            start,
            values,
        })
    }

    pub fn keyword(&self) -> &str {
        &self.keyword
    }

    pub fn start(&self) -> Date {
        self.start
    }

    pub fn end(&self) -> Date {
        self.start.add_days(self.values.len() as i64 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn days(&self) -> impl Iterator<Item = (Date, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start.add_days(i as i64), v))
    }
}

/// Weekly RSV for one keyword; week `k` starts `7k` days after the first.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklySeries {
    keyword: String,
    first_week: Date,
    values: Vec<f64>,
}

impl WeeklySeries {
    pub fn new(keyword: impl Into<String>, first_week: Date, values: Vec<f64>) -> Result<Self, TrendsError> {
        if values.is_empty() {
            return Err(TrendsError::Coverage("weekly series is empty".into()));
        }
        if let Some(&v) = values.iter().find(|v| !(0.0..=100.0).contains(*v)) {
            return Err(TrendsError::Range { line: 0, value: v });
        }
        Ok(Self {
            keyword: keyword.into(),
            first_week,
            values,
        })
    }

    pub fn keyword(&self) -> &str {
        &self.keyword
    }

    pub fn week_starts(&self) -> impl Iterator<Item = Date> + '_ {
        (0..self.values.len()).map(|k| self.first_week.add_days(7 * k as i64))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn week_of(&self, d: Date) -> Option<usize> {
        let off = d.days_since(self.first_week);
        if off < 0 {
            return None;
        }
        let k = (off / 7) as usize;
        (k < self.values.len()).then_some(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    RescalingDaily,
    Msv,
}

impl Preprocess {
    pub const ALL: [Preprocess; 2] = [Preprocess::RescalingDaily, Preprocess::Msv];

    pub fn name(self) -> &'static str {
        match self {
            Preprocess::RescalingDaily => "rescaling_daily",
            Preprocess::Msv => "msv",
        }
    }
}

impl fmt::Display for Preprocess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preprocess {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rescaling_daily" | "rescale" => Ok(Preprocess::RescalingDaily),
            "msv" => Ok(Preprocess::Msv),
            other => Err(format!("unknown preprocessing method {other:?}")),
        }
    }
}

fn open(path: &Path) -> Result<std::fs::File, TrendsError> {
    std::fs::File::open(path).map_err(|e| TrendsError::Io(format!("{}: {e}", path.display())))
}

fn csv_reader<R: Read>(reader: R, expected: &[&str]) -> Result<csv::Reader<R>, TrendsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| TrendsError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(TrendsError::Parse {
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    Ok(rdr)
}

fn parse_date(s: &str, line: u64) -> Result<Date, TrendsError> {
    s.parse().map_err(|e: DateParseError| TrendsError::Parse {
        line,
        message: e.to_string(),
    })
}

fn parse_rsv(s: &str, line: u64) -> Result<f64, TrendsError> {
    let v: f64 = s.parse().map_err(|_| TrendsError::Parse {
        line,
        message: format!("invalid value {s:?}"),
    })?;
    if !(0.0..=100.0).contains(&v) {
        return Err(TrendsError::Range { line, value: v });
    }
    Ok(v)
}

fn records<R: Read>(
    rdr: &mut csv::Reader<R>,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord), TrendsError>> + '_ {
    rdr.records().map(|r| {
        let rec = r.map_err(|e| TrendsError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        Ok((rec.position().map_or(0, |p| p.line()), rec))
    })
}

/// First line of a segment and its `(line, date, value)` rows.
type SegmentRows = (u64, Vec<(u64, Date, f64)>);

/// Parse a `keyword,segment_start,date,value` file. Segments are returned in
/// order of first appearance.
pub fn read_segments<R: Read>(reader: R) -> Result<Vec<DailySegment>, TrendsError> {
    let mut rdr = csv_reader(reader, &["keyword", "segment_start", "date", "value"])?;
    // (keyword, start) -> (first line, rows)
    let mut order: Vec<(String, Date)> = Vec::new();
    let mut groups: BTreeMap<(String, Date), SegmentRows> = BTreeMap::new();
    for item in records(&mut rdr) {
        let (line, rec) = item?;
        let keyword = rec[0].to_string();
        if keyword.is_empty() {
            return Err(TrendsError::Parse {
                line,
                message: "empty keyword".into(),
            });
        }
        let start = parse_date(&rec[1], line)?;
        let date = parse_date(&rec[2], line)?;
        let value = parse_rsv(&rec[3], line)?;
        let key = (keyword, start);
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (line, Vec::new())
        });
        entry.1.push((line, date, value));
    }

    order
        .into_iter()
        .map(|key| {
            let (first_line, mut rows) = groups.remove(&key).expect("grouped");
            let (keyword, start) = key;
            if rows.len() != SEGMENT_DAYS {
                return Err(TrendsError::Parse {
                    line: first_line,
                    message: format!(
                        "segment {keyword:?} starting {start} has {} rows, expected {SEGMENT_DAYS}",
                        rows.len()
                    ),
                });
            }
            rows.sort_by_key(|r| r.1);
            for (k, &(line, date, _)) in rows.iter().enumerate() {
                if date != start.add_days(k as i64) {
                    return Err(TrendsError::Parse {
                        line,
                        message: format!(
                            "segment {keyword:?} starting {start}: expected {} but found {date}",
                            start.add_days(k as i64)
                        ),
                    });
                }
            }
            let values = rows.into_iter().map(|r| r.2).collect();
            Ok(DailySegment {
                keyword,
                start,
                values,
            })
        })
        .collect()
}

pub fn load_segments(path: impl AsRef<Path>) -> Result<Vec<DailySegment>, TrendsError> {
    read_segments(open(path.as_ref())?)
}

/// Parse a `keyword,week_start,value` file into one series per keyword,
/// sorted by keyword.
pub fn read_weekly<R: Read>(reader: R) -> Result<Vec<WeeklySeries>, TrendsError> {
    let mut rdr = csv_reader(reader, &["keyword", "week_start", "value"])?;
    let mut by_kw: BTreeMap<String, Vec<(u64, Date, f64)>> = BTreeMap::new();
    for item in records(&mut rdr) {
        let (line, rec) = item?;
        let date = parse_date(&rec[1], line)?;
        let value = parse_rsv(&rec[2], line)?;
        by_kw.entry(rec[0].to_string()).or_default().push((line, date, value));
    }
    by_kw
        .into_iter()
        .map(|(keyword, mut rows)| {
            rows.sort_by_key(|r| r.1);
            let first = rows[0].1;
            for (k, &(line, date, _)) in rows.iter().enumerate() {
                if date != first.add_days(7 * k as i64) {
                    return Err(TrendsError::Parse {
                        line,
                        message: format!("weekly {keyword:?}: week starts must be 7 days apart, found {date}"),
                    });
                }
            }
            WeeklySeries::new(keyword, first, rows.into_iter().map(|r| r.2).collect())
        })
        .collect()
}

pub fn load_weekly(path: impl AsRef<Path>) -> Result<Vec<WeeklySeries>, TrendsError> {
    read_weekly(open(path.as_ref())?)
}

fn sorted_segments(segments: &[DailySegment]) -> Vec<&DailySegment> {
    let mut sorted: Vec<&DailySegment> = segments.iter().collect();
    sorted.sort_by(|a, b| {
        a.start.cmp(&b.start).then_with(|| {
            a.values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    sorted
}

fn check_keyword(segments: &[&DailySegment], keyword: &str) -> Result<(), TrendsError> {
    match segments.iter().find(|s| s.keyword != keyword) {
        Some(s) => Err(TrendsError::KeywordMismatch(keyword.to_string(), s.keyword.clone())),
        None => Ok(()),
    }
}

/// Weekly-anchored calibration of one keyword's segments.
pub fn rescale_daily(segments: &[DailySegment], weekly: &WeeklySeries) -> Result<DateIndexedSeries, TrendsError> {
    let sorted = sorted_segments(segments);
    let first = *sorted.first().ok_or(TrendsError::NoSegments)?;
    check_keyword(&sorted, &weekly.keyword)?;
    let from = first.start;
    let to = sorted.iter().map(|s| s.end()).max().expect("non-empty");
    let days = (to.days_since(from) + 1) as usize;
    let mut sum = vec![0.0; days];
    let mut count = vec![0u32; days];

    for seg in &sorted {
        // week index -> (sum, n) over the segment's own days
        let mut buckets: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for (d, v) in seg.days() {
            let k = weekly.week_of(d).ok_or_else(|| {
                TrendsError::Coverage(format!("{d} ({:?}) falls outside the weekly reference", seg.keyword))
            })?;
            let b = buckets.entry(k).or_insert((0.0, 0));
            b.0 += v;
            b.1 += 1;
        }
        for (d, v) in seg.days() {
            let k = weekly.week_of(d).expect("checked above");
            let (s, n) = buckets[&k];
            let mean = s / n as f64;
            let factor = if mean == 0.0 { 0.0 } else { weekly.values[k] / mean };
            let idx = d.days_since(from) as usize;
            sum[idx] += v * factor;
            count[idx] += 1;
        }
    }

    let uncovered: Vec<String> = count
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| from.add_days(i as i64).to_string())
        .collect();
    if !uncovered.is_empty() {
        return Err(TrendsError::Coverage(format!(
            "{:?}: no segment covers {}",
            first.keyword,
            uncovered.join(", ")
        )));
    }
    let values = sum.iter().zip(&count).map(|(s, &c)| s / f64::from(c)).collect();
    Ok(DateIndexedSeries::new(from, values)?)
}

/// Forward segment chaining with overlap correction factors.
pub fn msv_merge(segments: &[DailySegment]) -> Result<DateIndexedSeries, TrendsError> {
    let sorted = sorted_segments(segments);
    let (anchor, rest) = sorted.split_first().ok_or(TrendsError::NoSegments)?;
    check_keyword(&sorted, &anchor.keyword)?;
    let from = anchor.start;
    let mut merged: Vec<f64> = anchor.values.clone();

    for seg in rest {
        let merged_end = from.add_days(merged.len() as i64 - 1);
        if seg.start > merged_end {
            return Err(TrendsError::NoOverlap {
                prev_end: merged_end,
                next: seg.start,
            });
        }
        let ratios: Vec<f64> = seg
            .days()
            .filter(|&(d, v)| d <= merged_end && v > 0.0)
            .map(|(d, v)| merged[d.days_since(from) as usize] / v)
            .collect();
        let factor = if ratios.is_empty() {
            1.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        };
        merged.extend(seg.days().filter(|&(d, _)| d > merged_end).map(|(_, v)| v * factor));
    }

    let max = merged.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for v in &mut merged {
            *v = *v / max * 100.0;
        }
    }
    Ok(DateIndexedSeries::new(from, merged)?)
}

/// Reconstruct every keyword independently. Output is sorted by keyword.
///
/// `weekly` is required for [`Preprocess::RescalingDaily`] and ignored for MSV.
pub fn reconstruct_all(
    segments: &[DailySegment],
    weekly: Option<&[WeeklySeries]>,
    method: Preprocess,
) -> Result<Vec<(String, DateIndexedSeries)>, TrendsError> {
    let mut by_kw: BTreeMap<&str, Vec<DailySegment>> = BTreeMap::new();
    for s in segments {
        by_kw.entry(s.keyword.as_str()).or_default().push(s.clone());
    }
    let jobs: Vec<(&str, Vec<DailySegment>)> = by_kw.into_iter().collect();
    jobs.into_par_iter()
        .map(|(kw, segs)| {
            let series = match method {
                Preprocess::Msv => msv_merge(&segs)?,
                Preprocess::RescalingDaily => {
                    let weekly = weekly
                        .ok_or_else(|| TrendsError::Coverage("rescaling requires a weekly series".into()))?;
                    let w = weekly
                        .iter()
                        .find(|w| w.keyword == kw)
                        .ok_or_else(|| TrendsError::Coverage(format!("no weekly series for {kw:?}")))?;
                    rescale_daily(&segs, w)?
                }
            };
            Ok((kw.to_string(), series))
        })
        .collect()
}

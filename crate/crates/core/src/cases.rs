//! Line-list ingestion and daily confirmed / removed / active case series.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::series::{Date, DateIndexedSeries, SeriesError};

pub const COL_REGION: &str = "RegionRes";
pub const COL_PROVINCE: &str = "ProvinceRes";
pub const COL_CONFIRMED: &str = "DateRepConf";
pub const COL_REMOVED: &str = "DateRepRem";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseError {
    #[error("row {row}: {message}")]
    Parse { row: u64, message: String },
    #[error("missing column {0}")]
    MissingColumn(&'static str),
    #[error("date ranges differ: {0}")]
    RangeMismatch(String),
    #[error("invalid date range {from}..{to}")]
    InvalidRange { from: Date, to: Date },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineListRecord {
    pub region_res: String,
    pub province_res: String,
    pub date_rep_conf: Date,
    pub date_rep_rem: Option<Date>,
}

/// Read a line list and keep rows whose region and province match exactly.
///
/// Dates are only parsed on retained rows. Blank region or province never
/// matches.
pub fn read_linelist<R: Read>(
    reader: R,
    region: &str,
    province: &str,
) -> Result<Vec<LineListRecord>, CaseError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CaseError::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(CaseError::MissingColumn(name))
    };
    let (ci_reg, ci_prov, ci_conf, ci_rem) = (
        col(COL_REGION)?,
        col(COL_PROVINCE)?,
        col(COL_CONFIRMED)?,
        col(COL_REMOVED)?,
    );

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CaseError::Parse {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = rec.position().map_or(0, |p| p.line());
        let reg = rec[ci_reg].trim();
        let prov = rec[ci_prov].trim();
        if reg.is_empty() || prov.is_empty() || reg != region || prov != province {
            continue;
        }
        let parse = |s: &str| {
            s.trim().parse::<Date>().map_err(|e| CaseError::Parse {
                row,
                message: e.to_string(),
            })
        };
        let conf = parse(&rec[ci_conf])?;
        let rem_raw = rec[ci_rem].trim();
        let rem = if rem_raw.is_empty() {
            None
        } else {
            Some(parse(rem_raw)?)
        };
        out.push(LineListRecord {
            region_res: reg.to_string(),
            province_res: prov.to_string(),
            date_rep_conf: conf,
            date_rep_rem: rem,
        });
    }
    Ok(out)
}

pub fn load_linelist(
    path: impl AsRef<Path>,
    region: &str,
    province: &str,
) -> Result<Vec<LineListRecord>, CaseError> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| CaseError::Io(format!("{}: {e}", path.display())))?;
    read_linelist(f, region, province)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseKind {
    Confirmed,
    Removed,
    Active,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Confirmed => "confirmed",
            CaseKind::Removed => "removed",
            CaseKind::Active => "active",
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "confirmed" => Ok(CaseKind::Confirmed),
            "removed" => Ok(CaseKind::Removed),
            "active" => Ok(CaseKind::Active),
            other => Err(format!("unknown case kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSeries {
    pub kind: CaseKind,
    pub series: DateIndexedSeries,
}

/// Inclusive `[from, to]` day range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateRange {
    pub from: Date,
    pub to: Date,
}

impl DateRange {
    pub fn new(from: Date, to: Date) -> Result<Self, CaseError> {
        if from > to {
            return Err(CaseError::InvalidRange { from, to });
        }
        Ok(Self { from, to })
    }

    pub fn days(&self) -> usize {
        (self.to.days_since(self.from) + 1) as usize
    }
}

fn count_by_day<I: Iterator<Item = Date>>(dates: I, range: DateRange) -> Vec<f64> {
    let mut counts = vec![0u64; range.days()];
    for d in dates {
        if d >= range.from && d <= range.to {
            counts[d.days_since(range.from) as usize] += 1;
        }
    }
    counts.into_iter().map(|c| c as f64).collect()
}

/// Count of confirmations per day, zero-filled across `range`.
pub fn daily_confirmed(records: &[LineListRecord], range: DateRange) -> CaseSeries {
    let values = count_by_day(records.iter().map(|r| r.date_rep_conf), range);
    CaseSeries {
        kind: CaseKind::Confirmed,
        series: DateIndexedSeries::new(range.from, values).expect("non-empty range"),
    }
}

/// Count of removals per day; records without a removal date contribute nothing.
pub fn daily_removed(records: &[LineListRecord], range: DateRange) -> CaseSeries {
    let values = count_by_day(records.iter().filter_map(|r| r.date_rep_rem), range);
    CaseSeries {
        kind: CaseKind::Removed,
        series: DateIndexedSeries::new(range.from, values).expect("non-empty range"),
    }
}

/// A day on which the active-case recurrence went negative and was reset to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampEvent {
    pub date: Date,
    /// Value of `A_{t-1} + C_t - R_t` before clamping.
    pub raw: f64,
}

/// `A_t = max(0, A_{t-1} + C_t - R_t)` with `A_{-1} = 0`.
pub fn active_cases(
    confirmed: &CaseSeries,
    removed: &CaseSeries,
) -> Result<(CaseSeries, Vec<ClampEvent>), CaseError> {
    let (c, r) = (&confirmed.series, &removed.series);
    if c.start() != r.start() || c.len() != r.len() {
        return Err(CaseError::RangeMismatch(format!(
            "{}..{} vs {}..{}",
            c.start(),
            c.end(),
            r.start(),
            r.end()
        )));
    }
    let mut clamps = Vec::new();
    let mut prev = 0.0;
    let values = c
        .values()
        .iter()
        .zip(r.values())
        .enumerate()
        .map(|(i, (&ct, &rt))| {
            let raw = prev + ct - rt;
            let a = if raw < 0.0 {
                clamps.push(ClampEvent {
                    date: c.date_at(i),
                    raw,
                });
                0.0
            } else {
                raw
            };
            prev = a;
            a
        })
        .collect();
    Ok((
        CaseSeries {
            kind: CaseKind::Active,
            series: c.with_values(values)?,
        },
        clamps,
    ))
}

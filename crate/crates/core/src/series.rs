//! Daily date-indexed series.
//!
//! Dates are carried as a day count since 1970-01-01 and only rendered as
//! `YYYY-MM-DD` at the I/O boundary. There is no time-of-day or timezone
//! anywhere in this crate.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

/// A calendar day, stored as days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date(i32);

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")
}

impl Date {
    pub const fn from_epoch_days(days: i32) -> Self {
        Date(days)
    }

    pub const fn epoch_days(self) -> i32 {
        self.0
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(Self::from_naive)
    }

    fn from_naive(d: NaiveDate) -> Self {
        Date((d - epoch()).num_days() as i32)
    }

    fn to_naive(self) -> NaiveDate {
        epoch() + chrono::Duration::days(i64::from(self.0))
    }

    /// Shift by a signed number of days.
    pub fn add_days(self, days: i64) -> Self {
        Date((i64::from(self.0) + days) as i32)
    }

    /// `self - other` in days.
    pub fn days_since(self, other: Date) -> i64 {
        i64::from(self.0) - i64::from(other.0)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.to_naive();
        write!(f, "{:04}-{:02}-{:02}", d.year(), d.month(), d.day())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid date {0:?}: expected YYYY-MM-DD")]
pub struct DateParseError(pub String);

impl FromStr for Date {
    type Err = DateParseError;

    /// Strict `YYYY-MM-DD`; anything else (single-digit fields, slashes,
    /// trailing time) is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        let shape_ok = b.len() == 10
            && b[4] == b'-'
            && b[7] == b'-'
            && b.iter()
                .enumerate()
                .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
        if !shape_ok {
            return Err(DateParseError(s.to_string()));
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map(Self::from_naive)
            .map_err(|_| DateParseError(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("empty series")]
    Empty,
    #[error("missing dates: {}", join_dates(.missing))]
    Gap { missing: Vec<Date> },
    #[error("duplicate date {0}")]
    DuplicateDate(Date),
    #[error("non-finite value {value} at {date}")]
    NonFiniteValue { date: Date, value: f64 },
    #[error("degenerate range: max == min == {0}")]
    DegenerateRange(f64),
    #[error("date ranges do not overlap")]
    NoOverlap,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{0}")]
    Io(String),
}

fn join_dates(dates: &[Date]) -> String {
    dates
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// A non-empty, gap-free daily series of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct DateIndexedSeries {
    start: Date,
    values: Vec<f64>,
}

impl DateIndexedSeries {
    pub fn new(start: Date, values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(SeriesError::NonFiniteValue {
                date: start.add_days(i as i64),
                value: v,
            });
        }
        Ok(Self { start, values })
    }

    /// Build a series from `(date, value)` rows in any order. The dates must
    /// form one unbroken daily run.
    pub fn from_rows<I>(rows: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Date, f64)>,
    {
        let mut rows: Vec<(Date, f64)> = rows.into_iter().collect();
        if rows.is_empty() {
            return Err(SeriesError::Empty);
        }
        rows.sort_by_key(|&(d, _)| d);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(SeriesError::DuplicateDate(w[0].0));
        }
        let missing: Vec<Date> = rows
            .windows(2)
            .flat_map(|w| (1..w[1].0.days_since(w[0].0)).map(move |k| w[0].0.add_days(k)))
            .collect();
        if !missing.is_empty() {
            return Err(SeriesError::Gap { missing });
        }
        let start = rows[0].0;
        Self::new(start, rows.into_iter().map(|(_, v)| v).collect())
    }

    pub fn start(&self) -> Date {
        self.start
    }

    /// Last covered date (inclusive).
    pub fn end(&self) -> Date {
        self.start.add_days(self.values.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn date_at(&self, index: usize) -> Date {
        self.start.add_days(index as i64)
    }

    pub fn get(&self, date: Date) -> Option<f64> {
        let off = date.days_since(self.start);
        usize::try_from(off).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Date, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.date_at(i), v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sub-series covering `[from, to]`, both inclusive and inside the series.
    pub fn slice(&self, from: Date, to: Date) -> Result<Self, SeriesError> {
        if from > to || from < self.start || to > self.end() {
            return Err(SeriesError::NoOverlap);
        }
        let a = from.days_since(self.start) as usize;
        let b = to.days_since(self.start) as usize;
        Ok(Self {
            start: from,
            values: self.values[a..=b].to_vec(),
        })
    }

    /// Same dates, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.len() != self.values.len() {
            return Err(SeriesError::Io(format!(
                "length mismatch: {} vs {}",
                values.len(),
                self.values.len()
            )));
        }
        Self::new(self.start, values)
    }
}

/// Check `(date, value)` rows and assemble them into a series.
pub fn validate_contiguous<I>(rows: I) -> Result<DateIndexedSeries, SeriesError>
where
    I: IntoIterator<Item = (Date, f64)>,
{
    DateIndexedSeries::from_rows(rows)
}

/// Min-max scale into `[0, 1]`.
pub fn minmax_normalize(s: &DateIndexedSeries) -> Result<DateIndexedSeries, SeriesError> {
    let values = minmax_values(s.values())?;
    Ok(DateIndexedSeries {
        start: s.start,
        values,
    })
}

pub(crate) fn minmax_values(values: &[f64]) -> Result<Vec<f64>, SeriesError> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return Err(SeriesError::Empty);
    }
    if hi <= lo {
        return Err(SeriesError::DegenerateRange(lo));
    }
    let span = hi - lo;
    Ok(values.iter().map(|&v| (v - lo) / span).collect())
}

/// Trim both series to the intersection of their date ranges.
pub fn align_ranges(
    a: &DateIndexedSeries,
    b: &DateIndexedSeries,
) -> Result<(DateIndexedSeries, DateIndexedSeries), SeriesError> {
    let from = a.start().max(b.start());
    let to = a.end().min(b.end());
    if from > to {
        return Err(SeriesError::NoOverlap);
    }
    Ok((a.slice(from, to)?, b.slice(from, to)?))
}

/// Read a `date,value` CSV.
pub fn read_series_csv<R: Read>(reader: R) -> Result<DateIndexedSeries, SeriesError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| SeriesError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "value" {
        return Err(SeriesError::Parse {
            line: 1,
            message: format!("expected header `date,value`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| SeriesError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let date: Date = rec[0].parse().map_err(|e: DateParseError| SeriesError::Parse {
            line,
            message: e.to_string(),
        })?;
        let value: f64 = rec[1].parse().map_err(|_| SeriesError::Parse {
            line,
            message: format!("invalid value {:?}", &rec[1]),
        })?;
        if !value.is_finite() {
            return Err(SeriesError::NonFiniteValue { date, value });
        }
        rows.push((date, value));
    }
    validate_contiguous(rows)
}

pub fn load_series_csv(path: impl AsRef<Path>) -> Result<DateIndexedSeries, SeriesError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| SeriesError::Io(format!("{}: {e}", path.display())))?;
    read_series_csv(file)
}

/// Render as a `date,value` CSV (LF line endings, 9 significant digits).
pub fn series_to_csv(s: &DateIndexedSeries) -> String {
    let mut out = String::from("date,value\n");
    for (d, v) in s.iter() {
        out.push_str(&format!("{d},{}\n", fmt_sig(v)));
    }
    out
}

/// Format with 9 significant digits in the style of C's `%.9g`.
pub fn fmt_sig(v: f64) -> String {
    const SIG: i32 = 9;
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG).contains(&exp) {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Round to 9 significant digits (the value [`fmt_sig`] would print).
pub fn round_sig(v: f64) -> f64 {
    fmt_sig(v).parse().unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Date {
        s.parse().unwrap()
    }

    #[test]
    fn date_roundtrip_and_strictness() {
        let x = d("2020-03-16");
        assert_eq!(x.to_string(), "2020-03-16");
        assert_eq!(x.add_days(16).to_string(), "2020-04-01");
        assert_eq!(Date::from_ymd(1970, 1, 1).unwrap().epoch_days(), 0);
        assert!("2020-3-16".parse::<Date>().is_err());
        assert!("2020/03/16".parse::<Date>().is_err());
        assert!("2020-02-30".parse::<Date>().is_err());
        assert!("2020-03-16T00:00".parse::<Date>().is_err());
    }

    #[test]
    fn contiguous_rows() {
        let s = validate_contiguous(vec![
            (d("2020-03-17"), 2.0),
            (d("2020-03-16"), 1.0),
            (d("2020-03-18"), 3.0),
        ])
        .unwrap();
        assert_eq!(s.start(), d("2020-03-16"));
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.end().days_since(s.start()) + 1, s.len() as i64);
    }

    #[test]
    fn gap_lists_missing_days() {
        let err = validate_contiguous(vec![(d("2020-03-16"), 1.0), (d("2020-03-18"), 3.0)]).unwrap_err();
        assert_eq!(err, SeriesError::Gap { missing: vec![d("2020-03-17")] });
    }

    #[test]
    fn empty_duplicate_nonfinite() {
        assert_eq!(validate_contiguous(vec![]).unwrap_err(), SeriesError::Empty);
        assert!(matches!(
            validate_contiguous(vec![(d("2020-03-16"), 1.0), (d("2020-03-16"), 2.0)]),
            Err(SeriesError::DuplicateDate(_))
        ));
        assert!(matches!(
            validate_contiguous(vec![(d("2020-03-16"), f64::NAN)]),
            Err(SeriesError::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let s = DateIndexedSeries::new(d("2020-03-16"), vec![2.0, 4.0, 6.0]).unwrap();
        assert_eq!(minmax_normalize(&s).unwrap().values(), &[0.0, 0.5, 1.0]);
        let s = DateIndexedSeries::new(d("2020-03-16"), vec![0.0, 1.0]).unwrap();
        assert_eq!(minmax_normalize(&s).unwrap().values(), &[0.0, 1.0]);
        let s = DateIndexedSeries::new(d("2020-03-16"), vec![5.0; 3]).unwrap();
        assert_eq!(minmax_normalize(&s).unwrap_err(), SeriesError::DegenerateRange(5.0));
    }

    #[test]
    fn align_examples() {
        let a = DateIndexedSeries::new(d("2020-03-16"), vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let b = DateIndexedSeries::new(d("2020-03-18"), (0..8).map(f64::from).collect()).unwrap();
        let (x, y) = align_ranges(&a, &b).unwrap();
        assert_eq!((x.start(), x.end()), (d("2020-03-18"), d("2020-03-20")));
        assert_eq!(x.values(), &[3.0, 4.0, 5.0]);
        assert_eq!(y.values(), &[0.0, 1.0, 2.0]);

        let (x, y) = align_ranges(&a, &a).unwrap();
        assert_eq!((x, y), (a.clone(), a.clone()));

        let c = DateIndexedSeries::new(d("2020-04-01"), vec![1.0; 5]).unwrap();
        assert_eq!(align_ranges(&a, &c).unwrap_err(), SeriesError::NoOverlap);
    }

    #[test]
    fn csv_read_accepts_crlf_and_rejects_bad_header() {
        let s = read_series_csv("date,value\r\n2020-03-16,1.5\r\n2020-03-17,2\r\n".as_bytes()).unwrap();
        assert_eq!(s.values(), &[1.5, 2.0]);
        assert!(matches!(
            read_series_csv("day,value\n2020-03-16,1\n".as_bytes()),
            Err(SeriesError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_series_csv("date,value\n2020-03-16,1\n2020-3-17,1\n".as_bytes()),
            Err(SeriesError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(3.0), "3");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig(36.3), "36.3");
        assert_eq!(fmt_sig(123456789.4), "123456789");
        assert_eq!(fmt_sig(1.55e-35), "1.55e-35");
        assert_eq!(fmt_sig(-2.5e12), "-2.5e+12");
        assert_eq!(fmt_sig(0.000123), "0.000123");
    }
}

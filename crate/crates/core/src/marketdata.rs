//! Price-series storage, trading calendar, and return computation.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use chrono_tz::America::New_York;

use crate::error::{Error, Result};

/// Sorted list of trading days. The calendar is inferred from the market
/// index file rather than from an exchange holiday source.
#[derive(Debug, Clone)]
pub struct TradingCalendar {
    dates: Vec<NaiveDate>,
}

impl TradingCalendar {
    pub fn new(dates: Vec<NaiveDate>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::Invalid("empty trading calendar".into()));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid(format!(
                    "calendar dates not strictly increasing at {}",
                    w[1]
                )));
            }
        }
        Ok(Self { dates })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn date(&self, idx: usize) -> NaiveDate {
        self.dates[idx]
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// First trading day with date >= `date`.
    pub fn first_on_or_after(&self, date: NaiveDate) -> Option<usize> {
        match self.dates.binary_search(&date) {
            Ok(i) => Some(i),
            Err(i) if i < self.dates.len() => Some(i),
            Err(_) => None,
        }
    }

    /// Market close of day `idx` as a UTC epoch second (16:00 US/Eastern).
    pub fn close_ts(&self, idx: usize) -> i64 {
        close_ts_of(self.dates[idx])
    }

    /// Index of the first trading day whose close is at or after the
    /// timestamp.
    pub fn align(&self, created_utc: i64) -> Result<usize> {
        if created_utc > self.close_ts(self.dates.len() - 1) {
            return Err(Error::AfterCalendar(created_utc));
        }
        // binary search over monotone close times
        let mut lo = 0usize;
        let mut hi = self.dates.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.close_ts(mid) >= created_utc {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }
}

/// 16:00 US/Eastern on the given civil date, as a UTC epoch second.
pub fn close_ts_of(date: NaiveDate) -> i64 {
    date.and_hms_opt(16, 0, 0)
        .expect("valid wall-clock time")
        .and_local_timezone(New_York)
        .single()
        .expect("16:00 is never ambiguous in US/Eastern")
        .timestamp()
}

/// Civil date of a UTC timestamp in US/Eastern.
pub fn eastern_date_of(ts: i64) -> NaiveDate {
    use chrono::TimeZone;
    New_York.timestamp_opt(ts, 0).unwrap().date_naive()
}

/// Per-ticker daily adjusted-close series, indexed by trading-day
/// position in the shared calendar. Days absent from `days` are gaps and
/// are never interpolated.
#[derive(Debug, Clone)]
pub struct PriceSeries {
    pub ticker: String,
    /// Strictly increasing calendar indices.
    pub days: Vec<usize>,
    /// One positive price per entry of `days`.
    pub adj_close: Vec<f64>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, days: Vec<usize>, adj_close: Vec<f64>) -> Result<Self> {
        let ticker = ticker.into();
        if days.len() != adj_close.len() {
            return Err(Error::Invalid(format!(
                "{ticker}: {} days but {} prices",
                days.len(),
                adj_close.len()
            )));
        }
        for w in days.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid(format!(
                    "{ticker}: days not strictly increasing"
                )));
            }
        }
        if let Some(p) = adj_close.iter().find(|p| p.is_nan() || **p <= 0.0) {
            return Err(Error::Invalid(format!("{ticker}: nonpositive price {p}")));
        }
        Ok(Self {
            ticker,
            days,
            adj_close,
        })
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn price_at(&self, day: usize) -> Option<f64> {
        self.days
            .binary_search(&day)
            .ok()
            .map(|pos| self.adj_close[pos])
    }

    /// Log returns over consecutive observations of this series, tagged
    /// with the calendar day of the later observation.
    pub fn log_return_series(&self) -> Result<Vec<(usize, f64)>> {
        if self.len() < 2 {
            return Err(Error::Insufficient(format!(
                "{}: need at least 2 prices for returns",
                self.ticker
            )));
        }
        Ok(self
            .adj_close
            .windows(2)
            .zip(self.days.windows(2))
            .map(|(p, d)| (d[1], (p[1] / p[0]).ln()))
            .collect())
    }

    /// Calendar-aligned one-day log returns: entry t is ln(p_t / p_{t-1})
    /// and is defined only when both t-1 and t are priced.
    pub fn returns_by_day(&self, calendar_len: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; calendar_len];
        for (p, d) in self.adj_close.windows(2).zip(self.days.windows(2)) {
            if d[1] == d[0] + 1 && d[1] < calendar_len {
                out[d[1]] = Some((p[1] / p[0]).ln());
            }
        }
        out
    }

    /// Log return between day `t` and day `t + m_days`, both endpoints
    /// required.
    pub fn forward_return(&self, t: usize, m_days: usize) -> Result<f64> {
        let start = self.price_at(t).ok_or_else(|| {
            Error::MissingData(format!("{}: no price at day {t}", self.ticker))
        })?;
        let end_day = t + m_days;
        let end = self.price_at(end_day).ok_or_else(|| {
            Error::MissingData(format!("{}: no price at day {end_day}", self.ticker))
        })?;
        Ok((end / start).ln())
    }
}

/// Parses a `date,adjusted_close` CSV into sorted rows. Rows are sorted
/// by date; duplicate dates and nonpositive prices are errors.
pub fn load_price_file<P: AsRef<Path>>(path: P) -> Result<Vec<(NaiveDate, f64)>> {
    let path_str = path.as_ref().display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "date" || &headers[1] != "adjusted_close" {
        return Err(Error::Schema(format!(
            "{path_str}: expected header `date,adjusted_close`"
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record?;
        let date = record[0].parse::<NaiveDate>().map_err(|e| Error::Parse {
            path: path_str.clone(),
            line,
            message: format!("bad date `{}`: {e}", &record[0]),
        })?;
        let price = record[1].parse::<f64>().map_err(|e| Error::Parse {
            path: path_str.clone(),
            line,
            message: format!("bad price `{}`: {e}", &record[1]),
        })?;
        if price.is_nan() || price <= 0.0 {
            return Err(Error::Parse {
                path: path_str.clone(),
                line,
                message: format!("nonpositive price {price}"),
            });
        }
        rows.push((date, price));
    }
    rows.sort_by_key(|(d, _)| *d);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Schema(format!(
                "{path_str}: duplicate date {}",
                w[0].0
            )));
        }
    }
    Ok(rows)
}

/// The calendar is exactly the dates present in the market-index file.
pub fn infer_calendar(index_rows: &[(NaiveDate, f64)]) -> Result<TradingCalendar> {
    TradingCalendar::new(index_rows.iter().map(|(d, _)| *d).collect())
}

/// Builds a price series on the shared calendar: dates missing from the
/// calendar are dropped, calendar days missing from the file stay gaps.
pub fn series_on_calendar(
    ticker: &str,
    rows: &[(NaiveDate, f64)],
    calendar: &TradingCalendar,
) -> Result<PriceSeries> {
    let mut days = Vec::new();
    let mut prices = Vec::new();
    for (date, price) in rows {
        if let Some(idx) = calendar.index_of(*date) {
            days.push(idx);
            prices.push(*price);
        }
    }
    PriceSeries::new(ticker, days, prices)
}

/// Loads one `<TICKER>.csv` per file from a directory.
pub fn load_prices<P: AsRef<Path>>(
    dir: P,
    calendar: &TradingCalendar,
) -> Result<BTreeMap<String, PriceSeries>> {
    let mut out = BTreeMap::new();
    let mut paths: Vec<_> = std::fs::read_dir(dir.as_ref())?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    for path in paths {
        let ticker = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Invalid(format!("bad price file name {path:?}")))?
            .to_uppercase();
        let rows = load_price_file(&path)?;
        out.insert(ticker.clone(), series_on_calendar(&ticker, &rows, calendar)?);
    }
    Ok(out)
}

/// Loads a monthly series (`date,adjusted_close` with one row per month)
/// keyed by (year, month).
pub fn load_monthly_series<P: AsRef<Path>>(path: P) -> Result<BTreeMap<(i32, u32), f64>> {
    use chrono::Datelike;
    let rows = load_price_file(&path)?;
    let mut out = BTreeMap::new();
    for (date, value) in rows {
        let key = (date.year(), date.month());
        if out.insert(key, value).is_some() {
            return Err(Error::Schema(format!(
                "{}: duplicate month {}-{:02}",
                path.as_ref().display(),
                key.0,
                key.1
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn calendar_is_index_dates() {
        let rows = vec![
            (date("2021-03-01"), 10.0),
            (date("2021-03-02"), 11.0),
            (date("2021-03-04"), 12.0),
        ];
        let cal = infer_calendar(&rows).unwrap();
        assert_eq!(cal.len(), 3);
        assert_eq!(cal.date(2), date("2021-03-04"));
    }

    #[test]
    fn empty_index_is_an_error() {
        assert!(infer_calendar(&[]).is_err());
    }

    #[test]
    fn unsorted_file_yields_sorted_calendar() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,adjusted_close").unwrap();
        writeln!(f, "2021-03-04,12").unwrap();
        writeln!(f, "2021-03-01,10").unwrap();
        writeln!(f, "2021-03-02,11").unwrap();
        let rows = load_price_file(f.path()).unwrap();
        let cal = infer_calendar(&rows).unwrap();
        assert_eq!(
            cal.dates(),
            &[date("2021-03-01"), date("2021-03-02"), date("2021-03-04")]
        );
    }

    #[test]
    fn duplicate_dates_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,adjusted_close").unwrap();
        writeln!(f, "2021-03-01,10").unwrap();
        writeln!(f, "2021-03-01,11").unwrap();
        assert!(load_price_file(f.path()).is_err());
    }

    #[test]
    fn non_numeric_price_reports_row() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,adjusted_close").unwrap();
        writeln!(f, "2021-03-01,10").unwrap();
        writeln!(f, "2021-03-02,oops").unwrap();
        match load_price_file(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn log_returns_basic() {
        let s = PriceSeries::new("X", vec![0, 1], vec![100.0, 110.0]).unwrap();
        let r = s.log_return_series().unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].1 - 1.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_prices_zero_returns() {
        let s = PriceSeries::new("X", vec![0, 1, 2, 3], vec![50.0; 4]).unwrap();
        assert!(s.log_return_series().unwrap().iter().all(|(_, r)| *r == 0.0));
    }

    #[test]
    fn telescoping_returns() {
        let s = PriceSeries::new("X", vec![0, 1, 2], vec![100.0, 50.0, 100.0]).unwrap();
        let r = s.log_return_series().unwrap();
        assert!((r[0].1 + 2.0f64.ln()).abs() < 1e-12);
        assert!((r[1].1 - 2.0f64.ln()).abs() < 1e-12);
        assert!((r[0].1 + r[1].1).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_price_rejected() {
        assert!(PriceSeries::new("X", vec![0, 1], vec![100.0, 0.0]).is_err());
        assert!(PriceSeries::new("X", vec![0, 1], vec![100.0, -3.0]).is_err());
    }

    #[test]
    fn forward_return_cases() {
        let prices: Vec<f64> = (1..=12).map(|i| 100.0 * 1.01f64.powi(i)).collect();
        let s = PriceSeries::new("X", (0..12).collect(), prices).unwrap();
        assert_eq!(s.forward_return(3, 0).unwrap(), 0.0);
        let r1 = s.forward_return(3, 1).unwrap();
        let by_day = s.returns_by_day(12);
        assert!((r1 - by_day[4].unwrap()).abs() < 1e-15);
        let r10 = s.forward_return(1, 10).unwrap();
        let sum: f64 = (2..=11).map(|t| by_day[t].unwrap()).sum();
        assert!((r10 - sum).abs() < 1e-12);
    }

    #[test]
    fn forward_return_names_missing_endpoint() {
        let s = PriceSeries::new("X", vec![0, 1, 3], vec![10.0, 11.0, 12.0]).unwrap();
        match s.forward_return(1, 1) {
            Err(Error::MissingData(msg)) => assert!(msg.contains("day 2")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(s.forward_return(4, 1).is_err());
    }

    #[test]
    fn forward_return_decomposes() {
        let prices: Vec<f64> = vec![
            100.0, 103.5, 99.2, 101.7, 108.4, 95.5, 97.3, 104.2, 102.8, 110.9, 107.3, 111.0,
        ];
        let s = PriceSeries::new("X", (0..12).collect(), prices).unwrap();
        for (t, m1, m2) in [(0usize, 3usize, 4usize), (2, 1, 8), (1, 5, 5)] {
            let whole = s.forward_return(t, m1 + m2).unwrap();
            let split = s.forward_return(t, m1).unwrap() + s.forward_return(t + m1, m2).unwrap();
            assert!((whole - split).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_identity() {
        let prices = vec![100.0, 103.5, 99.2, 101.7, 108.4, 95.5];
        let s = PriceSeries::new("X", (0..6).collect(), prices.clone()).unwrap();
        let total: f64 = s.log_return_series().unwrap().iter().map(|(_, r)| r).sum();
        let recon = total.exp() * prices[0];
        assert!(((recon - prices[5]) / prices[5]).abs() < 1e-12);
    }

    #[test]
    fn series_alignment_and_gaps() {
        let cal = TradingCalendar::new(vec![
            date("2021-03-01"),
            date("2021-03-02"),
            date("2021-03-03"),
            date("2021-03-04"),
        ])
        .unwrap();
        // extra non-trading date dropped; IPO mid-calendar keeps early gap
        let rows = vec![
            (date("2021-03-02"), 10.0),
            (date("2021-03-03"), 11.0),
            (date("2021-03-06"), 99.0),
        ];
        let s = series_on_calendar("X", &rows, &cal).unwrap();
        assert_eq!(s.days, vec![1, 2]);
        let by_day = s.returns_by_day(cal.len());
        assert_eq!(by_day[0], None);
        assert_eq!(by_day[1], None);
        assert!(by_day[2].is_some());
        assert_eq!(by_day[3], None);
    }

    #[test]
    fn align_weekend_post_to_monday() {
        // 2021-03-06 is a Saturday
        let cal = TradingCalendar::new(vec![
            date("2021-03-04"),
            date("2021-03-05"),
            date("2021-03-08"),
            date("2021-03-09"),
        ])
        .unwrap();
        let saturday_noon = date("2021-03-06").and_hms_opt(12, 0, 0).unwrap().and_utc().timestamp();
        assert_eq!(cal.align(saturday_noon).unwrap(), 2);
    }

    #[test]
    fn align_intraday_and_after_close() {
        use chrono::TimeZone;
        let cal = TradingCalendar::new(vec![
            date("2021-06-01"), // Tuesday, EDT
            date("2021-06-02"),
        ])
        .unwrap();
        let tue_10am = New_York
            .with_ymd_and_hms(2021, 6, 1, 10, 0, 0)
            .unwrap()
            .timestamp();
        assert_eq!(cal.align(tue_10am).unwrap(), 0);
        let tue_5pm = New_York
            .with_ymd_and_hms(2021, 6, 1, 17, 0, 0)
            .unwrap()
            .timestamp();
        assert_eq!(cal.align(tue_5pm).unwrap(), 1);
        let after_last = New_York
            .with_ymd_and_hms(2021, 6, 2, 16, 0, 1)
            .unwrap()
            .timestamp();
        assert!(matches!(cal.align(after_last), Err(Error::AfterCalendar(_))));
    }

    #[test]
    fn close_time_respects_dst() {
        // EST: close at 21:00 UTC; EDT: close at 20:00 UTC
        let winter = close_ts_of(date("2021-01-15"));
        let summer = close_ts_of(date("2021-07-15"));
        let winter_utc = chrono::DateTime::from_timestamp(winter, 0).unwrap();
        let summer_utc = chrono::DateTime::from_timestamp(summer, 0).unwrap();
        assert_eq!(winter_utc.format("%H:%M").to_string(), "21:00");
        assert_eq!(summer_utc.format("%H:%M").to_string(), "20:00");
    }
}

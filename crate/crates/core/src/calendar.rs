//! Trading-day calendar and the publication-time to trading-day mapping.

use chrono::{DateTime, Datelike, Duration, NaiveDate, NaiveTime, Utc, Weekday};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalendarError {
    #[error("market open {open} must precede close {close}")]
    OpenAfterClose { open: NaiveTime, close: NaiveTime },
    #[error("holiday {0} falls on a weekend; weekends are handled by rule")]
    WeekendHoliday(NaiveDate),
}

/// How weekend publications map to trading days. Only one rule exists today;
/// the enum keeps the config format explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeekendRule {
    #[default]
    MapToMonday,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingCalendar {
    pub market_open: NaiveTime,
    pub market_close: NaiveTime,
    /// Local market time minus UTC, in whole hours.
    pub timezone_offset_hours: i32,
    pub holidays: BTreeSet<NaiveDate>,
    #[serde(default)]
    pub weekend_rule: WeekendRule,
}

impl Default for TradingCalendar {
    fn default() -> Self {
        Self {
            market_open: NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            market_close: NaiveTime::from_hms_opt(17, 30, 0).unwrap(),
            timezone_offset_hours: 1,
            holidays: BTreeSet::new(),
            weekend_rule: WeekendRule::MapToMonday,
        }
    }
}

fn is_weekend(d: NaiveDate) -> bool {
    matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

impl TradingCalendar {
    pub fn validate(&self) -> Result<(), CalendarError> {
        if self.market_open >= self.market_close {
            return Err(CalendarError::OpenAfterClose {
                open: self.market_open,
                close: self.market_close,
            });
        }
        if let Some(&d) = self.holidays.iter().find(|&&d| is_weekend(d)) {
            return Err(CalendarError::WeekendHoliday(d));
        }
        Ok(())
    }

    pub fn is_trading_day(&self, d: NaiveDate) -> bool {
        !is_weekend(d) && !self.holidays.contains(&d)
    }

    /// First trading day strictly after `d`.
    pub fn next_trading_day(&self, d: NaiveDate) -> NaiveDate {
        let mut e = d + Duration::days(1);
        // Holiday sets are finite; bail out of pathological configs.
        for _ in 0..3660 {
            if self.is_trading_day(e) {
                return e;
            }
            e += Duration::days(1);
        }
        e
    }

    /// Maps a UTC publication instant to the trading day it informs.
    ///
    /// Rules, in order of the publication's local date:
    /// - weekend: the following Monday, unless that Monday is a holiday
    ///   (then the article is omitted);
    /// - holiday: omitted;
    /// - trading day, local time at or before the close: that same day
    ///   (overnight publications inform the session that has not closed yet);
    /// - trading day, after the close: the next trading day.
    pub fn assign_trading_day(&self, published_at_utc: DateTime<Utc>) -> Option<NaiveDate> {
        let local = published_at_utc + Duration::hours(self.timezone_offset_hours.into());
        let date = local.date_naive();
        let time = local.time();

        if is_weekend(date) {
            let days_to_monday = match date.weekday() {
                Weekday::Sat => 2,
                Weekday::Sun => 1,
                _ => unreachable!(),
            };
            let monday = date + Duration::days(days_to_monday);
            if self.holidays.contains(&monday) {
                return None;
            }
            return Some(monday);
        }
        if self.holidays.contains(&date) {
            return None;
        }
        if time > self.market_close {
            Some(self.next_trading_day(date))
        } else {
            Some(date)
        }
    }

    /// All trading days in `[start, end]`, ascending.
    pub fn trading_days(&self, start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
        let mut out = Vec::new();
        let mut d = start;
        while d <= end {
            if self.is_trading_day(d) {
                out.push(d);
            }
            d += Duration::days(1);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDateTime;

    fn utc(s: &str) -> DateTime<Utc> {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S")
            .unwrap()
            .and_utc()
    }

    fn cal() -> TradingCalendar {
        // Offset 0 keeps the test times readable.
        TradingCalendar {
            timezone_offset_hours: 0,
            ..TradingCalendar::default()
        }
    }

    #[test]
    fn in_hours_weekday_maps_to_same_day() {
        // Tuesday 2018-05-29
        let d = cal().assign_trading_day(utc("2018-05-29 10:00:00"));
        assert_eq!(d, Some(NaiveDate::from_ymd_opt(2018, 5, 29).unwrap()));
    }

    #[test]
    fn after_close_maps_to_next_trading_day() {
        let d = cal().assign_trading_day(utc("2018-05-29 18:00:00"));
        assert_eq!(d, Some(NaiveDate::from_ymd_opt(2018, 5, 30).unwrap()));
    }

    #[test]
    fn weekend_maps_to_monday() {
        // Saturday 2018-06-02 -> Monday 2018-06-04
        let d = cal().assign_trading_day(utc("2018-06-02 12:00:00"));
        assert_eq!(d, Some(NaiveDate::from_ymd_opt(2018, 6, 4).unwrap()));
        let d = cal().assign_trading_day(utc("2018-06-03 12:00:00"));
        assert_eq!(d, Some(NaiveDate::from_ymd_opt(2018, 6, 4).unwrap()));
    }

    #[test]
    fn weekend_before_holiday_monday_is_omitted() {
        let mut c = cal();
        c.holidays
            .insert(NaiveDate::from_ymd_opt(2018, 6, 4).unwrap());
        assert_eq!(c.assign_trading_day(utc("2018-06-02 12:00:00")), None);
    }

    #[test]
    fn holiday_publication_is_omitted() {
        let mut c = cal();
        c.holidays
            .insert(NaiveDate::from_ymd_opt(2018, 5, 29).unwrap());
        assert_eq!(c.assign_trading_day(utc("2018-05-29 10:00:00")), None);
    }

    #[test]
    fn before_open_informs_the_upcoming_session() {
        let d = cal().assign_trading_day(utc("2018-05-29 03:00:00"));
        assert_eq!(d, Some(NaiveDate::from_ymd_opt(2018, 5, 29).unwrap()));
    }

    #[test]
    fn friday_after_close_skips_weekend_and_holidays() {
        let mut c = cal();
        c.holidays
            .insert(NaiveDate::from_ymd_opt(2018, 6, 4).unwrap());
        // Friday 2018-06-01 evening: Monday is a holiday, so Tuesday.
        let d = c.assign_trading_day(utc("2018-06-01 18:00:00"));
        assert_eq!(d, Some(NaiveDate::from_ymd_opt(2018, 6, 5).unwrap()));
    }

    #[test]
    fn timezone_offset_shifts_the_local_clock() {
        // 16:45 UTC is 17:45 local at +1: after close, next day.
        let c = TradingCalendar::default();
        let d = c.assign_trading_day(utc("2018-05-29 16:45:00"));
        assert_eq!(d, Some(NaiveDate::from_ymd_opt(2018, 5, 30).unwrap()));
    }

    #[test]
    fn trading_days_excludes_weekends_and_holidays() {
        let mut c = cal();
        c.holidays
            .insert(NaiveDate::from_ymd_opt(2018, 5, 30).unwrap());
        let days = c.trading_days(
            NaiveDate::from_ymd_opt(2018, 5, 28).unwrap(),
            NaiveDate::from_ymd_opt(2018, 6, 4).unwrap(),
        );
        let expect: Vec<NaiveDate> = ["2018-05-28", "2018-05-29", "2018-05-31", "2018-06-01", "2018-06-04"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(days, expect);
    }

    #[test]
    fn weekend_holiday_rejected() {
        let mut c = cal();
        c.holidays
            .insert(NaiveDate::from_ymd_opt(2018, 6, 2).unwrap());
        assert!(c.validate().is_err());
    }
}

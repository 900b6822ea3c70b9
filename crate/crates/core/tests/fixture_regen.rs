//! Deterministic generators for the checked-in fixtures. Run explicitly to
//! regenerate after a format change:
//!
//! ```text
//! cargo test -p newsquant --test fixture_regen -- --ignored
//! ```

mod support;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use std::fmt::Write as _;
use support::TestRng;

const ALLOWED_OUTLETS: [&str; 3] = ["corriere.example", "sole24.example", "gazzetta.example"];
const MATCHING_THEMES: [&str; 2] = ["WB_MACRO_VULN_DEBT", "WB_MACRO_POLICY_FISCAL"];
const OTHER_THEMES: [&str; 2] = ["SPORTS_FOOTBALL", "WEATHER_RAIN"];
const HOLIDAY: &str = "2018-06-04";

fn is_weekend(d: NaiveDate) -> bool {
    matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

fn fixture_days(start: &str, end: &str) -> Vec<NaiveDate> {
    let start: NaiveDate = start.parse().unwrap();
    let end: NaiveDate = end.parse().unwrap();
    let holiday: NaiveDate = HOLIDAY.parse().unwrap();
    let mut out = Vec::new();
    let mut d = start;
    while d <= end {
        if !is_weekend(d) && d != holiday {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

struct RecordSpec {
    id: usize,
    date: NaiveDate,
    hhmm: (u32, u32),
    outlet: &'static str,
    matching_themes: usize,
    other_themes: usize,
    /// (country, mentions) pairs; one location block per mention.
    locations: Vec<(&'static str, u32)>,
    wc: Option<u64>,
    distress: u64,
    panic: u64,
    lm_neg: u64,
}

impl RecordSpec {
    fn to_line(&self) -> String {
        let mut themes = Vec::new();
        for k in 0..self.matching_themes {
            themes.push(MATCHING_THEMES[k % MATCHING_THEMES.len()]);
        }
        for k in 0..self.other_themes {
            themes.push(OTHER_THEMES[k % OTHER_THEMES.len()]);
        }
        let mut blocks = Vec::new();
        for (country, count) in &self.locations {
            for _ in 0..*count {
                blocks.push(format!("1#Somewhere#{country}"));
            }
        }
        let mut gcam = Vec::new();
        if let Some(wc) = self.wc {
            gcam.push(format!("wc:{wc}"));
        }
        gcam.push(format!("d1:{}", self.distress));
        gcam.push(format!("p1:{}", self.panic));
        gcam.push(format!("lmn:{}", self.lm_neg));
        format!(
            "REC{:04}\t{}{:02}{:02}00\t{}\t{}\t{}\t{}",
            self.id,
            self.date.format("%Y%m%d"),
            self.hhmm.0,
            self.hhmm.1,
            self.outlet,
            themes.join(";"),
            blocks.join(";"),
            gcam.join(",")
        )
    }
}

fn passer(rng: &mut TestRng, id: usize, date: NaiveDate, hhmm: (u32, u32)) -> RecordSpec {
    RecordSpec {
        id,
        date,
        hhmm,
        outlet: ALLOWED_OUTLETS[rng.below(ALLOWED_OUTLETS.len())],
        matching_themes: 4 + rng.below(4),
        other_themes: rng.below(3),
        locations: vec![("IT", 2 + rng.below(3) as u32), ("ES", 1), ("FR", 1)],
        wc: Some(100 + rng.below(300) as u64),
        distress: 1 + rng.below(12) as u64,
        panic: rng.below(7) as u64,
        lm_neg: 3 + rng.below(18) as u64,
    }
}

/// The full 500-record corpus. Composition:
/// - a base load of passing articles on every trading day,
/// - weekend and after-close articles that remap to later trading days,
/// - holiday and weekend-before-holiday articles that must be omitted,
/// - one representative of every filter-failure mode,
/// - articles that pass only under the paired focus.
fn generate_records() -> Vec<RecordSpec> {
    let mut rng = TestRng(0x5eed_f117);
    let mut records = Vec::new();
    let mut id = 0;
    let mut next_id = || {
        id += 1;
        id
    };
    let trading = fixture_days("2018-05-01", "2018-07-31");
    let holiday: NaiveDate = HOLIDAY.parse().unwrap();

    for &day in &trading {
        for _ in 0..3 {
            let hhmm = (10 + rng.below(6) as u32, rng.below(60) as u32);
            records.push(passer(&mut rng, next_id(), day, hhmm));
        }
    }

    // After-close publications on every third trading day.
    for &day in trading.iter().step_by(3) {
        let mut r = passer(&mut rng, next_id(), day, (18, 15));
        r.distress += 1;
        records.push(r);
    }

    // Weekend publications, including the weekend preceding the holiday.
    let mut d: NaiveDate = "2018-05-01".parse().unwrap();
    let end: NaiveDate = "2018-07-31".parse().unwrap();
    while d <= end {
        if is_weekend(d) {
            records.push(passer(&mut rng, next_id(), d, (12, 30)));
        }
        d += Duration::days(1);
    }

    // Published on the holiday itself: omitted.
    for _ in 0..3 {
        records.push(passer(&mut rng, next_id(), holiday, (11, 0)));
    }

    // Filter-failure modes, one per trading day, cycling.
    for (k, &day) in trading.iter().enumerate() {
        let mut r = passer(&mut rng, next_id(), day, (14, 45));
        match k % 8 {
            0 => r.wc = Some(99),
            1 => r.wc = None,
            2 => r.outlet = "blogspam.example",
            3 => r.matching_themes = 3,
            4 => {
                r.matching_themes = 0;
                r.other_themes = 0;
            }
            5 => r.locations = vec![("FR", 5), ("IT", 1)],
            6 => r.locations = vec![("IT", 2), ("ES", 2), ("FR", 2)],
            7 => r.locations = vec![],
            _ => unreachable!(),
        }
        records.push(r);
    }

    // Paired-focus admissions: ES-dominant and exact {IT, ES} ties.
    for (k, &day) in trading.iter().enumerate() {
        if k % 3 == 0 {
            let mut r = passer(&mut rng, next_id(), day, (15, 20));
            r.locations = vec![("ES", 3 + rng.below(2) as u32), ("IT", 1)];
            records.push(r);
        }
        if k % 4 == 0 {
            let mut r = passer(&mut rng, next_id(), day, (16, 5));
            let c = 2 + rng.below(2) as u32;
            r.locations = vec![("IT", c), ("ES", c)];
            records.push(r);
        }
    }

    // Pad with extra in-hours passers, rotating over trading days.
    let mut k = 0;
    while records.len() < 500 {
        let day = trading[k % trading.len()];
        records.push(passer(&mut rng, next_id(), day, (9, 30)));
        k += 1;
    }
    records.truncate(500);
    records
}

fn generate_market_csv() -> String {
    let mut rng = TestRng(0x000a_94e7_0d17);
    let mut out = String::from("date,spread,crd,liq,vstoxx\n");
    let days = fixture_days("2018-04-23", "2018-08-10");
    let mut spread = 130.0;
    let mut liq = 5.0;
    let mut vstoxx = 20.0;
    for d in days {
        spread += rng.normal() * 4.0;
        liq = (liq + rng.normal() * 0.2).max(0.5);
        vstoxx = (vstoxx + rng.normal() * 0.8).max(5.0);
        let crd = rng.normal();
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{:.4}",
            d, spread, crd, liq, vstoxx
        );
    }
    out
}

#[test]
#[ignore = "writes the checked-in fixtures"]
fn regenerate_fixtures() {
    let dir = support::fixture_path("");
    std::fs::create_dir_all(&dir).unwrap();
    let lines: Vec<String> = generate_records().iter().map(RecordSpec::to_line).collect();
    std::fs::write(dir.join("gkg_500.tsv"), lines.join("\n") + "\n").unwrap();
    std::fs::write(dir.join("market_demo.csv"), generate_market_csv()).unwrap();
    eprintln!("fixtures written to {}", dir.display());
}

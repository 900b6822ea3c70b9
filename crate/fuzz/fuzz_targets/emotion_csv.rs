//! Fuzzes the emotion-series CSV reader; accepted series must round-trip
//! through the writer.

#![no_main]

use libfuzzer_sys::fuzz_target;
use newsquant::emotion::EmotionSeries;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(series) = EmotionSeries::from_csv("fuzz", text) {
        let again = EmotionSeries::from_csv("fuzz", &series.to_csv()).expect("round trip");
        assert_eq!(series.dates, again.dates);
        assert_eq!(series.standardized, again.standardized);
    }
});

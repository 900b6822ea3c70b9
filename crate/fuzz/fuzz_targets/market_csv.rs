//! Fuzzes the market CSV loader: must never panic, and accepted series must
//! come back sorted and duplicate-free.

#![no_main]

use libfuzzer_sys::fuzz_target;
use newsquant::market::{load_market_reader, MarketCsvSchema};

fuzz_target!(|data: &[u8]| {
    if let Ok(series) = load_market_reader(data, &MarketCsvSchema::default(), "XX") {
        assert!(!series.dates.is_empty());
        assert!(series.dates.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(series.dates.len(), series.spread.len());
    }
});

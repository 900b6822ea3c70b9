//! Fuzzes the critical-value table parser; accepted tables must round-trip
//! and answer lookups without panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;
use newsquant::fluct::CvTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = CvTable::parse(text) {
        let again = CvTable::parse(&table.to_csv()).expect("canonical table parses");
        assert_eq!(again.rows.len(), table.rows.len());
        for mu in [0.05, 0.1, 0.3, 0.55, 0.9, 0.95] {
            let _ = table.critical_value(mu, 0.05, 500, true);
            let _ = table.critical_value(mu, 0.05, 500, false);
        }
    }
});

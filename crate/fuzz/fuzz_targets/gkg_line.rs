//! Fuzzes the GKG line parser; successful parses must survive a
//! format/re-parse round trip unchanged.

#![no_main]

use libfuzzer_sys::fuzz_target;
use newsquant::gkg::{format_gkg_line, parse_gkg_line, GkgSchema};

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    let compact = GkgSchema {
        record_id: Some(0),
        date: 1,
        source: 2,
        themes: 3,
        locations: 4,
        gcam: 5,
        location_country_subfield: 2,
        word_count_key: "wc".into(),
    };
    for schema in [GkgSchema::default(), compact] {
        if let Ok(record) = parse_gkg_line(line, &schema) {
            if let Ok(out) = format_gkg_line(&record, &schema) {
                let again = parse_gkg_line(&out, &schema).expect("formatted line parses");
                assert_eq!(record, again);
            }
        }
    }
});

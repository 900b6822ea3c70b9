//! Fuzzes the GCAM count-blob parser; accepted maps must re-serialize and
//! re-parse to the same map.

#![no_main]

use libfuzzer_sys::fuzz_target;
use newsquant::gkg::parse_gcam;

fuzz_target!(|data: &[u8]| {
    let Ok(blob) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = parse_gcam(blob) {
        let rebuilt: Vec<String> = map.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let again = parse_gcam(&rebuilt.join(",")).expect("canonical blob parses");
        assert_eq!(map, again);
    }
});

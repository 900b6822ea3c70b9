//! Fuzzes the lexicon-map parser (word-list paths disabled, so the fuzzer
//! cannot touch the filesystem).

#![no_main]

use libfuzzer_sys::fuzz_target;
use newsquant::emotion::parse_lexicons;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(lexicons) = parse_lexicons(text, None) {
        assert!(!lexicons.is_empty());
        for lex in &lexicons {
            assert!(lex.validate().is_ok());
        }
    }
});

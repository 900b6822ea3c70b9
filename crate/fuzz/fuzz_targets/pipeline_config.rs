//! Fuzzes the pipeline configuration parser and its validators.

#![no_main]

use libfuzzer_sys::fuzz_target;
use newsquant::config::PipelineConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = PipelineConfig::parse_str(text) {
        let _ = cfg.validate();
        let _ = cfg.event_calendar().validate();
    }
});

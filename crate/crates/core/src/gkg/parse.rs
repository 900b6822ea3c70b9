//! Wire-format parsing for GKG-style lines.

use super::{CountryCode, GkgRecord, GkgSchema};
use chrono::NaiveDateTime;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GkgParseError {
    #[error("malformed line: schema needs {expected} columns, found {found}")]
    MalformedLine { expected: usize, found: usize },
    #[error("bad timestamp {0:?}: expected 14-digit YYYYMMDDHHMMSS")]
    BadTimestamp(String),
    #[error("bad gcam entry {0:?}")]
    BadGcam(String),
}

/// Parses a comma-delimited `key:count` blob into a count map.
///
/// Each entry splits on its last colon, so keys may themselves contain
/// colons. Duplicate keys are summed. Empty segments (including the empty
/// blob) are skipped.
pub fn parse_gcam(blob: &str) -> Result<BTreeMap<String, u64>, GkgParseError> {
    let mut out = BTreeMap::new();
    for seg in blob.split(',') {
        if seg.is_empty() {
            continue;
        }
        let (key, count) = seg
            .rsplit_once(':')
            .ok_or_else(|| GkgParseError::BadGcam(seg.to_string()))?;
        if key.is_empty() {
            return Err(GkgParseError::BadGcam(seg.to_string()));
        }
        let n: u64 = count
            .parse()
            .map_err(|_| GkgParseError::BadGcam(seg.to_string()))?;
        let slot = out.entry(key.to_string()).or_insert(0u64);
        *slot = slot
            .checked_add(n)
            .ok_or_else(|| GkgParseError::BadGcam(seg.to_string()))?;
    }
    Ok(out)
}

fn parse_timestamp(raw: &str) -> Result<NaiveDateTime, GkgParseError> {
    if raw.len() != 14 || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return Err(GkgParseError::BadTimestamp(raw.to_string()));
    }
    NaiveDateTime::parse_from_str(raw, "%Y%m%d%H%M%S")
        .map_err(|_| GkgParseError::BadTimestamp(raw.to_string()))
}

/// Parses one tab-separated line into a [`GkgRecord`].
///
/// Location blocks are `#`-delimited; the country code sits at the schema's
/// configured subfield. Blocks without a country code are skipped; repeated
/// countries aggregate into one mention count.
pub fn parse_gkg_line(line: &str, schema: &GkgSchema) -> Result<GkgRecord, GkgParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    let expected = schema.min_columns();
    if fields.len() < expected {
        return Err(GkgParseError::MalformedLine {
            expected,
            found: fields.len(),
        });
    }

    let published = parse_timestamp(fields[schema.date])?.and_utc();

    let themes: Vec<String> = fields[schema.themes]
        .split(';')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();

    let mut locations: Vec<(CountryCode, u32)> = Vec::new();
    for block in fields[schema.locations].split(';') {
        if block.is_empty() {
            continue;
        }
        let code = block
            .split('#')
            .nth(schema.location_country_subfield)
            .unwrap_or("");
        if code.is_empty() {
            continue;
        }
        match locations.iter_mut().find(|(c, _)| c.as_str() == code) {
            Some((_, n)) => *n += 1,
            None => locations.push((CountryCode::from(code), 1)),
        }
    }

    let gcam = parse_gcam(fields[schema.gcam])?;
    let word_count = gcam.get(&schema.word_count_key).copied();

    Ok(GkgRecord {
        record_id: schema
            .record_id
            .map(|i| fields[i].to_string())
            .unwrap_or_default(),
        published_at_utc: published,
        outlet: fields[schema.source].to_string(),
        themes,
        locations,
        gcam,
        word_count,
    })
}

#[derive(Debug, Error)]
pub enum GkgFormatError {
    #[error("field {0:?} contains a reserved delimiter")]
    ReservedDelimiter(String),
}

fn check_clean(s: &str, extra: &[char]) -> Result<(), GkgFormatError> {
    if s.contains('\t') || s.contains('\n') || extra.iter().any(|&c| s.contains(c)) {
        return Err(GkgFormatError::ReservedDelimiter(s.to_string()));
    }
    Ok(())
}

/// Serializes a record back to the line format described by `schema`.
/// One location block is written per mention so that re-parsing aggregates
/// to the original counts.
pub fn format_gkg_line(record: &GkgRecord, schema: &GkgSchema) -> Result<String, GkgFormatError> {
    let mut fields = vec![String::new(); schema.min_columns()];

    if let Some(i) = schema.record_id {
        check_clean(&record.record_id, &[])?;
        fields[i] = record.record_id.clone();
    }
    fields[schema.date] = record
        .published_at_utc
        .naive_utc()
        .format("%Y%m%d%H%M%S")
        .to_string();
    check_clean(&record.outlet, &[])?;
    fields[schema.source] = record.outlet.clone();

    for t in &record.themes {
        check_clean(t, &[';'])?;
    }
    fields[schema.themes] = record.themes.join(";");

    let mut blocks = Vec::new();
    for (code, count) in &record.locations {
        check_clean(code.as_str(), &[';', '#'])?;
        let mut block = "#".repeat(schema.location_country_subfield);
        block.push_str(code.as_str());
        for _ in 0..*count {
            blocks.push(block.clone());
        }
    }
    fields[schema.locations] = blocks.join(";");

    let mut entries = Vec::new();
    for (k, v) in &record.gcam {
        check_clean(k, &[',', ':'])?;
        entries.push(format!("{k}:{v}"));
    }
    fields[schema.gcam] = entries.join(",");

    Ok(fields.join("\t"))
}

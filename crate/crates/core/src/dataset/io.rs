//! Canonical record files.
//!
//! CSV files carry a header row with exactly [`RECORD_COLUMNS`]; labeled
//! files append a trailing `hit` column. Files ending in `.jsonl` or
//! `.ndjson` hold one JSON object per line with the same field names.

use std::fs;
use std::io::Read;
use std::path::Path;

use super::label::LabeledTrack;
use super::record::{TrackRecord, HIT_COLUMN, RECORD_COLUMNS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    JsonLines,
}

impl FileFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => FileFormat::JsonLines,
            _ => FileFormat::Csv,
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<TrackRecord>> {
    let bytes = read_file(path)?;
    match FileFormat::from_path(path) {
        FileFormat::Csv => parse_csv(&bytes[..], false).map(|rows| rows.into_iter().map(|(r, _)| r).collect()),
        FileFormat::JsonLines => parse_jsonl::<TrackRecord>(&bytes, |r| r.validate()),
    }
}

pub fn read_labeled(path: &Path) -> Result<Vec<LabeledTrack>> {
    let bytes = read_file(path)?;
    match FileFormat::from_path(path) {
        FileFormat::Csv => parse_csv(&bytes[..], true).map(|rows| {
            rows.into_iter()
                .map(|(record, hit)| LabeledTrack {
                    record,
                    hit: hit.expect("hit column is required"),
                })
                .collect()
        }),
        FileFormat::JsonLines => parse_jsonl::<LabeledTrack>(&bytes, |t| {
            t.record.validate()?;
            check_hit(t.hit)
        }),
    }
}

pub fn write_records(path: &Path, records: &[TrackRecord]) -> Result<()> {
    write_file(path, &encode_records(records, FileFormat::from_path(path))?)
}

pub fn write_labeled(path: &Path, tracks: &[LabeledTrack]) -> Result<()> {
    write_file(path, &encode_labeled(tracks, FileFormat::from_path(path))?)
}

pub fn encode_records(records: &[TrackRecord], format: FileFormat) -> Result<Vec<u8>> {
    match format {
        FileFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(RECORD_COLUMNS).map_err(csv_write_err)?;
            for r in records {
                w.write_record(r.to_fields()).map_err(csv_write_err)?;
            }
            w.into_inner().map_err(|e| csv_write_err(e.into_error().into()))
        }
        FileFormat::JsonLines => encode_jsonl(records),
    }
}

pub fn encode_labeled(tracks: &[LabeledTrack], format: FileFormat) -> Result<Vec<u8>> {
    match format {
        FileFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let header = RECORD_COLUMNS.iter().copied().chain([HIT_COLUMN]);
            w.write_record(header).map_err(csv_write_err)?;
            for t in tracks {
                let mut fields = t.record.to_fields();
                fields.push(t.hit.to_string());
                w.write_record(fields).map_err(csv_write_err)?;
            }
            w.into_inner().map_err(|e| csv_write_err(e.into_error().into()))
        }
        FileFormat::JsonLines => encode_jsonl(tracks),
    }
}

fn encode_jsonl<T: serde::Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    Ok(out)
}

fn csv_write_err(e: csv::Error) -> Error {
    Error::schema(None, format!("failed to encode CSV: {e}"))
}

fn check_hit(hit: u8) -> Result<()> {
    if hit > 1 {
        Err(Error::validation(format!("hit label {hit} is not 0 or 1")))
    } else {
        Ok(())
    }
}

fn check_header(headers: &csv::StringRecord, require_hit: bool) -> Result<bool> {
    let names: Vec<&str> = headers.iter().collect();
    if let Some(missing) = RECORD_COLUMNS.iter().find(|c| !names.contains(c)) {
        return Err(Error::schema(Some(1), format!("missing column `{missing}`")));
    }
    let has_hit = names.len() == RECORD_COLUMNS.len() + 1 && names[RECORD_COLUMNS.len()] == HIT_COLUMN;
    if require_hit && !has_hit {
        return Err(Error::schema(
            Some(1),
            format!("missing column `{HIT_COLUMN}` (expected as the last column)"),
        ));
    }
    for (pos, (got, want)) in names.iter().zip(RECORD_COLUMNS).enumerate() {
        if *got != want {
            return Err(Error::schema(
                Some(1),
                format!("column {} is `{got}`, expected `{want}`", pos + 1),
            ));
        }
    }
    if names.len() > RECORD_COLUMNS.len() && !has_hit {
        return Err(Error::schema(
            Some(1),
            format!("unexpected column `{}`", names[RECORD_COLUMNS.len()]),
        ));
    }
    Ok(has_hit)
}

/// Rows plus the `hit` value when the file has that column.
fn parse_csv<R: Read>(input: R, require_hit: bool) -> Result<Vec<(TrackRecord, Option<u8>)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::schema(Some(1), e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(Error::schema(Some(1), "file is empty"));
    }
    let has_hit = check_header(&headers, require_hit)?;

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line());
            Error::schema(line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line());
        let record: TrackRecord = row
            .deserialize(Some(&headers))
            .map_err(|e| Error::schema(line, e.to_string()))?;
        record
            .validate()
            .map_err(|e| Error::schema(line, e.to_string()))?;
        let hit = if has_hit {
            let raw = &row[RECORD_COLUMNS.len()];
            let hit: u8 = raw
                .trim()
                .parse()
                .map_err(|_| Error::schema(line, format!("hit value `{raw}` is not 0 or 1")))?;
            check_hit(hit).map_err(|e| Error::schema(line, e.to_string()))?;
            Some(hit)
        } else {
            None
        };
        out.push((record, hit));
    }
    Ok(out)
}

fn parse_jsonl<T: serde::de::DeserializeOwned>(
    bytes: &[u8],
    validate: impl Fn(&T) -> Result<()>,
) -> Result<Vec<T>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::schema(None, e.to_string()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = Some(i as u64 + 1);
        if line.trim().is_empty() {
            continue;
        }
        let item: T = serde_json::from_str(line).map_err(|e| Error::schema(line_no, e.to_string()))?;
        validate(&item).map_err(|e| Error::schema(line_no, e.to_string()))?;
        out.push(item);
    }
    Ok(out)
}

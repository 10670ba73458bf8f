//! Flat-file export of trial records: JSON lines or CSV, same columns.
//!
//! Columns: `trial_id, d_action, d_outcome, message_delivered, setting_pair,
//! outcome1, outcome4`. Missing values are `null` in JSON and empty in CSV.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::SettingPair;
use crate::error::{Error, Result};
use crate::protocol::{DOutcome, StationDAction, TrialRecord};

pub const CSV_HEADER: [&str; 7] = [
    "trial_id",
    "d_action",
    "d_outcome",
    "message_delivered",
    "setting_pair",
    "outcome1",
    "outcome4",
];

/// One exported row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub trial_id: u64,
    pub d_action: StationDAction,
    pub d_outcome: Option<DOutcome>,
    pub message_delivered: bool,
    pub setting_pair: Option<SettingPair>,
    pub outcome1: i8,
    pub outcome4: i8,
}

impl From<&TrialRecord> for RecordRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            trial_id: r.trial_id,
            d_action: r.d_action,
            d_outcome: r.d_outcome,
            message_delivered: r.message_delivered,
            setting_pair: r.setting_pair,
            outcome1: r.c_outcome_1,
            outcome4: r.c_outcome_4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    Json,
    Csv,
}

pub fn write_json_lines<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &RecordRow::from(r))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(RecordRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records<W: Write>(
    records: &[TrialRecord],
    format: RecordFormat,
    out: W,
) -> Result<()> {
    match format {
        RecordFormat::Json => write_json_lines(records, out),
        RecordFormat::Csv => write_csv(records, out),
    }
}

pub fn read_json_lines<R: BufRead>(input: R) -> Result<Vec<RecordRow>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<RecordRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::Io(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| Ok(row?)).collect()
}

//! CSV and JSON report writers shared by every module.
//!
//! CSV files are RFC-4180 style with LF line endings. An optional metadata
//! block of `# key: value` lines precedes the column header.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<(String, String)>,
}

impl ReportHeader {
    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }
}

pub fn write_csv<W: Write>(
    mut out: W,
    header: Option<&ReportHeader>,
    columns: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    if let Some(h) = header {
        writeln!(out, "# tool_version: {}", h.tool_version)?;
        writeln!(out, "# config_hash: {}", h.config_hash)?;
        match h.seed {
            Some(s) => writeln!(out, "# seed: {s}")?,
            None => writeln!(out, "# seed: none")?,
        }
        for (k, v) in &h.extra {
            writeln!(out, "# {k}: {v}")?;
        }
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: Option<&'a ReportHeader>,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with the header (if any) under a `meta` key.
pub fn write_json<W: Write, T: Serialize>(mut out: W, header: Option<&ReportHeader>, body: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &Envelope { meta: header, body })?;
    writeln!(out)?;
    Ok(())
}

pub(crate) fn num(v: f64) -> String {
    v.to_string()
}

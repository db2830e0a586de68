use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Experiment, HeadId};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "bloomhead/1";

/// First line of every input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub schema_version: String,
    pub model: String,
    pub layers: u32,
    pub heads: u32,
}

impl Header {
    pub fn new(model: impl Into<String>, layers: u32, heads: u32) -> Self {
        Self { schema_version: SCHEMA_VERSION.into(), model: model.into(), layers, heads }
    }

    pub fn head_count(&self) -> usize {
        (self.layers * self.heads) as usize
    }

    pub fn contains(&self, head: HeadId) -> bool {
        head.layer < self.layers && head.head < self.heads
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttentionObservation {
    pub model: String,
    pub layer: u32,
    pub head: u32,
    pub experiment: Experiment,
    pub sentence_id: String,
    pub condition: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<BTreeMap<String, serde_json::Value>>,
}

impl AttentionObservation {
    pub fn head_id(&self) -> HeadId {
        HeadId::new(self.layer, self.head)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based line number in the input file.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub lines: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    /// experiment label -> condition -> record count
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
}

impl LoadReport {
    pub fn is_clean(&self) -> bool {
        self.rejected.is_empty()
    }

    pub fn count(&self, experiment: Experiment, condition: &str) -> usize {
        self.counts.get(experiment.label()).and_then(|c| c.get(condition)).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Observations {
    /// `None` only for an empty file.
    pub header: Option<Header>,
    pub records: Vec<AttentionObservation>,
    pub report: LoadReport,
}

impl Observations {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn experiment(&self, experiment: Experiment) -> impl Iterator<Item = &AttentionObservation> {
        self.records.iter().filter(move |r| r.experiment == experiment)
    }

    pub fn heads(&self, experiment: Experiment) -> BTreeSet<HeadId> {
        self.experiment(experiment).map(AttentionObservation::head_id).collect()
    }

    /// Values per head for one experiment/condition pair.
    pub fn values(&self, experiment: Experiment, condition: &str) -> BTreeMap<HeadId, Vec<f64>> {
        let mut out: BTreeMap<HeadId, Vec<f64>> = BTreeMap::new();
        for r in self.experiment(experiment).filter(|r| r.condition == condition) {
            out.entry(r.head_id()).or_default().push(r.value);
        }
        out
    }

    /// Concatenate collections that share a header.
    pub fn merge(mut self, other: Observations) -> Result<Self> {
        match (&self.header, &other.header) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Schema(format!(
                    "cannot merge files for different models ({} {}x{} vs {} {}x{})",
                    a.model, a.layers, a.heads, b.model, b.layers, b.heads
                )))
            }
            (None, Some(_)) => self.header = other.header.clone(),
            _ => {}
        }
        let offset = self.report.lines;
        self.report.lines += other.report.lines;
        self.report.accepted += other.report.accepted;
        self.report
            .rejected
            .extend(other.report.rejected.into_iter().map(|r| Rejection { line: r.line + offset, reason: r.reason }));
        for (exp, conds) in other.report.counts {
            let slot = self.report.counts.entry(exp).or_default();
            for (c, n) in conds {
                *slot.entry(c).or_default() += n;
            }
        }
        self.records.extend(other.records);
        Ok(self)
    }
}

/// Parse the header line. Unknown schema versions are an error rather than a
/// rejected line because nothing after them can be trusted.
pub(crate) fn parse_header(line: &str) -> Result<Header> {
    let raw: serde_json::Value =
        serde_json::from_str(line).map_err(|e| Error::Schema(format!("line 1: header is not JSON: {e}")))?;
    let version = raw
        .get("schema_version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Schema("line 1: missing header with schema_version".into()))?;
    if version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion(version.to_string()));
    }
    let header: Header =
        serde_json::from_value(raw).map_err(|e| Error::Schema(format!("line 1: malformed header: {e}")))?;
    if header.layers == 0 || header.heads == 0 {
        return Err(Error::Schema("line 1: model grid must be non-empty".into()));
    }
    Ok(header)
}

type NumberedLine = (usize, String);

/// Iterate non-blank lines with 1-based numbers, returning the header and
/// the remaining lines.
pub(crate) fn split_header<R: BufRead>(reader: R) -> Result<Option<(Header, Vec<NumberedLine>, usize)>> {
    let mut header = None;
    let mut body = Vec::new();
    let mut lines = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Schema(format!("line {}: {e}", i + 1)))?;
        lines = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(parse_header(&line)?);
        } else {
            body.push((i + 1, line));
        }
    }
    Ok(header.map(|h| (h, body, lines)))
}

fn validate(rec: &AttentionObservation, header: &Header) -> std::result::Result<(), String> {
    if rec.model != header.model {
        return Err(format!("model `{}` does not match header model `{}`", rec.model, header.model));
    }
    if !header.contains(rec.head_id()) {
        return Err(format!("head {} outside the {}x{} grid", rec.head_id(), header.layers, header.heads));
    }
    if !(rec.value.is_finite() && (0.0..=1.0).contains(&rec.value)) {
        return Err(format!("value {} outside [0, 1]", rec.value));
    }
    if rec.sentence_id.is_empty() {
        return Err("empty sentence_id".into());
    }
    Ok(())
}

/// Parse an observations stream. Bad records are collected in the report
/// with their line numbers; only header problems are fatal.
pub fn parse_observations<R: BufRead>(reader: R) -> Result<Observations> {
    let Some((header, body, lines)) = split_header(reader)? else {
        return Ok(Observations::default());
    };
    let mut out = Observations { report: LoadReport { lines, ..LoadReport::default() }, ..Observations::default() };
    for (line, text) in body {
        let rec = match serde_json::from_str::<AttentionObservation>(&text) {
            Ok(rec) => rec,
            Err(e) => {
                out.report.rejected.push(Rejection { line, reason: format!("malformed record: {e}") });
                continue;
            }
        };
        if let Err(reason) = validate(&rec, &header) {
            out.report.rejected.push(Rejection { line, reason });
            continue;
        }
        *out.report
            .counts
            .entry(rec.experiment.label().to_string())
            .or_default()
            .entry(rec.condition.clone())
            .or_default() += 1;
        out.records.push(rec);
    }
    out.report.accepted = out.records.len();
    out.header = Some(header);
    Ok(out)
}

pub fn load_observations(path: impl AsRef<Path>) -> Result<Observations> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_observations(BufReader::new(file))
}

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::split_header;
use super::{HeadId, Header, Rejection};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::{self, bootstrap_ci, bootstrap_diff_ci, ConfidenceInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationMethod {
    None,
    Zero,
    Mean,
}

impl AblationMethod {
    pub fn label(self) -> &'static str {
        match self {
            AblationMethod::None => "none",
            AblationMethod::Zero => "zero",
            AblationMethod::Mean => "mean",
        }
    }
}

/// One perplexity measurement. `label` optionally names the head set (for
/// instance `ctrl:3` for the fourth random control draw); labels sharing the
/// part before `:` form a family that is summarized across draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationRecord {
    pub sentence_id: String,
    pub repeat: bool,
    pub method: AblationMethod,
    pub head_set: Vec<HeadId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub perplexity: f64,
}

impl AblationRecord {
    /// Label, or the head list joined with `+`.
    pub fn set_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            let mut heads = self.head_set.clone();
            heads.sort();
            heads.iter().map(ToString::to_string).collect::<Vec<_>>().join("+")
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AblationFile {
    pub header: Option<Header>,
    pub records: Vec<AblationRecord>,
    pub rejected: Vec<Rejection>,
}

pub fn parse_ablation_records<R: BufRead>(reader: R) -> Result<AblationFile> {
    let Some((header, body, _)) = split_header(reader)? else {
        return Ok(AblationFile::default());
    };
    let mut out = AblationFile { header: None, records: Vec::new(), rejected: Vec::new() };
    for (line, text) in body {
        let rec: AblationRecord = match serde_json::from_str(&text) {
            Ok(r) => r,
            Err(e) => {
                out.rejected.push(Rejection { line, reason: format!("malformed record: {e}") });
                continue;
            }
        };
        let reason = if !(rec.perplexity.is_finite() && rec.perplexity > 0.0) {
            Some(format!("perplexity {} is not positive", rec.perplexity))
        } else if let Some(h) = rec.head_set.iter().find(|h| !header.contains(**h)) {
            Some(format!("head {h} outside the {}x{} grid", header.layers, header.heads))
        } else if rec.method == AblationMethod::None && !rec.head_set.is_empty() {
            Some("method `none` with a non-empty head set".to_string())
        } else {
            None
        };
        match reason {
            Some(reason) => out.rejected.push(Rejection { line, reason }),
            None => out.records.push(rec),
        }
    }
    out.header = Some(header);
    Ok(out)
}

pub fn load_ablation_records(path: impl AsRef<Path>) -> Result<AblationFile> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_ablation_records(BufReader::new(file))
}

/// Perplexity change for one (method, head set), in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationDelta {
    pub method: AblationMethod,
    pub set: String,
    pub heads: Vec<HeadId>,
    pub repeat_sentences: usize,
    pub norepeat_sentences: usize,
    pub repeat: ConfidenceInterval,
    pub norepeat: ConfidenceInterval,
    /// `repeat - norepeat`; the estimate is that exact difference.
    pub interaction: ConfidenceInterval,
}

/// Spread of deltas across the members of a label family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub method: AblationMethod,
    pub family: String,
    pub draws: usize,
    pub repeat_mean: f64,
    pub repeat_sd: f64,
    pub norepeat_mean: f64,
    pub norepeat_sd: f64,
    pub interaction_mean: f64,
    pub interaction_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub deltas: Vec<AblationDelta>,
    pub families: Vec<FamilySummary>,
}

impl AblationReport {
    pub fn find(&self, method: AblationMethod, set: &str) -> Option<&AblationDelta> {
        self.deltas.iter().find(|d| d.method == method && d.set == set)
    }
}

type Group<'a> = (AblationMethod, String, Vec<&'a AblationRecord>);

fn group_deltas(
    group: &Group<'_>,
    base: &BTreeMap<(&str, bool), f64>,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<AblationDelta> {
    let (method, set, recs) = group;
    let mut seen = BTreeMap::new();
    let mut rep = Vec::new();
    let mut norep = Vec::new();
    for r in recs {
        let key = (r.sentence_id.as_str(), r.repeat);
        let Some(&b) = base.get(&key) else {
            return Err(Error::Schema(format!(
                "{} ablation of {set}: sentence `{}` has no baseline record",
                method.label(),
                r.sentence_id
            )));
        };
        if seen.insert(key, ()).is_some() {
            return Err(Error::Schema(format!(
                "{} ablation of {set}: sentence `{}` appears twice",
                method.label(),
                r.sentence_id
            )));
        }
        let d = 100.0 * (r.perplexity - b) / b;
        if r.repeat {
            rep.push(d);
        } else {
            norep.push(d);
        }
    }
    if rep.is_empty() || norep.is_empty() {
        return Err(Error::MissingData(format!(
            "{} ablation of {set} needs both repeat and no-repeat sentences",
            method.label()
        )));
    }
    let mut heads = recs[0].head_set.clone();
    heads.sort();
    Ok(AblationDelta {
        method: *method,
        set: set.clone(),
        heads,
        repeat_sentences: rep.len(),
        norepeat_sentences: norep.len(),
        repeat: bootstrap_ci(&rep, level, resamples, derive_seed(seed, 0))?,
        norepeat: bootstrap_ci(&norep, level, resamples, derive_seed(seed, 1))?,
        interaction: bootstrap_diff_ci(&rep, &norep, level, resamples, derive_seed(seed, 2))?,
    })
}

/// Percent perplexity change per (method, head set), paired with the
/// `none` record of the same sentence. Unpaired or duplicated sentences are
/// an error.
pub fn ablation_deltas(records: &[AblationRecord], level: f64, resamples: usize, seed: u64) -> Result<AblationReport> {
    let mut base = BTreeMap::new();
    let mut groups: BTreeMap<(AblationMethod, String), Vec<&AblationRecord>> = BTreeMap::new();
    for r in records {
        if r.method == AblationMethod::None {
            if base.insert((r.sentence_id.as_str(), r.repeat), r.perplexity).is_some() {
                return Err(Error::Schema(format!("sentence `{}` has two baseline records", r.sentence_id)));
            }
        } else {
            groups.entry((r.method, r.set_label())).or_default().push(r);
        }
    }
    if base.is_empty() {
        return Err(Error::MissingData("no baseline (method none) records".into()));
    }
    if groups.is_empty() {
        return Err(Error::MissingData("no ablated records".into()));
    }
    let groups: Vec<Group<'_>> = groups.into_iter().map(|((m, s), v)| (m, s, v)).collect();
    let deltas = groups
        .par_iter()
        .enumerate()
        .map(|(i, g)| group_deltas(g, &base, level, resamples, derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;

    let mut fams: BTreeMap<(AblationMethod, &str), Vec<&AblationDelta>> = BTreeMap::new();
    for d in &deltas {
        if let Some((family, _)) = d.set.split_once(':') {
            fams.entry((d.method, family)).or_default().push(d);
        }
    }
    let spread = |ds: &[&AblationDelta], f: fn(&AblationDelta) -> f64| {
        let xs: Vec<f64> = ds.iter().map(|d| f(d)).collect();
        (stats::mean(&xs), if xs.len() > 1 { stats::sample_sd(&xs) } else { 0.0 })
    };
    let families = fams
        .into_iter()
        .map(|((method, family), ds)| {
            let (repeat_mean, repeat_sd) = spread(&ds, |d| d.repeat.estimate);
            let (norepeat_mean, norepeat_sd) = spread(&ds, |d| d.norepeat.estimate);
            let (interaction_mean, interaction_sd) = spread(&ds, |d| d.interaction.estimate);
            FamilySummary {
                method,
                family: family.to_string(),
                draws: ds.len(),
                repeat_mean,
                repeat_sd,
                norepeat_mean,
                norepeat_sd,
                interaction_mean,
                interaction_sd,
            }
        })
        .collect();
    Ok(AblationReport { deltas, families })
}
